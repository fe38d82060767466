#pragma once

#include "fmloc/mesh.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fmloc::test {

inline TriangleMesh tetrahedron()
{
    std::vector<Vec3> v = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    std::vector<Face> f = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    return TriangleMesh(v, f, "tet");
}

inline TriangleMesh unit_cube()
{
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i) v.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
    std::vector<Face> f = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                           {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
    return TriangleMesh(v, f, "cube");
}

inline TriangleMesh equilateral_triangle()
{
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2.0, 0}};
    return TriangleMesh(v, {{0, 1, 2}}, "equilateral");
}

/// Regular grid of (nx + 1) x (ny + 1) vertices on [0, w] x [0, h], z = 0.
inline TriangleMesh grid(int nx, int ny, double w = 1.0, double h = 1.0)
{
    std::vector<Vec3> v;
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) v.emplace_back(w * i / nx, h * j / ny, 0.0);
    }
    std::vector<Face> f;
    auto id = [nx](int i, int j) { return static_cast<Index>(j * (nx + 1) + i); };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return TriangleMesh(v, f, "grid");
}

inline TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& r, const Vec3& t)
{
    std::vector<Vec3> v;
    v.reserve(mesh.vertices().size());
    for (const auto& p : mesh.vertices()) v.push_back(r * p + t);
    return TriangleMesh(v, mesh.faces(), mesh.name());
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("fmloc_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    out << text;
}

} // namespace fmloc::test
