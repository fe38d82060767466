#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fmloc {

using Index = std::int64_t;
using Vec3 = Eigen::Vector3d;
using Face = std::array<Index, 3>;

/// Immutable, validated triangle mesh.
///
/// Construction checks index range, repeated indices, a minimum face area of
/// 1e-12 * (bounding-box diagonal)^2 and edge-manifoldness (no edge shared by
/// more than two faces). Open boundaries are allowed; inconsistent face
/// orientation is accepted with a warning.
class TriangleMesh {
public:
    TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces, std::string name = {});

    Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
    Index num_faces() const { return static_cast<Index>(faces_.size()); }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Face>& faces() const { return faces_; }
    const Vec3& vertex(Index i) const { return vertices_[static_cast<std::size_t>(i)]; }
    const Face& face(Index f) const { return faces_[static_cast<std::size_t>(f)]; }
    const std::string& name() const { return name_; }

    double bbox_diagonal() const;
    double face_area(Index f) const;
    double surface_area() const;

    /// Minimum admissible face area for this mesh's scale.
    double area_tolerance() const;

private:
    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::string name_;
};

/// Per-vertex boolean flags aligned with one mesh.
struct VertexMask {
    std::vector<bool> flags;

    VertexMask() = default;
    explicit VertexMask(std::size_t n, bool value = false) : flags(n, value) {}
    explicit VertexMask(std::vector<bool> f) : flags(std::move(f)) {}

    std::size_t size() const { return flags.size(); }
    bool operator[](std::size_t i) const { return flags[i]; }
    std::size_t count() const;
    std::vector<Index> indices() const;

    static VertexMask from_indices(std::size_t n, const std::vector<Index>& idx);

    friend bool operator==(const VertexMask&, const VertexMask&) = default;
};

struct SubmeshResult {
    TriangleMesh mesh;
    /// parentIndex[i] is the parent-mesh index of submesh vertex i.
    std::vector<Index> parent_index;
};

enum class MeshFormat { OFF, OBJ, PLY };

/// Guess the format from the file extension (case-insensitive).
MeshFormat format_from_extension(const std::filesystem::path& path);

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format);
TriangleMesh load_mesh(const std::filesystem::path& path);

void save_off(const TriangleMesh& mesh, const std::filesystem::path& path);

/// Write an ASCII PLY with a per-vertex `quality` channel and, when flags are
/// given, uchar RGB colors (flagged vertices yellow, the rest dark purple).
void save_diagnosis_mesh(const TriangleMesh& mesh,
                         const std::vector<double>& scalar,
                         const std::optional<VertexMask>& flags,
                         const std::filesystem::path& path);

/// Edge-connected component labels, numbered 0..c-1 in order of the lowest
/// vertex index of each component.
std::vector<Index> connected_components(const TriangleMesh& mesh);

Index count_components(const std::vector<Index>& labels);

/// Keep exactly the faces whose three vertices are kept; vertices are
/// renumbered densely in parent order and only face-referenced vertices
/// survive.
SubmeshResult extract_submesh(const TriangleMesh& mesh, const VertexMask& keep);

/// Area-weighted vertex normals (unit length; zero for isolated vertices).
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

/// 64-bit FNV-1a over vertex coordinates and face indices.
std::uint64_t content_hash(const TriangleMesh& mesh);

std::string hash_hex(std::uint64_t h);

} // namespace fmloc
