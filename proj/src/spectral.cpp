#include "fmloc/spectral.hpp"

#include "fmloc/error.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace fmloc {

namespace {

constexpr char kCacheMagic[4] = {'F', 'M', 'L', 'B'};
constexpr std::uint32_t kCacheVersion = 1;

// Below this magnitude an eigenvalue is zero regardless of the spectrum's scale.
constexpr double kAbsoluteZeroFloor = 1e-12;

template <typename T>
void write_pod(std::ofstream& out, const T& value)
{
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_pod(std::ifstream& in, T& value)
{
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof(T)));
}

} // namespace

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& raw)
{
    Eigen::MatrixXd q = raw;
    for (Index j = 0; j < q.cols(); ++j) {
        const double original = q.col(j).norm();
        for (int sweep = 0; sweep < 2; ++sweep) {
            for (Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
        }
        const double remaining = q.col(j).norm();
        if (!(remaining > 1e-12 * original) || !(remaining > 0.0)) {
            throw RankDeficient("column " + std::to_string(j) + " is linearly dependent on earlier columns");
        }
        q.col(j) /= remaining;
    }
    return q;
}

std::vector<Index> repeated_eigenvalues(const Eigen::VectorXd& eigenvalues)
{
    std::vector<Index> out;
    for (Index i = 0; i + 1 < eigenvalues.size(); ++i) {
        const double next = eigenvalues[i + 1];
        if (next > 0.0 && next - eigenvalues[i] < 1e-6 * next) out.push_back(i);
    }
    return out;
}

double zero_tolerance(const Eigen::VectorXd& eigenvalues)
{
    const double scale = eigenvalues.size() > 0 ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    const double cut = std::max(1e-9 * scale, kAbsoluteZeroFloor);
    for (Index i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues[i] > cut) return 1e-6 * eigenvalues[i];
    }
    throw NoNonzeroEigenvalue("all " + std::to_string(eigenvalues.size()) + " eigenvalues are numerically zero");
}

Index first_nonzero_index(const Eigen::VectorXd& eigenvalues)
{
    const double tol = zero_tolerance(eigenvalues);
    for (Index i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues[i] > tol) return i;
    }
    throw NoNonzeroEigenvalue("no eigenvalue above the zero tolerance");
}

SpectralBasis spectral_basis(const TriangleMesh& mesh, FemDegree degree, Index p, const EigenSolverOptions& options)
{
    if (p < 1 || p >= mesh.num_vertices()) {
        throw InvalidArgument("p = " + std::to_string(p) + " must satisfy 1 <= p < n = " +
                              std::to_string(mesh.num_vertices()));
    }
    const auto ops = assemble(mesh, degree);
    auto eig = solve_smallest_eigs(ops, p, options);

    SpectralBasis basis;
    basis.eigenvalues = eig.eigenvalues;
    basis.eigenvectors = orthonormalize(eig.eigenvectors.topRows(mesh.num_vertices()));
    basis.degree = degree;
    basis.mesh_size = mesh.num_vertices();
    basis.symmetry_clusters = repeated_eigenvalues(basis.eigenvalues);
    return basis;
}

void save_basis_cache(const SpectralBasis& basis, std::uint64_t mesh_hash, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write basis cache '" + path.string() + "'");
    out.write(kCacheMagic, 4);
    write_pod(out, kCacheVersion);
    write_pod(out, mesh_hash);
    write_pod(out, static_cast<std::uint8_t>(basis.degree == FemDegree::P1 ? 1 : 3));
    write_pod(out, static_cast<std::int64_t>(basis.mesh_size));
    write_pod(out, static_cast<std::int64_t>(basis.size()));
    out.write(reinterpret_cast<const char*>(basis.eigenvalues.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(basis.eigenvalues.size())));
    out.write(reinterpret_cast<const char*>(basis.eigenvectors.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(basis.eigenvectors.size())));
    if (!out) throw IOError("write failed for basis cache '" + path.string() + "'");
}

bool load_basis_cache(const std::filesystem::path& path,
                      std::uint64_t mesh_hash,
                      FemDegree degree,
                      Index p,
                      SpectralBasis& out)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t hash = 0;
    std::uint8_t deg = 0;
    std::int64_t n = 0, cols = 0;
    if (!in.read(magic, 4) || std::memcmp(magic, kCacheMagic, 4) != 0) return false;
    if (!read_pod(in, version) || version != kCacheVersion) return false;
    if (!read_pod(in, hash) || hash != mesh_hash) return false;
    if (!read_pod(in, deg) || deg != (degree == FemDegree::P1 ? 1 : 3)) return false;
    if (!read_pod(in, n) || !read_pod(in, cols) || cols != p || n <= 0) return false;

    SpectralBasis basis;
    basis.eigenvalues.resize(cols);
    basis.eigenvectors.resize(n, cols);
    if (!in.read(reinterpret_cast<char*>(basis.eigenvalues.data()),
                 static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(cols)))) {
        return false;
    }
    if (!in.read(reinterpret_cast<char*>(basis.eigenvectors.data()),
                 static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(n * cols)))) {
        return false;
    }
    basis.degree = degree;
    basis.mesh_size = n;
    basis.symmetry_clusters = repeated_eigenvalues(basis.eigenvalues);
    out = std::move(basis);
    return true;
}

} // namespace fmloc
