#pragma once

#include "fmloc/eigensolver.hpp"
#include "fmloc/fem.hpp"
#include "fmloc/mesh.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <vector>

namespace fmloc {

/// First p Laplace-Beltrami eigenpairs of a mesh with the eigenvectors
/// restricted to mesh vertices and orthonormalized in the Euclidean inner
/// product.
struct SpectralBasis {
    Eigen::VectorXd eigenvalues;   // nondecreasing, lambda_0 ~ 0 on connected meshes
    Eigen::MatrixXd eigenvectors;  // n x p, orthonormal columns
    FemDegree degree = FemDegree::P3;
    Index mesh_size = 0;
    /// Indices i with lambda_{i+1} - lambda_i < 1e-6 * lambda_{i+1}.
    std::vector<Index> symmetry_clusters;

    Index size() const { return eigenvalues.size(); }
};

/// Modified Gram-Schmidt (with one reorthogonalization sweep per column),
/// processing columns in input order.
/// Throws RankDeficient when a column collapses below 1e-12 of its norm.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& raw);

SpectralBasis spectral_basis(const TriangleMesh& mesh,
                             FemDegree degree,
                             Index p,
                             const EigenSolverOptions& options = {});

/// Pairs (i, i+1) of numerically repeated eigenvalues, reported by first index.
std::vector<Index> repeated_eigenvalues(const Eigen::VectorXd& eigenvalues);

/// Threshold below which an eigenvalue counts as zero: 1e-6 times an
/// estimate of the first nonzero eigenvalue. Throws NoNonzeroEigenvalue when
/// every eigenvalue is numerically zero.
double zero_tolerance(const Eigen::VectorXd& eigenvalues);

/// Index of the first eigenvalue above zero_tolerance().
Index first_nonzero_index(const Eigen::VectorXd& eigenvalues);

/// Binary basis cache: "FMLB" magic, format version, mesh hash, degree, n, p,
/// then eigenvalues and column-major eigenvectors as little-endian doubles.
void save_basis_cache(const SpectralBasis& basis, std::uint64_t mesh_hash, const std::filesystem::path& path);

/// Returns false when the file is absent or was written for a different
/// (mesh hash, degree, p) or format version.
bool load_basis_cache(const std::filesystem::path& path,
                      std::uint64_t mesh_hash,
                      FemDegree degree,
                      Index p,
                      SpectralBasis& out);

} // namespace fmloc
