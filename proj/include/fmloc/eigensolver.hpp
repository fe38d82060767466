#pragma once

#include "fmloc/fem.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace fmloc {

struct EigenSolverOptions {
    /// Shift of the inverted operator; slightly negative keeps K - sigma*M
    /// definite when K has a null space.
    double shift = -1e-8;
    /// Relative Ritz residual required of every wanted pair.
    double tolerance = 1e-9;
    /// Operator applications allowed per wanted eigenpair.
    Index budget_per_eigenpair = 50;
    /// Krylov subspace size; 0 picks max(2p + 1, p + 20).
    Index subspace = 0;
    std::uint64_t seed = 0x1b2f3c4d5e6f7081ULL;
    /// After convergence, search the deflated space for eigenvalues that a
    /// single-vector Krylov run can miss (exact multiplicities).
    bool probe_multiplicity = true;
};

struct EigenResult {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // dofs x p, mass-orthonormal
    Index operator_applications = 0;
    double max_residual = 0.0;
};

/// Smallest p generalized eigenpairs of stiffness v = lambda mass v.
///
/// Thick-restart (Krylov-Schur) Lanczos on (K - sigma M)^{-1} M in the mass
/// inner product. Each eigenvector is signed so that its entry of largest
/// magnitude is positive (first such entry on ties).
EigenResult solve_smallest_eigs(const OperatorPair& ops, Index p, const EigenSolverOptions& options = {});

/// Apply the sign convention in place.
void normalize_signs(Eigen::MatrixXd& vectors);

} // namespace fmloc
