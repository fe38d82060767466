#pragma once

#include "fmloc/hks.hpp"
#include "fmloc/mesh.hpp"
#include "fmloc/spectral.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace fmloc {

/// Projection of the HKS columns on the spectral basis, scaled by 1/sqrt(n).
struct CoefficientMatrix {
    Eigen::MatrixXd entries;  // p x K
    double scale = 1.0;
};

/// Diagonal functional map estimate.
struct FunctionalMapC {
    Eigen::VectorXd diag;           // ridge estimate c*
    Eigen::VectorXd unconstrained;  // least-squares estimate c0
    double q = 0.0;
    /// Eigenvalue-cluster indices reported by either basis.
    std::vector<Index> symmetry_warnings;
    /// Rows whose source coefficients vanish; their c is set to 0.
    std::vector<Index> degenerate_rows;
};

inline constexpr Index kNoTarget = -1;

struct PointMap {
    std::vector<Index> target;      // kNoTarget outside the ROI
    std::vector<double> deviation;  // 0 outside the ROI
    Index m = 0;
    bool roi_applied = false;

    Index size() const { return static_cast<Index>(target.size()); }
};

CoefficientMatrix coefficients(const SpectralBasis& basis, const HksField& hks);

/// c0_j = <A_j, B_j> / <A_j, A_j> and c*_j = (1 - q) c0_j + q sign(c0_j).
FunctionalMapC estimate_c(const CoefficientMatrix& a, const CoefficientMatrix& b, double q);

/// estimate_c plus the symmetry warnings of both bases.
FunctionalMapC functional_map(const SpectralBasis& basis_a,
                              const CoefficientMatrix& a,
                              const SpectralBasis& basis_b,
                              const CoefficientMatrix& b,
                              double q);

/// For each source vertex x (inside `roi` when given), score every target
/// vertex by Phi_B diag(c) Phi_A(x)^T, keep the m best (ties to the lower
/// index) and pick the candidate with the closest HKS row.
PointMap recover_point_map(const SpectralBasis& basis_a,
                           const SpectralBasis& basis_b,
                           const FunctionalMapC& cmap,
                           const HksField& hks_a,
                           const HksField& hks_b,
                           Index m,
                           const std::optional<VertexMask>& roi = std::nullopt,
                           int threads = 1);

/// Mean distance between mapped and ground-truth target positions over the
/// mapped vertices (ROI sentinels are skipped).
double accuracy(const PointMap& map, const std::vector<Index>& ground_truth, const std::vector<Vec3>& coords_b);

} // namespace fmloc
