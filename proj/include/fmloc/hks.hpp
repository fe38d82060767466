#pragma once

#include "fmloc/spectral.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace fmloc {

struct TimeGrid {
    Eigen::VectorXd values;  // increasing, log-uniform
    double epsilon = 1e-4;

    Index size() const { return values.size(); }
};

/// Denominator of the scaled HKS.
enum class HksScaling {
    /// sum_{i>=0} exp(-lambda_i t): the integral of k_t(x, x) over the
    /// surface. Tends to 1 as t grows, so the field stays O(1) on the whole
    /// grid.
    ManifoldIntegral,
    /// sum_{i>=1} exp(-lambda_i t), dropping the zero modes. The field then
    /// grows like 1 / exp(-lambda_1 t) and small spectral shifts move every
    /// vertex by a common offset.
    ExcludeZeroModes,
};

std::string to_string(HksScaling s);
HksScaling hks_scaling_from_string(const std::string& s);

/// Normalized, scaled heat kernel signature: entry (x, k) is
///   n * sum_{i>=0} exp(-lambda_i t_k) phi_i(x)^2 / Z(t_k)
/// with Z chosen by HksScaling.
struct HksField {
    Eigen::MatrixXd values;  // n x K
    TimeGrid grid;
    Index mesh_size = 0;
};

/// K log-uniform times on [-ln(eps) / lambda_{p-1}, -ln(eps) / lambda_1],
/// lambda_1 being the first eigenvalue above zero_tolerance().
TimeGrid time_grid(const Eigen::VectorXd& eigenvalues, Index K, double epsilon);

HksField hks_field(const SpectralBasis& basis,
                   const TimeGrid& grid,
                   HksScaling scaling = HksScaling::ManifoldIntegral);

/// Truncated k_t(x, x) without scaling or normalization (n x K).
Eigen::MatrixXd heat_kernel_diagonal(const SpectralBasis& basis, const TimeGrid& grid);

/// CSV with a `t` column followed by one column per requested vertex.
void save_hks_csv(const HksField& field, const std::vector<Index>& vertices, const std::filesystem::path& path);

} // namespace fmloc
