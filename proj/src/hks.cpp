#include "fmloc/hks.hpp"

#include "fmloc/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace fmloc {

namespace {

// exp(-lambda_i t_k) for every eigenvalue (rows) and time (columns).
Eigen::MatrixXd decay_weights(const Eigen::VectorXd& eigenvalues, const TimeGrid& grid)
{
    return (-eigenvalues * grid.values.transpose()).array().exp().matrix();
}

} // namespace

TimeGrid time_grid(const Eigen::VectorXd& eigenvalues, Index K, double epsilon)
{
    if (K < 2) throw InvalidArgument("time grid needs K >= 2, got " + std::to_string(K));
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
    const Index first = first_nonzero_index(eigenvalues);
    const double scale = -std::log(epsilon);
    const double t_min = scale / eigenvalues[eigenvalues.size() - 1];
    const double t_max = scale / eigenvalues[first];

    TimeGrid grid;
    grid.epsilon = epsilon;
    grid.values.resize(K);
    const double lo = std::log(t_min), hi = std::log(t_max);
    for (Index k = 0; k < K; ++k) {
        grid.values[k] = std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(K - 1));
    }
    grid.values[0] = t_min;
    grid.values[K - 1] = t_max;
    return grid;
}

Eigen::MatrixXd heat_kernel_diagonal(const SpectralBasis& basis, const TimeGrid& grid)
{
    const Eigen::MatrixXd squared = basis.eigenvectors.array().square().matrix();
    return squared * decay_weights(basis.eigenvalues, grid);
}

std::string to_string(HksScaling s)
{
    return s == HksScaling::ManifoldIntegral ? "manifold-integral" : "exclude-zero-modes";
}

HksScaling hks_scaling_from_string(const std::string& s)
{
    if (s == "manifold-integral") return HksScaling::ManifoldIntegral;
    if (s == "exclude-zero-modes") return HksScaling::ExcludeZeroModes;
    throw InvalidArgument("unknown HKS scaling '" + s + "'");
}

HksField hks_field(const SpectralBasis& basis, const TimeGrid& grid, HksScaling scaling)
{
    if (basis.size() < 2) throw InvalidArgument("HKS needs at least two eigenpairs");
    const Index first = first_nonzero_index(basis.eigenvalues);
    const Eigen::MatrixXd weights = decay_weights(basis.eigenvalues, grid);
    const Index skip = scaling == HksScaling::ManifoldIntegral ? 0 : first;
    const Eigen::RowVectorXd total = weights.bottomRows(basis.size() - skip).colwise().sum();

    HksField field;
    field.grid = grid;
    field.mesh_size = basis.mesh_size;
    const Eigen::MatrixXd squared = basis.eigenvectors.array().square().matrix();
    field.values = squared * weights;
    const double n = static_cast<double>(basis.eigenvectors.rows());
    for (Index k = 0; k < grid.size(); ++k) field.values.col(k) *= n / total[k];
    return field;
}

void save_hks_csv(const HksField& field, const std::vector<Index>& vertices, const std::filesystem::path& path)
{
    for (Index v : vertices) {
        if (v < 0 || v >= field.values.rows()) throw InvalidArgument("vertex " + std::to_string(v) + " out of range");
    }
    std::ofstream out(path);
    if (!out) throw IOError("cannot write '" + path.string() + "'");
    out << 't';
    for (Index v : vertices) out << ",v" << v;
    out << '\n';
    char buf[32];
    for (Index k = 0; k < field.grid.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", field.grid.values[k]);
        out << buf;
        for (Index v : vertices) {
            std::snprintf(buf, sizeof(buf), "%.17g", field.values(v, k));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IOError("write failed for '" + path.string() + "'");
}

} // namespace fmloc
