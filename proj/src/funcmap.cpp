#include "fmloc/funcmap.hpp"

#include "fmloc/error.hpp"
#include "fmloc/log.hpp"
#include "fmloc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace fmloc {

namespace {

constexpr Index kBlockRows = 64;
constexpr double kDegenerateRowNorm = 1e-14;

std::string dims(Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); }

} // namespace

CoefficientMatrix coefficients(const SpectralBasis& basis, const HksField& hks)
{
    if (basis.eigenvectors.rows() != hks.values.rows()) {
        throw DimensionMismatch("basis has " + std::to_string(basis.eigenvectors.rows()) + " rows, HKS has " +
                                std::to_string(hks.values.rows()));
    }
    CoefficientMatrix out;
    out.scale = 1.0 / std::sqrt(static_cast<double>(hks.values.rows()));
    out.entries = out.scale * (basis.eigenvectors.transpose() * hks.values);
    return out;
}

FunctionalMapC estimate_c(const CoefficientMatrix& a, const CoefficientMatrix& b, double q)
{
    if (a.entries.rows() != b.entries.rows() || a.entries.cols() != b.entries.cols()) {
        throw DimensionMismatch("coefficient matrices are " + dims(a.entries.rows(), a.entries.cols()) + " and " +
                                dims(b.entries.rows(), b.entries.cols()));
    }
    if (!(q >= 0.0 && q < 1.0)) throw InvalidArgument("ridge weight q must lie in [0, 1)");

    const Index p = a.entries.rows();
    FunctionalMapC c;
    c.q = q;
    c.unconstrained = Eigen::VectorXd::Zero(p);
    c.diag = Eigen::VectorXd::Zero(p);
    for (Index j = 0; j < p; ++j) {
        const double aa = a.entries.row(j).squaredNorm();
        if (aa < kDegenerateRowNorm) {
            c.degenerate_rows.push_back(j);
            continue;
        }
        const double c0 = a.entries.row(j).dot(b.entries.row(j)) / aa;
        c.unconstrained[j] = c0;
        const double sign = c0 > 0.0 ? 1.0 : (c0 < 0.0 ? -1.0 : 0.0);
        c.diag[j] = (1.0 - q) * c0 + q * sign;
    }
    if (!c.degenerate_rows.empty()) {
        warn("DegenerateRow: " + std::to_string(c.degenerate_rows.size()) +
             " coefficient rows vanish on the source mesh; their map entries are set to 0");
    }
    return c;
}

FunctionalMapC functional_map(const SpectralBasis& basis_a,
                              const CoefficientMatrix& a,
                              const SpectralBasis& basis_b,
                              const CoefficientMatrix& b,
                              double q)
{
    if (basis_a.size() != basis_b.size()) {
        throw DimensionMismatch("bases carry " + std::to_string(basis_a.size()) + " and " +
                                std::to_string(basis_b.size()) + " eigenpairs");
    }
    FunctionalMapC c = estimate_c(a, b, q);
    std::set<Index> clusters(basis_a.symmetry_clusters.begin(), basis_a.symmetry_clusters.end());
    clusters.insert(basis_b.symmetry_clusters.begin(), basis_b.symmetry_clusters.end());
    c.symmetry_warnings.assign(clusters.begin(), clusters.end());
    if (!c.symmetry_warnings.empty()) {
        warn("SymmetryWarning: " + std::to_string(c.symmetry_warnings.size()) +
             " near-repeated eigenvalue pairs; the diagonal map is unreliable there");
    }
    return c;
}

PointMap recover_point_map(const SpectralBasis& basis_a,
                           const SpectralBasis& basis_b,
                           const FunctionalMapC& cmap,
                           const HksField& hks_a,
                           const HksField& hks_b,
                           Index m,
                           const std::optional<VertexMask>& roi,
                           int threads)
{
    const Index p = basis_a.size();
    const Index na = basis_a.eigenvectors.rows();
    const Index nb = basis_b.eigenvectors.rows();
    if (basis_b.size() != p || cmap.diag.size() != p) {
        throw DimensionMismatch("eigenpair counts differ: source " + std::to_string(p) + ", target " +
                                std::to_string(basis_b.size()) + ", map " + std::to_string(cmap.diag.size()));
    }
    if (hks_a.values.rows() != na || hks_b.values.rows() != nb || hks_a.values.cols() != hks_b.values.cols()) {
        throw DimensionMismatch("HKS fields " + dims(hks_a.values.rows(), hks_a.values.cols()) + " and " +
                                dims(hks_b.values.rows(), hks_b.values.cols()) + " do not match the bases");
    }
    if (m < 1 || m > nb) throw InvalidArgument("candidate count m = " + std::to_string(m) + " outside [1, n_B]");
    if (roi && static_cast<Index>(roi->size()) != na) throw DimensionMismatch("ROI mask length differs from source mesh");

    std::vector<Index> sources;
    for (Index x = 0; x < na; ++x) {
        if (!roi || (*roi)[static_cast<std::size_t>(x)]) sources.push_back(x);
    }

    PointMap map;
    map.m = m;
    map.roi_applied = roi.has_value();
    map.target.assign(static_cast<std::size_t>(na), kNoTarget);
    map.deviation.assign(static_cast<std::size_t>(na), 0.0);

    const Eigen::MatrixXd scaled_b = basis_b.eigenvectors * cmap.diag.asDiagonal();
    // K x n layouts make HKS rows contiguous.
    const Eigen::MatrixXd fa = hks_a.values.transpose();
    const Eigen::MatrixXd fb = hks_b.values.transpose();

    const auto count = static_cast<Index>(sources.size());
    const Index blocks = (count + kBlockRows - 1) / kBlockRows;
    parallel_for(blocks, threads, [&](Index blk) {
        const Index begin = blk * kBlockRows;
        const Index rows = std::min(kBlockRows, count - begin);
        Eigen::MatrixXd xa(p, rows);
        for (Index r = 0; r < rows; ++r) {
            xa.col(r) = basis_a.eigenvectors.row(sources[static_cast<std::size_t>(begin + r)]).transpose();
        }
        const Eigen::MatrixXd scores = scaled_b * xa;  // nb x rows

        std::vector<Index> cand;
        cand.reserve(static_cast<std::size_t>(m));
        for (Index r = 0; r < rows; ++r) {
            const Index x = sources[static_cast<std::size_t>(begin + r)];
            const double* s = scores.col(r).data();
            // Top m by score, lower index first among equal scores; `cand`
            // stays sorted best first.
            cand.clear();
            for (Index y = 0; y < nb; ++y) {
                if (static_cast<Index>(cand.size()) == m && !(s[y] > s[cand.back()])) continue;
                auto pos = std::upper_bound(cand.begin(), cand.end(), y,
                                            [s](Index lhs, Index rhs) { return s[lhs] > s[rhs]; });
                cand.insert(pos, y);
                if (static_cast<Index>(cand.size()) > m) cand.pop_back();
            }
            Index best = kNoTarget;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (Index y : cand) {
                const double d2 = (fa.col(x) - fb.col(y)).squaredNorm();
                if (d2 < best_d2 || (d2 == best_d2 && y < best)) {
                    best_d2 = d2;
                    best = y;
                }
            }
            map.target[static_cast<std::size_t>(x)] = best;
            map.deviation[static_cast<std::size_t>(x)] = std::sqrt(best_d2);
        }
    });
    return map;
}

double accuracy(const PointMap& map, const std::vector<Index>& ground_truth, const std::vector<Vec3>& coords_b)
{
    if (ground_truth.size() != map.target.size()) {
        throw DimensionMismatch("ground truth has " + std::to_string(ground_truth.size()) + " entries for " +
                                std::to_string(map.target.size()) + " mapped vertices");
    }
    const auto nb = static_cast<Index>(coords_b.size());
    double total = 0.0;
    Index counted = 0;
    for (std::size_t x = 0; x < map.target.size(); ++x) {
        const Index t = map.target[x];
        if (t == kNoTarget) continue;
        const Index g = ground_truth[x];
        if (t < 0 || t >= nb || g < 0 || g >= nb) throw InvalidArgument("map index out of range for target mesh");
        total += (coords_b[static_cast<std::size_t>(t)] - coords_b[static_cast<std::size_t>(g)]).norm();
        ++counted;
    }
    return counted > 0 ? total / static_cast<double>(counted) : 0.0;
}

} // namespace fmloc
