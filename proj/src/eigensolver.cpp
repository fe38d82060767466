#include "fmloc/eigensolver.hpp"

#include "fmloc/error.hpp"
#include "fmloc/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace fmloc {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using Operator = std::function<VectorXd(const VectorXd&)>;

struct KrylovResult {
    VectorXd theta;     // descending
    MatrixXd vectors;   // mass-orthonormal Ritz vectors
    VectorXd residual;  // Ritz residual norms
    bool converged = false;
    Index applications = 0;
};

class MassSpace {
public:
    explicit MassSpace(const SparseMatrix& mass) : mass_(mass) {}

    double norm(const VectorXd& v) const { return std::sqrt(std::max(0.0, v.dot(mass_ * v))); }

    /// Two passes of classical Gram-Schmidt against `locked` and the first
    /// `cols` columns of `basis`; returns the accumulated basis coefficients.
    VectorXd orthogonalize(VectorXd& w, const MatrixXd& locked, const MatrixXd& basis, Index cols) const
    {
        VectorXd h = VectorXd::Zero(cols);
        for (int pass = 0; pass < 2; ++pass) {
            const VectorXd mw = mass_ * w;
            if (locked.cols() > 0) {
                const VectorXd c = locked.transpose() * mw;
                w.noalias() -= locked * c;
            }
            if (cols > 0) {
                const VectorXd c = basis.leftCols(cols).transpose() * mw;
                w.noalias() -= basis.leftCols(cols) * c;
                h += c;
            }
        }
        return h;
    }

private:
    const SparseMatrix& mass_;
};

VectorXd random_vector(Index d, std::uint64_t seed, std::uint64_t stream)
{
    const CounterRng rng(seed, stream);
    VectorXd v(d);
    for (Index i = 0; i < d; ++i) v[i] = rng.uniform(static_cast<std::uint64_t>(i)) - 0.5;
    return v;
}

// Krylov-Schur iteration for the `want` largest eigenvalues of a
// mass-self-adjoint operator restricted to the complement of `locked`.
KrylovResult krylov_schur(const Operator& op,
                          const MassSpace& space,
                          const MatrixXd& locked,
                          Index want,
                          Index ncv,
                          VectorXd start,
                          double tol,
                          Index budget,
                          std::uint64_t seed)
{
    const Index d = start.size();
    MatrixXd basis(d, ncv + 1);
    MatrixXd h = MatrixXd::Zero(ncv + 1, ncv);
    std::uint64_t stream = 1;

    auto fresh_direction = [&](Index cols) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            VectorXd w = random_vector(d, seed, stream++);
            space.orthogonalize(w, locked, basis, cols);
            const double nrm = space.norm(w);
            if (nrm > 1e-8) return VectorXd(w / nrm);
        }
        throw ConvergenceFailure("could not extend the Krylov basis", 0.0);
    };

    space.orthogonalize(start, locked, basis, 0);
    double nrm = space.norm(start);
    basis.col(0) = nrm > 1e-300 ? VectorXd(start / nrm) : fresh_direction(0);

    KrylovResult result;
    Index kept = 0;
    while (true) {
        for (Index j = kept; j < ncv; ++j) {
            VectorXd w = op(basis.col(j));
            ++result.applications;
            const VectorXd coeff = space.orthogonalize(w, locked, basis, j + 1);
            h.block(0, j, j + 1, 1) = coeff;
            const double beta = space.norm(w);
            const double scale = std::max(std::abs(coeff[j]), coeff.cwiseAbs().maxCoeff());
            if (beta <= 1e-12 * scale) {
                // Invariant subspace: continue with an unrelated direction.
                h(j + 1, j) = 0.0;
                basis.col(j + 1) = fresh_direction(j + 1);
            } else {
                h(j + 1, j) = beta;
                basis.col(j + 1) = w / beta;
            }
        }

        const MatrixXd hm = h.topLeftCorner(ncv, ncv);
        const MatrixXd sym = 0.5 * (hm + hm.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym);
        // Descending order.
        const VectorXd theta = es.eigenvalues().reverse();
        const MatrixXd s = es.eigenvectors().rowwise().reverse();
        const double beta_m = h(ncv, ncv - 1);
        VectorXd res = (beta_m * s.row(ncv - 1).transpose()).cwiseAbs();

        Index nconv = 0;
        for (Index i = 0; i < want; ++i) {
            if (res[i] <= tol * std::abs(theta[i])) ++nconv;
        }
        const bool done = nconv == want;
        if (done || result.applications >= budget) {
            result.theta = theta.head(want);
            result.vectors = basis.leftCols(ncv) * s.leftCols(want);
            result.residual = res.head(want);
            result.converged = done;
            return result;
        }

        Index keep = want + std::min(nconv, (ncv - want) / 2);
        keep = std::clamp<Index>(keep, want, ncv - 1);
        const MatrixXd rotated = basis.leftCols(ncv) * s.leftCols(keep);
        const VectorXd residual_vector = basis.col(ncv);
        basis.leftCols(keep) = rotated;
        basis.col(keep) = residual_vector;
        h.setZero();
        for (Index i = 0; i < keep; ++i) {
            h(i, i) = theta[i];
            h(keep, i) = beta_m * s(ncv - 1, i);
        }
        kept = keep;
    }
}

EigenResult dense_solve(const OperatorPair& ops, Index p)
{
    const MatrixXd k = MatrixXd(ops.stiffness);
    const MatrixXd m = MatrixXd(ops.mass);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(k, m);
    if (ges.info() != Eigen::Success) throw ConvergenceFailure("dense generalized eigensolve failed", 0.0);
    EigenResult out;
    out.eigenvalues = ges.eigenvalues().head(p);
    out.eigenvectors = ges.eigenvectors().leftCols(p);
    const MatrixXd r = k * out.eigenvectors - m * out.eigenvectors * out.eigenvalues.asDiagonal();
    out.max_residual = r.colwise().norm().maxCoeff();
    return out;
}

} // namespace

void normalize_signs(Eigen::MatrixXd& vectors)
{
    for (Index c = 0; c < vectors.cols(); ++c) {
        Index best = 0;
        double best_abs = -1.0;
        for (Index r = 0; r < vectors.rows(); ++r) {
            const double a = std::abs(vectors(r, c));
            if (a > best_abs) {
                best_abs = a;
                best = r;
            }
        }
        if (vectors.rows() > 0 && vectors(best, c) < 0.0) vectors.col(c) *= -1.0;
    }
}

EigenResult solve_smallest_eigs(const OperatorPair& ops, Index p, const EigenSolverOptions& options)
{
    const Index d = ops.num_dofs();
    if (p < 1 || p >= d) {
        throw InvalidArgument("requested " + std::to_string(p) + " eigenpairs from " + std::to_string(d) +
                              " dofs; need 1 <= p < dofs");
    }
    Index ncv = options.subspace > 0 ? options.subspace : std::max(2 * p + 1, p + 20);

    EigenResult out;
    if (ncv >= d) {
        out = dense_solve(ops, p);
        normalize_signs(out.eigenvectors);
        return out;
    }

    const SparseMatrix shifted = ops.stiffness - options.shift * ops.mass;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) {
        throw ConvergenceFailure("factorization of the shifted stiffness matrix failed", 0.0);
    }
    const MassSpace space(ops.mass);
    const Operator op = [&](const VectorXd& x) -> VectorXd { return ldlt.solve(ops.mass * x); };

    const Index budget = std::max<Index>(options.budget_per_eigenpair * p, ncv);
    auto main = krylov_schur(op, space, MatrixXd(d, 0), p, ncv, random_vector(d, options.seed, 0),
                             options.tolerance, budget, options.seed);
    Index applications = main.applications;
    if (!main.converged) {
        std::ostringstream msg;
        msg << "Lanczos did not converge " << p << " eigenpairs within " << budget
            << " operator applications";
        throw ConvergenceFailure(msg.str(), main.residual.maxCoeff());
    }

    VectorXd theta = main.theta;
    MatrixXd vecs = main.vectors;
    VectorXd residual = main.residual;

    if (options.probe_multiplicity) {
        const Index probe_ncv = std::min<Index>(30, d - p - 1);
        for (Index round = 0; round < p && probe_ncv >= 2; ++round) {
            auto probe = krylov_schur(op, space, vecs, 1, probe_ncv,
                                      random_vector(d, options.seed, 1000 + static_cast<std::uint64_t>(round)),
                                      options.tolerance, 4 * probe_ncv, options.seed + 7919 * (round + 1));
            applications += probe.applications;
            if (!probe.converged || !(probe.theta[0] > theta[p - 1])) break;
            // A missed eigenvalue inside the wanted range: insert it and drop the last.
            MatrixXd merged(d, p + 1);
            merged << vecs, probe.vectors.col(0);
            VectorXd merged_theta(p + 1);
            merged_theta << theta, probe.theta[0];
            VectorXd merged_res(p + 1);
            merged_res << residual, probe.residual[0];
            std::vector<Index> order(static_cast<std::size_t>(p + 1));
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](Index a, Index b) { return merged_theta[a] > merged_theta[b]; });
            for (Index i = 0; i < p; ++i) {
                vecs.col(i) = merged.col(order[static_cast<std::size_t>(i)]);
                theta[i] = merged_theta[order[static_cast<std::size_t>(i)]];
                residual[i] = merged_res[order[static_cast<std::size_t>(i)]];
            }
        }
    }

    // theta = 1 / (lambda - sigma); descending theta is ascending lambda.
    out.eigenvalues.resize(p);
    for (Index i = 0; i < p; ++i) out.eigenvalues[i] = options.shift + 1.0 / theta[i];
    out.eigenvectors = std::move(vecs);
    out.operator_applications = applications;
    out.max_residual = residual.maxCoeff();
    normalize_signs(out.eigenvectors);
    return out;
}

} // namespace fmloc
