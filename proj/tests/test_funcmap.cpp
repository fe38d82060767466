#include "helpers.hpp"

#include "fmloc/error.hpp"
#include "fmloc/funcmap.hpp"
#include "fmloc/log.hpp"
#include "fmloc/pipeline.hpp"
#include "fmloc/rng.hpp"
#include "fmloc/spectral.hpp"
#include "fmloc/synth.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>

using namespace fmloc;
using namespace fmloc::test;

namespace {

Eigen::MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed, std::uint64_t stream = 0)
{
    const CounterRng rng(seed, stream);
    Eigen::MatrixXd m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(static_cast<std::uint64_t>(i));
    return m;
}

// Small integers keep every product exact, so score ties are real ties.
Eigen::MatrixXd integer_matrix(Index rows, Index cols, std::uint64_t seed, int range)
{
    const CounterRng rng(seed, 5);
    Eigen::MatrixXd m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) {
        m.data()[i] = std::floor(rng.uniform(static_cast<std::uint64_t>(i)) * (2 * range + 1)) - range;
    }
    return m;
}

SpectralBasis fake_basis(const Eigen::MatrixXd& vectors)
{
    SpectralBasis b;
    b.eigenvectors = vectors;
    b.eigenvalues = Eigen::VectorXd::LinSpaced(vectors.cols(), 0.0, 1.0);
    b.mesh_size = vectors.rows();
    return b;
}

HksField fake_hks(const Eigen::MatrixXd& values)
{
    HksField f;
    f.values = values;
    f.mesh_size = values.rows();
    return f;
}

// Direct evaluation of the recovery rule: full score vector, sort by
// (score desc, index asc), keep m, then the smallest HKS distance with the
// lower index winning ties.
PointMap brute_force_map(const SpectralBasis& a, const SpectralBasis& b, const Eigen::VectorXd& c,
                         const HksField& fa, const HksField& fb, Index m, const std::optional<VertexMask>& roi)
{
    PointMap out;
    out.m = m;
    out.target.assign(static_cast<std::size_t>(a.eigenvectors.rows()), kNoTarget);
    out.deviation.assign(out.target.size(), 0.0);
    for (Index x = 0; x < a.eigenvectors.rows(); ++x) {
        if (roi && !(*roi)[static_cast<std::size_t>(x)]) continue;
        std::vector<std::pair<double, Index>> scored;
        for (Index y = 0; y < b.eigenvectors.rows(); ++y) {
            double s = 0.0;
            for (Index j = 0; j < c.size(); ++j) s += b.eigenvectors(y, j) * c[j] * a.eigenvectors(x, j);
            scored.emplace_back(-s, y);
        }
        std::sort(scored.begin(), scored.end());
        Index best = -1;
        double best_d = 1e300;
        for (Index k = 0; k < m; ++k) {
            const Index y = scored[static_cast<std::size_t>(k)].second;
            const double d = (fa.values.row(x) - fb.values.row(y)).norm();
            if (d < best_d || (d == best_d && y < best)) {
                best_d = d;
                best = y;
            }
        }
        out.target[static_cast<std::size_t>(x)] = best;
        out.deviation[static_cast<std::size_t>(x)] = best_d;
    }
    return out;
}

TriangleMesh block(Index n)
{
    PartSpec spec;
    spec.primitive = Primitive::ToothedBlock;
    spec.resolution = n;
    return generate(spec).mesh;
}

PipelineConfig small_config()
{
    PipelineConfig c;
    c.p = 60;
    c.K = 40;
    c.degree = FemDegree::P1;
    return c;
}

} // namespace

TEST_SUITE("funcmap")
{
    TEST_CASE("coefficients of a basis column and of an orthogonal column")
    {
        const Eigen::MatrixXd q = orthonormalize(random_matrix(40, 7, 2));
        const auto basis = fake_basis(q.leftCols(6));
        Eigen::MatrixXd cols(40, 2);
        cols.col(0) = q.col(2);
        cols.col(1) = q.col(6);
        const auto c = coefficients(basis, fake_hks(cols));
        CHECK(c.scale == doctest::Approx(1.0 / std::sqrt(40.0)));
        Eigen::VectorXd e2 = Eigen::VectorXd::Zero(6);
        e2[2] = 1.0 / std::sqrt(40.0);
        CHECK((c.entries.col(0) - e2).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(c.entries.col(1).cwiseAbs().maxCoeff() < 1e-14);
        CHECK_THROWS_AS(coefficients(basis, fake_hks(Eigen::MatrixXd::Ones(39, 2))), DimensionMismatch);
    }

    TEST_CASE("coefficients are equivariant under a consistent vertex permutation")
    {
        const Eigen::MatrixXd phi = random_matrix(30, 5, 7);
        const Eigen::MatrixXd f = random_matrix(30, 8, 7, 1);
        std::vector<int> order(30);
        std::iota(order.begin(), order.end(), 0);
        std::reverse(order.begin(), order.end());
        std::rotate(order.begin(), order.begin() + 11, order.end());
        Eigen::PermutationMatrix<Eigen::Dynamic> perm(30);
        for (int i = 0; i < 30; ++i) perm.indices()[i] = order[static_cast<std::size_t>(i)];
        const auto a = coefficients(fake_basis(phi), fake_hks(f));
        const auto b = coefficients(fake_basis(perm * phi), fake_hks(perm * f));
        CHECK((a.entries - b.entries).cwiseAbs().maxCoeff() < 1e-13);
    }

    TEST_CASE("estimate_c: hand-evaluated single row")
    {
        CoefficientMatrix a, b;
        a.entries = Eigen::MatrixXd(1, 2);
        b.entries = Eigen::MatrixXd(1, 2);
        a.entries << 1, 2;
        b.entries << 2, 4;
        CHECK(estimate_c(a, b, 0.0).diag[0] == doctest::Approx(2.0).epsilon(1e-15));
        const auto ridge = estimate_c(a, b, 0.8);
        CHECK(ridge.unconstrained[0] == doctest::Approx(2.0));
        CHECK(ridge.diag[0] == doctest::Approx(1.2).epsilon(1e-15));
    }

    TEST_CASE("estimate_c: self map and the q -> 1 limit")
    {
        CoefficientMatrix a;
        a.entries = random_matrix(12, 9, 3);
        const auto self = estimate_c(a, a, 0.0);
        CHECK((self.diag.array() - 1.0).abs().maxCoeff() < 1e-15);

        CoefficientMatrix b;
        b.entries = random_matrix(12, 9, 4);
        const auto near_one = estimate_c(a, b, 0.999);
        for (Index j = 0; j < 12; ++j) {
            const double sign = near_one.unconstrained[j] > 0 ? 1.0 : -1.0;
            // |c0| of random rows stays well below 2 here.
            CHECK(std::abs(near_one.unconstrained[j]) < 2.0);
            CHECK(std::abs(near_one.diag[j] - sign) < 0.002);
        }
    }

    TEST_CASE("estimate_c: q = 0 is the least-squares solution of each row")
    {
        for (std::uint64_t seed = 10; seed < 20; ++seed) {
            CoefficientMatrix a, b;
            a.entries = random_matrix(15, 11, seed);
            b.entries = random_matrix(15, 11, seed, 9) + 0.5 * a.entries;
            const auto c = estimate_c(a, b, 0.0);
            for (Index j = 0; j < 15; ++j) {
                const Eigen::VectorXd col = a.entries.row(j).transpose();
                const Eigen::VectorXd rhs = b.entries.row(j).transpose();
                const double ls = col.colPivHouseholderQr().solve(rhs)[0];
                CHECK(std::abs(c.diag[j] - ls) <= 1e-12 * std::max(1.0, std::abs(ls)));
            }
        }
    }

    TEST_CASE("ridge: convex combination, no sign flip, monotone in q")
    {
        CoefficientMatrix a, b;
        a.entries = random_matrix(40, 6, 31);
        b.entries = random_matrix(40, 6, 32) * 3.0;
        const auto c0 = estimate_c(a, b, 0.0).diag;
        Eigen::VectorXd previous = c0;
        for (double q : {0.2, 0.5, 0.8, 0.999}) {
            const auto c = estimate_c(a, b, q);
            for (Index j = 0; j < 40; ++j) {
                const double sign = c0[j] > 0 ? 1.0 : -1.0;
                CHECK(c.diag[j] == doctest::Approx((1 - q) * c0[j] + q * sign).epsilon(1e-14));
                CHECK(c.diag[j] * c0[j] > 0.0);
                CHECK(std::min(c0[j], sign) <= c.diag[j] + 1e-15);
                CHECK(c.diag[j] <= std::max(c0[j], sign) + 1e-15);
                // Moving toward sign(c0) as q grows.
                CHECK(std::abs(c.diag[j] - sign) <= std::abs(previous[j] - sign) + 1e-15);
            }
            previous = c.diag;
        }
    }

    TEST_CASE("estimate_c: degenerate rows, bad q and shape mismatch")
    {
        CoefficientMatrix a, b;
        a.entries = random_matrix(4, 3, 1);
        a.entries.row(2).setZero();
        b.entries = random_matrix(4, 3, 2);
        std::vector<std::string> warnings;
        const auto prev = set_warning_sink([&](const std::string& m) { warnings.push_back(m); });
        const auto c = estimate_c(a, b, 0.8);
        set_warning_sink(prev);
        CHECK(c.diag[2] == 0.0);
        CHECK(c.degenerate_rows == std::vector<Index>{2});
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].rfind("DegenerateRow", 0) == 0);

        CHECK_THROWS_AS(estimate_c(a, b, 1.0), InvalidArgument);
        CHECK_THROWS_AS(estimate_c(a, b, -0.1), InvalidArgument);
        b.entries = random_matrix(4, 2, 2);
        CHECK_THROWS_AS(estimate_c(a, b, 0.5), DimensionMismatch);
    }

    TEST_CASE("functional_map rejects a p mismatch and unions symmetry clusters")
    {
        auto ba = fake_basis(random_matrix(20, 5, 1));
        auto bb = fake_basis(random_matrix(20, 5, 2));
        ba.symmetry_clusters = {1};
        bb.symmetry_clusters = {3, 1};
        CoefficientMatrix a, b;
        a.entries = random_matrix(5, 4, 3);
        b.entries = random_matrix(5, 4, 4);
        const auto prev = set_warning_sink([](const std::string&) {});
        const auto c = functional_map(ba, a, bb, b, 0.8);
        set_warning_sink(prev);
        CHECK(c.symmetry_warnings == std::vector<Index>{1, 3});
        CHECK_THROWS_AS(functional_map(ba, a, fake_basis(random_matrix(20, 6, 2)), b, 0.8), DimensionMismatch);
    }

    TEST_CASE("point map matches a brute-force oracle, ties included")
    {
        for (std::uint64_t seed = 1; seed <= 6; ++seed) {
            const Index na = 70, nb = 90, p = 6, k = 4;
            const auto a = fake_basis(integer_matrix(na, p, seed, 2));
            Eigen::MatrixXd vb = integer_matrix(nb, p, seed + 100, 2);
            // Duplicate rows in B give exactly tied scores.
            for (Index y = 0; y < 20; ++y) vb.row(nb - 1 - y) = vb.row(y);
            const auto b = fake_basis(vb);
            const auto fa = fake_hks(integer_matrix(na, k, seed + 200, 3));
            const auto fb = fake_hks(integer_matrix(nb, k, seed + 300, 3));
            FunctionalMapC c;
            c.diag = integer_matrix(p, 1, seed + 400, 2).col(0);
            for (Index m : {1, 3, 7}) {
                const auto got = recover_point_map(a, b, c, fa, fb, m);
                const auto want = brute_force_map(a, b, c.diag, fa, fb, m, std::nullopt);
                CHECK(got.target == want.target);
                CHECK(got.deviation == want.deviation);
                CHECK(got.m == m);
                CHECK(!got.roi_applied);
            }
        }
    }

    TEST_CASE("point map: ROI semantics and thread independence")
    {
        const Index na = 300, nb = 260, p = 12, k = 5;
        const auto a = fake_basis(random_matrix(na, p, 1));
        const auto b = fake_basis(random_matrix(nb, p, 2));
        const auto fa = fake_hks(random_matrix(na, k, 3));
        const auto fb = fake_hks(random_matrix(nb, k, 4));
        FunctionalMapC c;
        c.diag = random_matrix(p, 1, 5).col(0);

        const auto full = recover_point_map(a, b, c, fa, fb, 5);
        const auto all = recover_point_map(a, b, c, fa, fb, 5, VertexMask(na, true));
        CHECK(all.target == full.target);
        CHECK(all.deviation == full.deviation);
        CHECK(all.roi_applied);

        std::vector<bool> keep(na);
        for (Index x = 0; x < na; ++x) keep[static_cast<std::size_t>(x)] = x % 10 == 3;
        const auto part = recover_point_map(a, b, c, fa, fb, 5, VertexMask(keep));
        for (Index x = 0; x < na; ++x) {
            const auto i = static_cast<std::size_t>(x);
            if (keep[i]) {
                CHECK(part.target[i] == full.target[i]);
                CHECK(part.deviation[i] == full.deviation[i]);
            } else {
                CHECK(part.target[i] == kNoTarget);
                CHECK(part.deviation[i] == 0.0);
            }
        }

        const auto threaded = recover_point_map(a, b, c, fa, fb, 5, std::nullopt, 3);
        CHECK(threaded.target == full.target);
        CHECK(threaded.deviation == full.deviation);

        // Stored deviations are recomputable from the HKS fields.
        for (Index x = 0; x < na; ++x) {
            const auto i = static_cast<std::size_t>(x);
            CHECK(full.deviation[i] == doctest::Approx((fa.values.row(x) - fb.values.row(full.target[i])).norm()));
        }
    }

    TEST_CASE("point map argument checks")
    {
        const auto a = fake_basis(random_matrix(10, 4, 1));
        const auto b = fake_basis(random_matrix(12, 4, 2));
        const auto fa = fake_hks(random_matrix(10, 3, 3));
        const auto fb = fake_hks(random_matrix(12, 3, 4));
        FunctionalMapC c;
        c.diag = Eigen::VectorXd::Ones(4);
        CHECK_THROWS_AS(recover_point_map(a, b, c, fa, fb, 0), InvalidArgument);
        CHECK_THROWS_AS(recover_point_map(a, b, c, fa, fb, 13), InvalidArgument);
        CHECK_THROWS_AS(recover_point_map(a, fake_basis(random_matrix(12, 5, 2)), c, fa, fb, 2), DimensionMismatch);
        CHECK_THROWS_AS(recover_point_map(a, b, c, fa, fake_hks(random_matrix(12, 2, 4)), 2), DimensionMismatch);
        CHECK_THROWS_AS(recover_point_map(a, b, c, fa, fb, 2, VertexMask(9, true)), DimensionMismatch);
    }

    TEST_CASE("accuracy: identity, constant offset and direct summation")
    {
        std::vector<Vec3> coords;
        for (int i = 0; i < 20; ++i) coords.emplace_back(i * 0.5, 0, 0);
        PointMap map;
        std::vector<Index> gt(19);
        std::iota(gt.begin(), gt.end(), 0);
        map.target = gt;
        map.deviation.assign(19, 0.0);
        CHECK(accuracy(map, gt, coords) == 0.0);

        for (auto& t : map.target) ++t;
        CHECK(accuracy(map, gt, coords) == doctest::Approx(0.5));

        const CounterRng rng(11);
        double sum = 0.0;
        for (std::size_t x = 0; x < 19; ++x) {
            map.target[x] = static_cast<Index>(rng.uniform(x) * 20);
            sum += std::abs(map.target[x] - gt[x]) * 0.5;
        }
        CHECK(accuracy(map, gt, coords) == doctest::Approx(sum / 19.0).epsilon(1e-14));

        // Sentinels are skipped and the mean is over mapped vertices.
        map.target.assign(19, kNoTarget);
        map.target[4] = 6;
        CHECK(accuracy(map, gt, coords) == doctest::Approx(1.0));
        CHECK_THROWS_AS(accuracy(map, std::vector<Index>(3, 0), coords), DimensionMismatch);
    }

    TEST_CASE("self match on a real part")
    {
        const auto mesh = block(900);
        auto config = small_config();
        config.q = 0.0;
        const auto nominal = prepare_nominal(mesh, config);
        const auto r = match_to_nominal(mesh, nominal, config);
        for (Index j = 0; j < config.p; ++j) {
            const bool clustered = std::count(r.cmap.symmetry_warnings.begin(), r.cmap.symmetry_warnings.end(), j) ||
                                   std::count(r.cmap.symmetry_warnings.begin(), r.cmap.symmetry_warnings.end(), j - 1);
            if (!clustered) CHECK(std::abs(r.cmap.diag[j] - 1.0) <= 1e-9);
        }
        Index identity = 0;
        for (Index x = 0; x < mesh.num_vertices(); ++x) identity += r.map.target[static_cast<std::size_t>(x)] == x;
        CHECK(identity >= 0.99 * static_cast<double>(mesh.num_vertices()));
        auto dev = r.map.deviation;
        std::nth_element(dev.begin(), dev.begin() + static_cast<std::ptrdiff_t>(dev.size() / 2), dev.end());
        CHECK(dev[dev.size() / 2] < 1e-8);
    }

    TEST_CASE("rotated copy maps back to the identity permutation")
    {
        const auto mesh = block(900);
        const auto config = small_config();
        const Eigen::Matrix3d rot = Eigen::AngleAxisd(1.9, Vec3(1, 1, 0).normalized()).toRotationMatrix();
        const auto moved = transformed(mesh, rot, Vec3(3, 2, 1));
        const auto r = match_to_nominal(moved, prepare_nominal(mesh, config), config);
        Index identity = 0;
        for (Index x = 0; x < mesh.num_vertices(); ++x) identity += r.map.target[static_cast<std::size_t>(x)] == x;
        CHECK(identity >= 0.95 * static_cast<double>(mesh.num_vertices()));
    }

    TEST_CASE("pipeline rejects a nominal prepared with another config")
    {
        const auto mesh = block(500);
        auto config = small_config();
        const auto nominal = prepare_nominal(mesh, config);
        config.p = 50;
        CHECK_THROWS_AS(match_to_nominal(mesh, nominal, config), ConfigMismatch);
        config = small_config();
        config.degree = FemDegree::P3;
        CHECK_THROWS_AS(match_to_nominal(mesh, nominal, config), ConfigMismatch);
    }
}
