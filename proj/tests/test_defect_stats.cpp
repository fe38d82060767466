#include "helpers.hpp"

#include "fmloc/defect_stats.hpp"
#include "fmloc/error.hpp"
#include "fmloc/log.hpp"
#include "fmloc/rng.hpp"
#include "fmloc/roi.hpp"
#include "fmloc/synth.hpp"

#include <doctest.h>

#include <algorithm>

using namespace fmloc;
using namespace fmloc::test;

namespace {

std::vector<double> shuffled_ramp(Index m0, std::uint64_t seed)
{
    std::vector<double> v(static_cast<std::size_t>(m0));
    for (Index i = 0; i < m0; ++i) v[static_cast<std::size_t>(i)] = 0.1 * static_cast<double>(i + 1);
    const CounterRng rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[static_cast<std::size_t>(rng.uniform(i) * static_cast<double>(i))]);
    }
    return v;
}

PipelineConfig small_config()
{
    PipelineConfig c;
    c.p = 40;
    c.K = 30;
    c.degree = FemDegree::P1;
    return c;
}

PartSpec block_spec(Index n)
{
    PartSpec spec;
    spec.primitive = Primitive::ToothedBlock;
    spec.resolution = n;
    return spec;
}

struct QuietWarnings {
    std::vector<std::string> seen;
    WarningSink previous;
    QuietWarnings() : previous(set_warning_sink([this](const std::string& m) { seen.push_back(m); })) {}
    ~QuietWarnings() { set_warning_sink(previous); }
    bool any_starting_with(const std::string& prefix) const
    {
        return std::any_of(seen.begin(), seen.end(), [&](const std::string& m) { return m.rfind(prefix, 0) == 0; });
    }
};

} // namespace

TEST_SUITE("defect-stats")
{
    TEST_CASE("threshold rank arithmetic")
    {
        CHECK(threshold_rank(100, 0.05) == 6);
        CHECK(threshold_rank(20, 0.05) == 2);
        CHECK(threshold_rank(50, 0.05) == 3);
        CHECK(threshold_rank(19, 0.05) == 1);
        // 0.29 * 100 evaluates to 28.999999999999996 in binary floating point.
        CHECK(threshold_rank(100, 0.29) == 30);
        CHECK(threshold_rank(7, 0.5) == 4);
    }

    TEST_CASE("calibrate picks the (floor(alpha m0) + 1)-th largest")
    {
        const auto m100 = calibrate(shuffled_ramp(100, 1), 0.05);
        CHECK(m100.threshold == doctest::Approx(0.1 * 95));  // 6th largest of 0.1 .. 10.0
        CHECK(m100.m0 == 100);
        CHECK(std::is_sorted(m100.maxima.begin(), m100.maxima.end(), std::greater<>()));

        const auto m20 = calibrate(shuffled_ramp(20, 2), 0.05);
        CHECK(m20.threshold == doctest::Approx(0.1 * 19));  // 2nd largest

        const auto flat = calibrate(std::vector<double>(30, 0.7), 0.05);
        CHECK(flat.threshold == 0.7);
    }

    TEST_CASE("too few Phase-I parts only warns")
    {
        QuietWarnings w;
        const auto model = calibrate(shuffled_ramp(10, 3), 0.05);
        CHECK(model.threshold == doctest::Approx(1.0));  // the maximum
        CHECK(w.any_starting_with("InsufficientPhase1"));

        QuietWarnings w2;
        calibrate(shuffled_ramp(20, 3), 0.05);
        CHECK(!w2.any_starting_with("InsufficientPhase1"));
    }

    TEST_CASE("calibrate argument checks")
    {
        CHECK_THROWS_AS(calibrate({}, 0.05), InvalidArgument);
        CHECK_THROWS_AS(calibrate({1.0, 2.0}, 0.0), InvalidArgument);
        CHECK_THROWS_AS(calibrate({1.0, std::nan("")}, 0.05), InvalidArgument);
    }

    TEST_CASE("threshold is nonincreasing in alpha")
    {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const CounterRng rng(seed);
            std::vector<double> maxima(73);
            for (std::size_t i = 0; i < maxima.size(); ++i) maxima[i] = rng.normal(i);
            double previous = 1e300;
            for (double alpha = 0.01; alpha < 0.99; alpha += 0.013) {
                QuietWarnings w;
                const double t = calibrate(maxima, alpha).threshold;
                CHECK(t <= previous);
                previous = t;
            }
        }
    }

    TEST_CASE("flagging is strict and respects the ROI")
    {
        std::vector<double> dev(10, 0.0);
        dev[6] = 2.0;
        CHECK(flag_vertices(dev, 1.0).indices() == std::vector<Index>{6});
        dev[3] = 1.0;  // equal to the threshold: not significant
        CHECK(flag_vertices(dev, 1.0).indices() == std::vector<Index>{6});
        CHECK(flag_vertices(dev, 1.0, VertexMask::from_indices(10, {3, 4})).count() == 0);
        CHECK_THROWS_AS(flag_vertices(dev, 1.0, VertexMask(9, true)), DimensionMismatch);
    }

    TEST_CASE("raising the threshold shrinks the flagged set")
    {
        const CounterRng rng(9);
        std::vector<double> dev(500);
        for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::abs(rng.normal(i));
        VertexMask previous(dev.size(), true);
        for (double t = 0.0; t < 4.0; t += 0.05) {
            const auto flags = flag_vertices(dev, t);
            for (std::size_t i = 0; i < dev.size(); ++i) CHECK((!flags[i] || previous[i]));
            previous = flags;
        }
    }

    TEST_CASE("ROI filter zeroes outside and is idempotent")
    {
        const std::vector<double> dev = {1, 2, 3, 4, 5};
        const auto roi = VertexMask::from_indices(5, {1, 3});
        const auto once = filter_roi(dev, roi);
        CHECK(once == std::vector<double>{0, 2, 0, 4, 0});
        CHECK(filter_roi(once, roi) == once);
        CHECK_THROWS_AS(filter_roi(dev, VertexMask(4, true)), DimensionMismatch);
    }

    TEST_CASE("Phase-I maxima: self match, determinism and ROI consistency")
    {
        QuietWarnings w;
        const auto config = small_config();
        auto spec = block_spec(600);
        const auto nominal_mesh = generate(spec).mesh;
        const auto nominal = prepare_nominal(nominal_mesh, config);

        CHECK(phase1_maxima({nominal_mesh}, nominal, config)[0] < 1e-8);

        spec.noise_sigma = 0.002;
        spec.seed = 5;
        const auto noisy = generate(spec).mesh;
        const auto maxima = phase1_maxima({noisy, noisy}, nominal, config);
        CHECK(maxima[0] == maxima[1]);
        CHECK(maxima[0] > 0.0);
        CHECK(phase1_maxima({noisy, noisy}, nominal, config, std::nullopt, 2) == maxima);

        // With a mask the maximum is taken over the masked vertices only.
        std::vector<bool> keep(static_cast<std::size_t>(noisy.num_vertices()));
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i % 3 == 0;
        const VertexMask roi(keep);
        const double masked = phase1_maxima({noisy}, nominal, config, roi)[0];
        const auto full = match_to_nominal(noisy, nominal, config);
        const auto filtered = filter_roi(full.map.deviation, roi);
        CHECK(masked == *std::max_element(filtered.begin(), filtered.end()));
    }

    TEST_CASE("Phase-I errors carry the part index and keep their kind")
    {
        QuietWarnings w;
        const auto config = small_config();
        const auto nominal_mesh = generate(block_spec(600)).mesh;
        const auto nominal = prepare_nominal(nominal_mesh, config);
        try {
            phase1_maxima({nominal_mesh, grid(3, 3)}, nominal, config);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == "InvalidArgument");
            CHECK(std::string(e.what()).find("Phase-I part 1") != std::string::npos);
        }
        CHECK_THROWS_AS(phase1_maxima({}, nominal, config), InvalidArgument);
    }

    TEST_CASE("diagnose: self match, flags and config mismatch")
    {
        QuietWarnings w;
        const auto config = small_config();
        const auto mesh = generate(block_spec(600)).mesh;
        const auto nominal = prepare_nominal(mesh, config);
        ThresholdModel model = calibrate(std::vector<double>(20, 0.05), 0.05);
        model.config = config;

        const auto self = diagnose(mesh, nominal, model, std::nullopt, config);
        CHECK(self.significant.count() == 0);
        CHECK(*std::max_element(self.deviation.begin(), self.deviation.end()) < 1e-8);
        CHECK(self.threshold == 0.05);
        CHECK(self.roi_source == RoiSource::None);

        const auto raw = diagnose(mesh, nominal, std::nullopt, std::nullopt, config);
        CHECK(!raw.threshold);
        CHECK(raw.significant.count() == 0);

        auto other = config;
        other.q = 0.5;
        CHECK_THROWS_AS(diagnose(mesh, nominal, model, std::nullopt, other), ConfigMismatch);

        auto roi = VertexMask(static_cast<std::size_t>(mesh.num_vertices()), false);
        roi.flags[0] = true;
        const auto masked = diagnose(mesh, nominal, model, roi, config);
        CHECK(masked.roi_source == RoiSource::Mask);
        CHECK(masked.target[1] == kNoTarget);
    }

    TEST_CASE("significance follows deviation > threshold inside the ROI")
    {
        QuietWarnings w;
        auto config = small_config();
        auto spec = block_spec(600);
        const auto nominal = prepare_nominal(generate(spec).mesh, config);
        spec.noise_sigma = 0.003;
        spec.seed = 2;
        const auto part = generate(spec).mesh;
        ThresholdModel model = calibrate({0.05, 0.06, 0.07}, 0.3);
        model.config = config;
        const auto r = diagnose(part, nominal, model, std::nullopt, config);
        for (std::size_t i = 0; i < r.deviation.size(); ++i) CHECK(r.significant[i] == (r.deviation[i] > model.threshold));
    }
}
