#include "fmloc/bench.hpp"

#include "fmloc/error.hpp"
#include "fmloc/log.hpp"
#include "fmloc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace fmloc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

std::string to_string(BenchStage s) { return s == BenchStage::Total ? "total" : "recovery"; }

BenchStage bench_stage_from_string(const std::string& s)
{
    if (s == "total") return BenchStage::Total;
    if (s == "recovery") return BenchStage::Recovery;
    throw InvalidArgument("unknown bench stage '" + s + "' (expected total or recovery)");
}

std::vector<BenchRow> run_bench(const BenchOptions& options, const PipelineConfig& config)
{
    if (options.sizes.empty()) throw InvalidArgument("bench needs at least one size");
    if (options.reps < 1) throw InvalidArgument("reps must be at least 1");
    config.validate();

    // Symmetric primitives repeat the same cluster warnings on every rep.
    Index suppressed = 0;
    const auto previous = set_warning_sink([&suppressed](const std::string&) { ++suppressed; });
    std::vector<BenchRow> rows;
    try {
        for (Index size : options.sizes) {
            PartSpec spec;
            spec.primitive = options.primitive;
            spec.resolution = size;
            const auto clean = generate(spec).mesh;

            BenchRow row;
            row.size = size;
            row.vertices = clean.num_vertices();
            std::vector<double> times;
            for (Index rep = 0; rep < options.reps; ++rep) {
                spec.noise_sigma = options.noise_sigma;
                spec.seed = static_cast<std::uint64_t>(rep) + 1;
                const auto suspect = generate(spec).mesh;

                const auto start = Clock::now();
                const auto nominal = prepare_nominal(clean, config);
                const auto r = match_to_nominal(suspect, nominal, config, std::nullopt, options.threads);
                if (options.stage == BenchStage::Total) {
                    times.push_back(seconds_since(start));
                } else {
                    const auto t0 = Clock::now();
                    const auto map = recover_point_map(r.basis, nominal.basis, r.cmap, r.hks, nominal.hks, config.m,
                                                       std::nullopt, options.threads);
                    times.push_back(seconds_since(t0));
                }
            }
            double sum = 0.0;
            for (double t : times) sum += t;
            row.mean = sum / static_cast<double>(times.size());
            double ss = 0.0;
            for (double t : times) ss += (t - row.mean) * (t - row.mean);
            row.stddev = times.size() > 1 ? std::sqrt(ss / static_cast<double>(times.size() - 1)) : 0.0;
            rows.push_back(row);
        }
    } catch (...) {
        set_warning_sink(previous);
        throw;
    }
    set_warning_sink(previous);
    if (suppressed > 0) warn("bench: " + std::to_string(suppressed) + " pipeline warnings suppressed");
    return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out)
{
    out << "size,vertices,mean_seconds,stddev_seconds\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%lld,%lld,%.6f,%.6f\n", static_cast<long long>(r.size),
                      static_cast<long long>(r.vertices), r.mean, r.stddev);
        out << buf;
    }
}

} // namespace fmloc
