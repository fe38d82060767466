#pragma once

#include "fmloc/config.hpp"
#include "fmloc/synth.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fmloc {

enum class BenchStage { Total, Recovery };

std::string to_string(BenchStage s);
BenchStage bench_stage_from_string(const std::string& s);

struct BenchRow {
    Index size = 0;        // requested vertex count
    Index vertices = 0;    // vertex count actually generated
    double mean = 0.0;     // seconds
    double stddev = 0.0;   // sample standard deviation, 0 for one rep
};

struct BenchOptions {
    std::vector<Index> sizes;
    Index reps = 3;
    BenchStage stage = BenchStage::Total;
    Primitive primitive = Primitive::Sphere;
    double noise_sigma = 0.002;
    int threads = 1;
};

/// Times matching a noisy replicate against the clean mesh at each size.
/// Total covers both spectral bases, HKS, the functional map and point-map
/// recovery; Recovery covers the point-map step alone.
std::vector<BenchRow> run_bench(const BenchOptions& options, const PipelineConfig& config);

/// Header "size,vertices,mean_seconds,stddev_seconds".
void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

} // namespace fmloc
