#pragma once

#include "fmloc/fem.hpp"
#include "fmloc/hks.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace fmloc {

struct PipelineConfig {
    Index p = 200;
    Index K = 100;
    Index m = 5;
    double q = 0.8;
    double epsilon = 1e-4;
    FemDegree degree = FemDegree::P3;
    double alpha = 0.05;
    Index roi_iters = 0;  // 0 disables automatic ROI discovery
    HksScaling hks_scaling = HksScaling::ManifoldIntegral;

    /// Throws InvalidArgument naming the first out-of-range field.
    void validate() const;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Flat keys: p, K, m, q, epsilon, degree ("p1"/"p3"), alpha, roiIters,
/// hksScaling ("manifold-integral"/"exclude-zero-modes").
nlohmann::json to_json(const PipelineConfig& config);

/// Keys absent from `j` keep the value already in `base`; unknown keys are
/// rejected.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Hex FNV-1a digest of the canonical JSON form.
std::string config_hash(const PipelineConfig& config);

} // namespace fmloc
