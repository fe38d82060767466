#pragma once

#include "fmloc/config.hpp"
#include "fmloc/defect_stats.hpp"
#include "fmloc/funcmap.hpp"
#include "fmloc/roi.hpp"
#include "fmloc/synth.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace fmloc {

inline constexpr int kSchemaVersion = 1;

/// Content hashes of the meshes an artifact was computed from.
struct InputHashes {
    std::string suspect;
    std::string nominal;
};

InputHashes input_hashes(const TriangleMesh& suspect, const TriangleMesh& nominal);

nlohmann::json point_map_to_json(const PointMap& map, const PipelineConfig& config);

/// Carries the full config as well as its hash so a loaded model can be
/// checked against the diagnosis config.
nlohmann::json threshold_model_to_json(const ThresholdModel& model, const std::string& nominal_hash);
ThresholdModel threshold_model_from_json(const nlohmann::json& j);
ThresholdModel load_threshold_model(const std::filesystem::path& path);

nlohmann::json diagnosis_to_json(const DiagnosisReport& report, const InputHashes& hashes);

nlohmann::json roi_result_to_json(const RoiResult& result, const PipelineConfig& config, const InputHashes& hashes);

/// Index-list ROI file: either a bare array or an object with "indices".
VertexMask load_roi_mask(const std::filesystem::path& path, Index num_vertices);

PartSpec part_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PartSpec& spec);
nlohmann::json ground_truth_to_json(const GroundTruth& truth, const PartSpec& spec, const TriangleMesh& mesh);

nlohmann::json read_json(const std::filesystem::path& path);
/// Two-space indented dump with a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

} // namespace fmloc
