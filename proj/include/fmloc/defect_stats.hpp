#pragma once

#include "fmloc/config.hpp"
#include "fmloc/mesh.hpp"
#include "fmloc/pipeline.hpp"
#include "fmloc/roi.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fmloc {

/// Where the ROI of a run came from.
enum class RoiSource { None, Mask, Recursive };

std::string to_string(RoiSource s);

struct ThresholdModel {
    std::vector<double> maxima;  // nonincreasing
    double alpha = 0.05;
    double threshold = 0.0;
    Index m0 = 0;
    PipelineConfig config;
    /// Phase-I maxima were taken over ROI-filtered deviations.
    RoiSource roi = RoiSource::None;
};

/// floor(alpha * m0) + 1, the 1-based rank of the threshold among the
/// maxima sorted in decreasing order.
Index threshold_rank(Index m0, double alpha);

/// ROI applied to one part: an explicit mask, the recursive search when
/// config.roi_iters > 0, or nothing.
std::optional<VertexMask> resolve_roi(const TriangleMesh& part,
                                      const NominalModel& nominal,
                                      const PipelineConfig& config,
                                      const std::optional<VertexMask>& mask);

/// Maximum deviation of each part against the nominal, in input order. With
/// an ROI in force the maxima are taken over the ROI only, matching what
/// diagnose() compares against the threshold.
std::vector<double> phase1_maxima(const std::vector<TriangleMesh>& parts,
                                  const NominalModel& nominal,
                                  const PipelineConfig& config,
                                  const std::optional<VertexMask>& roi = std::nullopt,
                                  int threads = 1);

std::vector<double> phase1_maxima(const std::vector<TriangleMesh>& parts,
                                  const TriangleMesh& nominal,
                                  const PipelineConfig& config,
                                  int threads = 1);

/// Threshold = the (floor(alpha m0) + 1)-th largest maximum. Warns
/// InsufficientPhase1 when m0 < ceil(1 / alpha).
ThresholdModel calibrate(const std::vector<double>& maxima, double alpha);

/// Vertices inside `roi` (all when absent) whose deviation strictly exceeds
/// the threshold.
VertexMask flag_vertices(const std::vector<double>& deviation,
                         double threshold,
                         const std::optional<VertexMask>& roi = std::nullopt);

struct DiagnosisReport {
    std::vector<double> deviation;  // ROI-filtered when an ROI applies
    std::vector<Index> target;
    std::optional<VertexMask> roi;
    RoiSource roi_source = RoiSource::None;
    /// Present only when a threshold model was supplied.
    std::optional<double> threshold;
    VertexMask significant;
    PipelineConfig config;
    std::optional<ThresholdModel> model;
    FunctionalMapC cmap;
};

/// Deviation field of `suspect` against the nominal, flagged against
/// `model` when given. The model's configuration must equal `config`
/// (ConfigMismatch otherwise).
DiagnosisReport diagnose(const TriangleMesh& suspect,
                         const NominalModel& nominal,
                         const std::optional<ThresholdModel>& model,
                         const std::optional<VertexMask>& roi,
                         const PipelineConfig& config,
                         int threads = 1);

} // namespace fmloc
