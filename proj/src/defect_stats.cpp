#include "fmloc/defect_stats.hpp"

#include "fmloc/error.hpp"
#include "fmloc/log.hpp"
#include "fmloc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace fmloc {

std::string to_string(RoiSource s)
{
    switch (s) {
    case RoiSource::None: return "none";
    case RoiSource::Mask: return "mask";
    case RoiSource::Recursive: return "recursive";
    }
    return "none";
}

Index threshold_rank(Index m0, double alpha)
{
    // The relative nudge keeps products such as 0.29 * 100 from rounding
    // below the integer they represent.
    return static_cast<Index>(std::floor(alpha * static_cast<double>(m0) * (1.0 + 1e-12))) + 1;
}

std::optional<VertexMask> resolve_roi(const TriangleMesh& part,
                                      const NominalModel& nominal,
                                      const PipelineConfig& config,
                                      const std::optional<VertexMask>& mask)
{
    if (mask) {
        if (static_cast<Index>(mask->size()) != part.num_vertices()) {
            throw DimensionMismatch("ROI mask has " + std::to_string(mask->size()) + " entries for a mesh with " +
                                    std::to_string(part.num_vertices()) + " vertices");
        }
        return mask;
    }
    if (config.roi_iters > 0) return recursive_roi(part, nominal.mesh, config.roi_iters, config.degree).mask;
    return std::nullopt;
}

std::vector<double> phase1_maxima(const std::vector<TriangleMesh>& parts,
                                  const NominalModel& nominal,
                                  const PipelineConfig& config,
                                  const std::optional<VertexMask>& roi,
                                  int threads)
{
    if (parts.empty()) throw InvalidArgument("Phase-I set is empty");
    // Parts run concurrently; with a single part the threads go to recovery.
    const int part_threads = parts.size() > 1 ? threads : 1;
    const int inner_threads = parts.size() > 1 ? 1 : threads;
    std::vector<double> maxima(parts.size(), 0.0);
    parallel_for(static_cast<Index>(parts.size()), part_threads, [&](Index i) {
        const auto& part = parts[static_cast<std::size_t>(i)];
        try {
            const auto part_roi = resolve_roi(part, nominal, config, roi);
            const auto r = match_to_nominal(part, nominal, config, part_roi, inner_threads);
            maxima[static_cast<std::size_t>(i)] = *std::max_element(r.map.deviation.begin(), r.map.deviation.end());
        } catch (const Error& e) {
            throw Error(e.kind(), "Phase-I part " + std::to_string(i) + ": " + e.detail());
        }
    });
    return maxima;
}

std::vector<double> phase1_maxima(const std::vector<TriangleMesh>& parts,
                                  const TriangleMesh& nominal,
                                  const PipelineConfig& config,
                                  int threads)
{
    return phase1_maxima(parts, prepare_nominal(nominal, config), config, std::nullopt, threads);
}

ThresholdModel calibrate(const std::vector<double>& maxima, double alpha)
{
    if (maxima.empty()) throw InvalidArgument("cannot calibrate on an empty set of maxima");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    for (double v : maxima) {
        if (!std::isfinite(v)) throw InvalidArgument("Phase-I maxima must be finite");
    }
    ThresholdModel model;
    model.alpha = alpha;
    model.m0 = static_cast<Index>(maxima.size());
    model.maxima = maxima;
    std::sort(model.maxima.begin(), model.maxima.end(), std::greater<>());
    const Index rank = threshold_rank(model.m0, alpha);
    if (model.m0 < static_cast<Index>(std::ceil(1.0 / alpha - 1e-9))) {
        warn("InsufficientPhase1: " + std::to_string(model.m0) + " Phase-I parts at alpha = " + std::to_string(alpha) +
             "; the threshold is the largest maximum and the test is vacuous");
    }
    model.threshold = model.maxima[static_cast<std::size_t>(std::min(rank, model.m0) - 1)];
    return model;
}

VertexMask flag_vertices(const std::vector<double>& deviation, double threshold, const std::optional<VertexMask>& roi)
{
    if (roi && roi->size() != deviation.size()) throw DimensionMismatch("ROI mask length differs from deviation field");
    VertexMask out(deviation.size(), false);
    for (std::size_t i = 0; i < deviation.size(); ++i) {
        out.flags[i] = deviation[i] > threshold && (!roi || (*roi)[i]);
    }
    return out;
}

DiagnosisReport diagnose(const TriangleMesh& suspect,
                         const NominalModel& nominal,
                         const std::optional<ThresholdModel>& model,
                         const std::optional<VertexMask>& roi,
                         const PipelineConfig& config,
                         int threads)
{
    if (model && !(model->config == config)) {
        throw ConfigMismatch("threshold model was calibrated with config " + config_hash(model->config) +
                             ", diagnosis uses " + config_hash(config));
    }
    DiagnosisReport report;
    report.config = config;
    report.model = model;
    report.roi = resolve_roi(suspect, nominal, config, roi);
    report.roi_source = roi ? RoiSource::Mask : (report.roi ? RoiSource::Recursive : RoiSource::None);
    if (model && model->roi != report.roi_source) {
        warn("ROI source '" + to_string(report.roi_source) + "' differs from calibration ('" + to_string(model->roi) +
             "'); the threshold may not share the null distribution of this test");
    }

    auto r = match_to_nominal(suspect, nominal, config, report.roi, threads);
    report.deviation = std::move(r.map.deviation);
    report.target = std::move(r.map.target);
    report.cmap = std::move(r.cmap);
    if (model) {
        report.threshold = model->threshold;
        report.significant = flag_vertices(report.deviation, model->threshold, report.roi);
    } else {
        report.significant = VertexMask(report.deviation.size(), false);
    }
    return report;
}

} // namespace fmloc
