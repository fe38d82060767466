#include "fmloc/report.hpp"

#include "fmloc/error.hpp"

#include <fstream>
#include <set>

namespace fmloc {

using nlohmann::json;

namespace {

json mask_indices(const VertexMask& mask)
{
    return json(mask.indices());
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& what)
{
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ParseError("unknown " + what + " key '" + key + "'");
    }
}

Vec3 vec3_from_json(const json& j)
{
    if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-element array");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

} // namespace

InputHashes input_hashes(const TriangleMesh& suspect, const TriangleMesh& nominal)
{
    return {hash_hex(content_hash(suspect)), hash_hex(content_hash(nominal))};
}

json point_map_to_json(const PointMap& map, const PipelineConfig& config)
{
    json records = json::array();
    for (Index x = 0; x < map.size(); ++x) {
        const auto i = static_cast<std::size_t>(x);
        records.push_back({{"sourceIndex", x},
                           {"targetIndex", map.target[i] == kNoTarget ? json(nullptr) : json(map.target[i])},
                           {"deviation", map.deviation[i]}});
    }
    return json{
        {"schemaVersion", kSchemaVersion},
        {"header",
         {{"p", config.p}, {"K", config.K}, {"m", map.m}, {"q", config.q}, {"degree", to_string(config.degree)}}},
        {"roiApplied", map.roi_applied},
        {"records", std::move(records)},
    };
}

json threshold_model_to_json(const ThresholdModel& model, const std::string& nominal_hash)
{
    return json{
        {"schemaVersion", kSchemaVersion},
        {"alpha", model.alpha},
        {"m0", model.m0},
        {"threshold", model.threshold},
        {"rank", threshold_rank(model.m0, model.alpha)},
        {"maxima", model.maxima},
        {"roi", to_string(model.roi)},
        {"config", to_json(model.config)},
        {"configHash", config_hash(model.config)},
        {"nominalHash", nominal_hash},
    };
}

ThresholdModel threshold_model_from_json(const json& j)
{
    try {
        if (j.at("schemaVersion").get<int>() != kSchemaVersion) {
            throw ParseError("unsupported threshold model schemaVersion");
        }
        ThresholdModel m;
        m.alpha = j.at("alpha").get<double>();
        m.m0 = j.at("m0").get<Index>();
        m.threshold = j.at("threshold").get<double>();
        m.maxima = j.at("maxima").get<std::vector<double>>();
        m.config = config_from_json(j.at("config"));
        const auto roi = j.at("roi").get<std::string>();
        m.roi = roi == "mask" ? RoiSource::Mask : roi == "recursive" ? RoiSource::Recursive : RoiSource::None;
        if (config_hash(m.config) != j.at("configHash").get<std::string>()) {
            throw ParseError("threshold model config does not match its stored hash");
        }
        if (static_cast<Index>(m.maxima.size()) != m.m0) throw ParseError("threshold model m0 differs from maxima count");
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed threshold model: ") + e.what());
    }
}

ThresholdModel load_threshold_model(const std::filesystem::path& path)
{
    return threshold_model_from_json(read_json(path));
}

json diagnosis_to_json(const DiagnosisReport& report, const InputHashes& hashes)
{
    json meta = {
        {"config", to_json(report.config)},
        {"configHash", config_hash(report.config)},
        {"suspectHash", hashes.suspect},
        {"nominalHash", hashes.nominal},
        {"roi", to_string(report.roi_source)},
        {"degenerateRows", report.cmap.degenerate_rows},
        {"symmetryWarnings", report.cmap.symmetry_warnings},
    };
    if (report.model) {
        meta["m0"] = report.model->m0;
        meta["alpha"] = report.model->alpha;
        meta["calibrationRoi"] = to_string(report.model->roi);
    }
    json target = json::array();
    for (Index t : report.target) target.push_back(t == kNoTarget ? json(nullptr) : json(t));

    double max_dev = 0.0;
    Index argmax = -1;
    for (std::size_t i = 0; i < report.deviation.size(); ++i) {
        if (report.deviation[i] > max_dev) {
            max_dev = report.deviation[i];
            argmax = static_cast<Index>(i);
        }
    }
    return json{
        {"schemaVersion", kSchemaVersion},
        {"meta", std::move(meta)},
        {"threshold", report.threshold ? json(*report.threshold) : json(nullptr)},
        {"maxDeviation", max_dev},
        {"maxDeviationIndex", argmax},
        {"significant", mask_indices(report.significant)},
        {"roiIndices", report.roi ? mask_indices(*report.roi) : json(nullptr)},
        {"deviation", report.deviation},
        {"target", std::move(target)},
        {"c", std::vector<double>(report.cmap.diag.data(), report.cmap.diag.data() + report.cmap.diag.size())},
        {"c0", std::vector<double>(report.cmap.unconstrained.data(),
                                   report.cmap.unconstrained.data() + report.cmap.unconstrained.size())},
    };
}

json roi_result_to_json(const RoiResult& result, const PipelineConfig& config, const InputHashes& hashes)
{
    json scores = json::array();
    for (const auto& s : result.scores) {
        scores.push_back({{"plus", s.plus},
                          {"minus", s.minus},
                          {"swapped", s.swapped},
                          {"tie", s.tie},
                          {"side", s.took_plus ? "plus" : "minus"}});
    }
    return json{
        {"schemaVersion", kSchemaVersion},
        {"config", to_json(config)},
        {"configHash", config_hash(config)},
        {"suspectHash", hashes.suspect},
        {"nominalHash", hashes.nominal},
        {"iterations", result.iterations},
        {"stoppedEarly", result.stopped_early},
        {"scores", std::move(scores)},
        {"indices", mask_indices(result.mask)},
        {"nominalIndices", mask_indices(result.nominal_mask)},
    };
}

VertexMask load_roi_mask(const std::filesystem::path& path, Index num_vertices)
{
    const json j = read_json(path);
    const json& list = j.is_object() ? j.at("indices") : j;
    if (!list.is_array()) throw ParseError("ROI file '" + path.string() + "' holds no index list");
    std::vector<Index> idx;
    for (const auto& v : list) {
        if (!v.is_number_integer()) throw ParseError("ROI indices must be integers");
        const auto i = v.get<Index>();
        if (i < 0 || i >= num_vertices) {
            throw ValidationError("ROI index " + std::to_string(i) + " outside [0, " + std::to_string(num_vertices) + ")");
        }
        idx.push_back(i);
    }
    auto mask = VertexMask::from_indices(static_cast<std::size_t>(num_vertices), idx);
    if (mask.count() == 0) throw EmptySubmesh("ROI file '" + path.string() + "' selects no vertex");
    return mask;
}

PartSpec part_spec_from_json(const json& j)
{
    if (!j.is_object()) throw ParseError("part spec must be a JSON object");
    reject_unknown(j, {"primitive", "resolution", "defect", "noiseSigma", "seed"}, "part spec");
    PartSpec s;
    try {
        if (j.contains("primitive")) s.primitive = primitive_from_string(j.at("primitive").get<std::string>());
        if (j.contains("resolution")) s.resolution = j.at("resolution").get<Index>();
        if (j.contains("noiseSigma")) s.noise_sigma = j.at("noiseSigma").get<double>();
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("defect") && !j.at("defect").is_null()) {
            const json& d = j.at("defect");
            reject_unknown(d, {"kind", "center", "radius", "depth"}, "defect");
            DefectSpec ds;
            if (d.contains("kind")) ds.kind = defect_kind_from_string(d.at("kind").get<std::string>());
            if (d.contains("center")) ds.center = vec3_from_json(d.at("center"));
            if (d.contains("radius")) ds.radius = d.at("radius").get<double>();
            if (d.contains("depth")) ds.depth = d.at("depth").get<double>();
            s.defect = ds;
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad part spec value: ") + e.what());
    }
    return s;
}

json to_json(const PartSpec& s)
{
    json j = {
        {"primitive", to_string(s.primitive)},
        {"resolution", s.resolution},
        {"noiseSigma", s.noise_sigma},
        {"seed", s.seed},
        {"defect", nullptr},
    };
    if (s.defect) {
        const auto& d = *s.defect;
        j["defect"] = {{"kind", to_string(d.kind)},
                       {"center", {d.center.x(), d.center.y(), d.center.z()}},
                       {"radius", d.radius},
                       {"depth", d.depth}};
    }
    return j;
}

json ground_truth_to_json(const GroundTruth& truth, const PartSpec& spec, const TriangleMesh& mesh)
{
    const Vec3& c = truth.defect_center;
    return json{
        {"schemaVersion", kSchemaVersion},
        {"spec", to_json(spec)},
        {"meshHash", hash_hex(content_hash(mesh))},
        {"numVertices", mesh.num_vertices()},
        {"defectCenter", {c.x(), c.y(), c.z()}},
        {"defectRadius", truth.defect_radius},
        {"defectMask", mask_indices(truth.defect_mask)},
        {"correspondence", truth.correspondence},
    };
}

json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IOError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("'" + path.string() + "': " + e.what());
    }
}

void write_json(const json& j, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IOError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IOError("write failed for '" + path.string() + "'");
}

} // namespace fmloc
