#include "fmloc/config.hpp"

#include "fmloc/error.hpp"
#include "fmloc/mesh.hpp"

#include <fstream>
#include <set>

namespace fmloc {

void PipelineConfig::validate() const
{
    if (p < 2) throw InvalidArgument("p must be at least 2");
    if (K < 2) throw InvalidArgument("K must be at least 2");
    if (m < 1) throw InvalidArgument("m must be at least 1");
    if (!(q >= 0.0 && q < 1.0)) throw InvalidArgument("q must lie in [0, 1)");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    if (roi_iters < 0 || roi_iters > 3) throw InvalidArgument("roiIters must lie in [0, 3]");
}

nlohmann::json to_json(const PipelineConfig& c)
{
    return nlohmann::json{
        {"p", c.p},
        {"K", c.K},
        {"m", c.m},
        {"q", c.q},
        {"epsilon", c.epsilon},
        {"degree", to_string(c.degree)},
        {"alpha", c.alpha},
        {"roiIters", c.roi_iters},
        {"hksScaling", to_string(c.hks_scaling)},
    };
}

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig c)
{
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    static const std::set<std::string> known = {"p", "K", "m", "q", "epsilon", "degree", "alpha", "roiIters", "hksScaling"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ParseError("unknown config key '" + key + "'");
    }
    try {
        if (j.contains("p")) c.p = j.at("p").get<Index>();
        if (j.contains("K")) c.K = j.at("K").get<Index>();
        if (j.contains("m")) c.m = j.at("m").get<Index>();
        if (j.contains("q")) c.q = j.at("q").get<double>();
        if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
        if (j.contains("degree")) c.degree = fem_degree_from_string(j.at("degree").get<std::string>());
        if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
        if (j.contains("roiIters")) c.roi_iters = j.at("roiIters").get<Index>();
        if (j.contains("hksScaling")) c.hks_scaling = hks_scaling_from_string(j.at("hksScaling").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad config value: ") + e.what());
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base)
{
    std::ifstream in(path);
    if (!in) throw IOError("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config '" + path.string() + "': " + e.what());
    }
    return config_from_json(j, base);
}

std::string config_hash(const PipelineConfig& config)
{
    // nlohmann::json objects are key-sorted, so dump() is canonical.
    const std::string text = to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return hash_hex(h);
}

} // namespace fmloc
