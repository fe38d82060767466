#include "cli.hpp"

#include "fmloc/bench.hpp"
#include "fmloc/config.hpp"
#include "fmloc/defect_stats.hpp"
#include "fmloc/error.hpp"
#include "fmloc/log.hpp"
#include "fmloc/pipeline.hpp"
#include "fmloc/report.hpp"
#include "fmloc/roi.hpp"
#include "fmloc/spectral.hpp"
#include "fmloc/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>

namespace fmloc::cli {

namespace fs = std::filesystem;

namespace {

// Values given on the command line; unset ones fall back to the config file
// and then to the built-in defaults.
struct ConfigFlags {
    std::string config_path;
    std::optional<Index> p, K, m, roi_iters;
    std::optional<double> q, alpha, epsilon;
    std::optional<std::string> degree, hks_scaling;
    int threads = 1;
    std::string out_dir = ".";

    void add_to(CLI::App& cmd)
    {
        cmd.add_option("--config", config_path, "JSON config file (flat PipelineConfig keys)");
        cmd.add_option("--p", p, "number of eigenpairs");
        cmd.add_option("--K", K, "number of HKS times");
        cmd.add_option("--m", m, "candidates per source vertex");
        cmd.add_option("--q", q, "ridge weight in [0, 1)");
        cmd.add_option("--alpha", alpha, "significance level");
        cmd.add_option("--epsilon", epsilon, "heat decay level defining the time grid");
        cmd.add_option("--degree", degree, "FEM degree")->check(CLI::IsMember({"p1", "p3"}));
        cmd.add_option("--roi-iters", roi_iters, "recursive ROI iterations (0 = off)");
        cmd.add_option("--hks-scaling", hks_scaling, "HKS scaling")
            ->check(CLI::IsMember({"manifold-integral", "exclude-zero-modes"}));
        cmd.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        cmd.add_option("--out", out_dir, "output directory");
    }

    PipelineConfig resolve() const
    {
        PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        if (p) c.p = *p;
        if (K) c.K = *K;
        if (m) c.m = *m;
        if (q) c.q = *q;
        if (alpha) c.alpha = *alpha;
        if (epsilon) c.epsilon = *epsilon;
        if (degree) c.degree = fem_degree_from_string(*degree);
        if (roi_iters) c.roi_iters = *roi_iters;
        if (hks_scaling) c.hks_scaling = hks_scaling_from_string(*hks_scaling);
        c.validate();
        return c;
    }

    fs::path out_path(const std::string& name) const
    {
        fs::create_directories(out_dir);
        return fs::path(out_dir) / name;
    }
};

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

bool is_mesh_file(const fs::path& path)
{
    static const std::set<std::string> exts = {".off", ".obj", ".ply", ".OFF", ".OBJ", ".PLY"};
    return fs::is_regular_file(path) && exts.count(path.extension().string()) > 0;
}

int cmd_spectrum(const std::string& mesh_path, const ConfigFlags& flags, std::ostream& out)
{
    const auto config = flags.resolve();
    const auto mesh = load_mesh(mesh_path);
    const auto basis = spectral_basis(mesh, config.degree, config.p);
    const auto stem = fs::path(mesh_path).stem().string();
    const auto hash = content_hash(mesh);
    save_basis_cache(basis, hash, flags.out_path(stem + ".basis"));

    nlohmann::json listing = {
        {"schemaVersion", kSchemaVersion},
        {"config", to_json(config)},
        {"meshHash", hash_hex(hash)},
        {"numVertices", mesh.num_vertices()},
        {"eigenvalues", std::vector<double>(basis.eigenvalues.data(), basis.eigenvalues.data() + basis.size())},
        {"symmetryClusters", basis.symmetry_clusters},
    };
    write_json(listing, flags.out_path(stem + ".spectrum.json"));

    out << "# " << mesh_path << ": n = " << mesh.num_vertices() << ", degree " << to_string(config.degree) << '\n';
    out << "i,lambda\n";
    for (Index i = 0; i < basis.size(); ++i) out << i << ',' << fmt("%.10g", basis.eigenvalues[i]) << '\n';
    return kOk;
}

int cmd_localize(const std::string& suspect_path,
                 const std::string& nominal_path,
                 const std::string& model_path,
                 const std::string& roi_path,
                 const ConfigFlags& flags,
                 std::ostream& out)
{
    const auto config = flags.resolve();
    const auto suspect = load_mesh(suspect_path);
    const auto nominal_mesh = load_mesh(nominal_path);
    std::optional<ThresholdModel> model;
    if (!model_path.empty()) {
        model = load_threshold_model(model_path);
        if (!(model->config == config)) {
            throw ConfigMismatch("model '" + model_path + "' was calibrated with config " +
                                 config_hash(model->config) + ", this run uses " + config_hash(config));
        }
    }
    std::optional<VertexMask> roi;
    if (!roi_path.empty()) roi = load_roi_mask(roi_path, suspect.num_vertices());

    const auto nominal = prepare_nominal(nominal_mesh, config);
    const auto report = diagnose(suspect, nominal, model, roi, config, flags.threads);
    write_json(diagnosis_to_json(report, input_hashes(suspect, nominal_mesh)), flags.out_path("diagnosis.json"));
    save_diagnosis_mesh(suspect, report.deviation,
                        model ? std::optional<VertexMask>(report.significant) : std::nullopt,
                        flags.out_path("diagnosis.ply"));

    const auto top = std::max_element(report.deviation.begin(), report.deviation.end());
    out << "max deviation " << fmt("%.6g", *top) << " at vertex " << (top - report.deviation.begin()) << '\n';
    if (model) {
        out << "threshold " << fmt("%.6g", model->threshold) << ", " << report.significant.count()
            << " significant vertices\n";
    }
    return kOk;
}

int cmd_calibrate(const std::string& nominal_path, const std::string& phase1_dir, const std::string& roi_path,
                  const ConfigFlags& flags, std::ostream& out)
{
    const auto config = flags.resolve();
    if (!fs::is_directory(phase1_dir)) throw IOError("'" + phase1_dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(phase1_dir)) {
        if (is_mesh_file(entry.path())) files.push_back(entry.path());
    }
    if (files.empty()) throw InvalidArgument("no mesh files in '" + phase1_dir + "'");
    std::sort(files.begin(), files.end());

    const auto nominal_mesh = load_mesh(nominal_path);
    std::vector<TriangleMesh> parts;
    parts.reserve(files.size());
    for (const auto& f : files) parts.push_back(load_mesh(f));
    std::optional<VertexMask> roi;
    if (!roi_path.empty()) roi = load_roi_mask(roi_path, parts.front().num_vertices());

    const auto nominal = prepare_nominal(nominal_mesh, config);
    const auto maxima = phase1_maxima(parts, nominal, config, roi, flags.threads);
    auto model = calibrate(maxima, config.alpha);
    model.config = config;
    model.roi = roi ? RoiSource::Mask : config.roi_iters > 0 ? RoiSource::Recursive : RoiSource::None;
    write_json(threshold_model_to_json(model, hash_hex(content_hash(nominal_mesh))),
               flags.out_path("threshold_model.json"));

    out << "m0 = " << model.m0 << ", alpha = " << model.alpha << ", rank " << threshold_rank(model.m0, model.alpha)
        << ", threshold = " << fmt("%.10g", model.threshold) << '\n';
    return kOk;
}

int cmd_roi(const std::string& suspect_path, const std::string& nominal_path, const ConfigFlags& flags,
            std::ostream& out)
{
    const auto config = flags.resolve();
    const auto suspect = load_mesh(suspect_path);
    const auto nominal = load_mesh(nominal_path);
    const Index iters = config.roi_iters > 0 ? config.roi_iters : 2;
    const auto result = recursive_roi(suspect, nominal, iters, config.degree);
    write_json(roi_result_to_json(result, config, input_hashes(suspect, nominal)), flags.out_path("roi.json"));

    std::vector<double> indicator(result.mask.size());
    for (std::size_t i = 0; i < indicator.size(); ++i) indicator[i] = result.mask[i] ? 1.0 : 0.0;
    save_diagnosis_mesh(suspect, indicator, result.mask, flags.out_path("roi.ply"));

    out << "ROI: " << result.mask.count() << " of " << result.mask.size() << " vertices after " << result.iterations
        << " iterations" << (result.stopped_early ? " (stopped early)" : "") << '\n';
    return kOk;
}

int cmd_bench(const std::vector<Index>& sizes, Index reps, const std::string& stage, const std::string& primitive,
              const ConfigFlags& flags, std::ostream& out)
{
    const auto config = flags.resolve();
    BenchOptions options;
    options.sizes = sizes;
    options.reps = reps;
    options.stage = bench_stage_from_string(stage);
    options.primitive = primitive_from_string(primitive);
    options.threads = flags.threads;
    const auto rows = run_bench(options, config);
    write_bench_csv(rows, out);
    std::ofstream csv(flags.out_path("bench.csv"));
    if (!csv) throw IOError("cannot write bench.csv");
    write_bench_csv(rows, csv);
    return kOk;
}

int cmd_synth(const std::string& spec_path, const std::string& name, Index phase1, std::uint64_t base_seed,
              const ConfigFlags& flags, std::ostream& out)
{
    const auto spec = part_spec_from_json(read_json(spec_path));
    const std::string stem = name.empty() ? fs::path(spec_path).stem().string() : name;
    if (phase1 > 0) {
        const auto dir = flags.out_path(stem + "_phase1");
        fs::create_directories(dir);
        const auto batch = phase1_batch(spec, phase1, base_seed);
        char file[32];
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::snprintf(file, sizeof(file), "part_%04zu.off", i);
            save_off(batch[i], dir / file);
        }
        out << "wrote " << batch.size() << " Phase-I parts to " << dir.string() << '\n';
        return kOk;
    }
    const auto part = generate(spec);
    save_off(part.mesh, flags.out_path(stem + ".off"));
    write_json(ground_truth_to_json(part.truth, spec, part.mesh), flags.out_path(stem + ".truth.json"));
    out << "wrote " << stem << ".off (" << part.mesh.num_vertices() << " vertices, " << part.truth.defect_mask.count()
        << " defect vertices)\n";
    return kOk;
}

} // namespace

int exit_code_for(const std::string& kind)
{
    if (kind == "ConfigMismatch") return kConfigMismatch;
    if (kind == "DegenerateElement" || kind == "ConvergenceFailure" || kind == "RankDeficient" ||
        kind == "NoNonzeroEigenvalue") {
        return kNumericalError;
    }
    return kInputError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Registration-free defect localization on triangle meshes"};
    app.require_subcommand(1);

    ConfigFlags flags;
    std::string mesh_path, suspect_path, nominal_path, model_path, roi_path, phase1_dir, spec_path, name;
    std::vector<Index> sizes;
    Index reps = 3, phase1 = 0;
    std::uint64_t base_seed = 1;
    std::string stage = "total", primitive = "sphere";

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalue table and basis cache of one mesh");
    spectrum->add_option("mesh", mesh_path, "mesh file")->required();
    flags.add_to(*spectrum);

    auto* localize = app.add_subcommand("localize", "deviation field of a suspect part against the nominal");
    localize->add_option("suspect", suspect_path, "suspect mesh")->required();
    localize->add_option("nominal", nominal_path, "nominal mesh")->required();
    localize->add_option("--model", model_path, "threshold model JSON from calibrate");
    localize->add_option("--roi", roi_path, "ROI index-list JSON on the suspect mesh");
    flags.add_to(*localize);

    auto* calib = app.add_subcommand("calibrate", "single-threshold model from Phase-I parts");
    calib->add_option("nominal", nominal_path, "nominal mesh")->required();
    calib->add_option("phase1", phase1_dir, "directory of Phase-I meshes")->required();
    calib->add_option("--roi", roi_path, "ROI index-list JSON applied to every part");
    flags.add_to(*calib);

    auto* roi = app.add_subcommand("roi", "recursive nodal-domain region of interest");
    roi->add_option("suspect", suspect_path, "suspect mesh")->required();
    roi->add_option("nominal", nominal_path, "nominal mesh")->required();
    flags.add_to(*roi);

    auto* bench = app.add_subcommand("bench", "pipeline timing on generated mesh pairs");
    bench->add_option("--sizes", sizes, "vertex counts")->required()->delimiter(',');
    bench->add_option("--reps", reps, "repetitions per size");
    bench->add_option("--stage", stage, "timed stage")->check(CLI::IsMember({"total", "recovery"}));
    bench->add_option("--primitive", primitive, "generated shape");
    flags.add_to(*bench);

    auto* synth = app.add_subcommand("synth", "generate a synthetic part from a JSON spec");
    synth->add_option("spec", spec_path, "PartSpec JSON")->required();
    synth->add_option("--name", name, "output file stem (default: spec file stem)");
    synth->add_option("--phase1", phase1, "emit this many defect-free replicates instead");
    synth->add_option("--base-seed", base_seed, "first replicate seed");
    flags.add_to(*synth);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    const auto previous = set_warning_sink([&err](const std::string& msg) { err << "warning: " << msg << '\n'; });
    int code = kOk;
    try {
        if (*spectrum) code = cmd_spectrum(mesh_path, flags, out);
        else if (*localize) code = cmd_localize(suspect_path, nominal_path, model_path, roi_path, flags, out);
        else if (*calib) code = cmd_calibrate(nominal_path, phase1_dir, roi_path, flags, out);
        else if (*roi) code = cmd_roi(suspect_path, nominal_path, flags, out);
        else if (*bench) code = cmd_bench(sizes, reps, stage, primitive, flags, out);
        else if (*synth) code = cmd_synth(spec_path, name, phase1, base_seed, flags, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        code = exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error: IOError: " << e.what() << '\n';
        code = kInputError;
    }
    set_warning_sink(previous);
    return code;
}

} // namespace fmloc::cli
