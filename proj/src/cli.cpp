#include "qpat/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qpat/calculus.hpp"
#include "qpat/diagnostics.hpp"
#include "qpat/errors.hpp"
#include "qpat/field_io.hpp"
#include "qpat/forward.hpp"
#include "qpat/inverse.hpp"
#include "qpat/report_json.hpp"

namespace qpat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

struct Options {
    std::string manifest;
    std::string out;
    int jobs = 0;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> grid_n;
    bool quiet = false;
    std::string g1;
    std::string g2;
};

std::string read_text(const fs::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(std::string("cannot read ") + what + " '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text, const fs::path& path) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

std::string fmt17(double v) {
    if (!std::isfinite(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Context {
public:
    Context(const Options& opt, std::ostream& err) : opt_(opt), err_(err) {}

    void load_manifest() {
        if (opt_.manifest.empty()) throw InputError("--manifest is required");
        manifest_path_ = opt_.manifest;
        manifest_bytes_ = read_text(manifest_path_, "manifest");
        manifest_ = parse_json(manifest_bytes_, manifest_path_);
        if (!manifest_.is_object()) throw InputError("manifest must be a JSON object");
        if (!manifest_.contains("schema_version") || manifest_["schema_version"] != 1)
            throw InputError("manifest schema_version must be 1");
        if (!manifest_.contains("grid") || !manifest_["grid"].is_object())
            throw InputError("manifest needs a grid section {dim, n}");
        try {
            const int dim = manifest_["grid"].at("dim").get<int>();
            const int n = opt_.grid_n ? *opt_.grid_n : manifest_["grid"].at("n").get<int>();
            grid_ = build_grid(dim, n);
        } catch (const json::exception& e) {
            throw InputError(std::string("malformed grid section: ") + e.what());
        }
        hash_ = hex64(fnv1a64(manifest_bytes_));
        resolve_out();
    }

    // check-g without a manifest: provenance hashes the trace files instead.
    void set_input_hash(std::string_view bytes) { hash_ = hex64(fnv1a64(bytes)); }

    const json& manifest() const { return manifest_; }
    bool has(const char* key) const { return manifest_.contains(key) && !manifest_[key].is_null(); }
    const Grid& grid() const { return *grid_; }
    const fs::path& out() const { return out_; }
    const Options& opt() const { return opt_; }

    fs::path relative_to_manifest(const std::string& p) const {
        const fs::path path(p);
        return path.is_absolute() ? path : manifest_path_.parent_path() / path;
    }

    json provenance() const {
        json p{{"tool", "qpat"}, {"version", kToolVersion}, {"manifest_hash", "fnv1a64:" + hash_}};
        json overrides = json::object();
        if (opt_.grid_n) overrides["grid_n"] = *opt_.grid_n;
        if (opt_.seed_override) overrides["seed"] = *opt_.seed_override;
        if (!overrides.empty()) p["overrides"] = overrides;
        return p;
    }

    json grid_json() const { return json{{"dim", grid().dim()}, {"n", grid().n()}}; }

    void progress(const std::string& msg) const {
        if (!opt_.quiet) err_ << "qpat: " << msg << "\n";
    }

    fs::path ensure_dir(const fs::path& rel) const {
        const fs::path dir = out_ / rel;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw InputError("output directory '" + dir.string() + "' is not writable: " + ec.message());
        return dir;
    }

    SolverConfig forward_solver() const {
        SolverConfig cfg = has("solver") ? solver_config_from_json(manifest_["solver"]) : SolverConfig{};
        cfg.validate();
        return cfg;
    }

    CoefficientSet phantom_from_manifest() const {
        if (!has("phantom")) throw InputError("manifest has no phantom section");
        return make_phantom(grid(), phantom_params_from_json(manifest_["phantom"]));
    }

    // Illumination descriptor: inline object or a path to a JSON file. A descriptor
    // with {"traces": {"g1": stem, "g2": stem}} supplies measured traces directly.
    struct Illumination {
        json descriptor;
        std::optional<IlluminationParams> params;
        BoundaryTrace g1, g2;
        fs::path base_dir;
    };

    Illumination illumination() const {
        if (!has("illumination")) throw InputError("manifest has no illumination section");
        Illumination il;
        const json& entry = manifest_["illumination"];
        il.base_dir = manifest_path_.parent_path();
        if (entry.is_string()) {
            const fs::path file = relative_to_manifest(entry.get<std::string>());
            if (!fs::exists(file)) throw InputError("illumination file '" + file.string() + "' does not exist");
            il.descriptor = parse_json(read_text(file, "illumination file"), file);
            il.base_dir = file.parent_path();
        } else if (entry.is_object()) {
            il.descriptor = entry;
        } else {
            throw InputError("illumination must be an object or a file path");
        }
        if (il.descriptor.contains("traces")) {
            const json& t = il.descriptor["traces"];
            if (!t.contains("g1") || !t.contains("g2")) throw InputError("illumination traces need g1 and g2 stems");
            il.g1 = read_trace_checked(il.base_dir / t["g1"].get<std::string>(), "g1");
            il.g2 = read_trace_checked(il.base_dir / t["g2"].get<std::string>(), "g2");
        } else {
            il.params = illumination_params_from_json(il.descriptor);
            auto [g1, g2] = illumination_traces(grid(), *il.params);
            il.g1 = std::move(g1);
            il.g2 = std::move(g2);
        }
        return il;
    }

    ScalarField read_field_checked(const fs::path& stem, const char* what) const {
        if (!field_exists(stem)) throw InputError(std::string(what) + " field '" + stem.string() + "' is missing");
        ScalarField f = read_field(stem);
        if (!(f.grid == grid()))
            throw InputError(std::string(what) + " field '" + stem.string() + "' does not match the manifest grid");
        return f;
    }

    BoundaryTrace read_trace_checked(const fs::path& stem, const char* what) const {
        if (!field_exists(stem)) throw InputError(std::string(what) + " trace '" + stem.string() + "' is missing");
        BoundaryTrace t = read_trace(stem);
        if (grid_ && !(t.grid == grid()))
            throw InputError(std::string(what) + " trace '" + stem.string() + "' does not match the manifest grid");
        return t;
    }

private:
    void resolve_out() {
        if (!opt_.out.empty())
            out_ = opt_.out;
        else if (manifest_.contains("output") && manifest_["output"].is_string())
            out_ = relative_to_manifest(manifest_["output"].get<std::string>());
        else
            out_ = manifest_path_.parent_path() / "out";
    }

    const Options& opt_;
    std::ostream& err_;
    fs::path manifest_path_;
    std::string manifest_bytes_;
    json manifest_;
    std::optional<Grid> grid_;
    fs::path out_;
    std::string hash_;
};

// Pair built for the pipeline: compliant kinds must pass, the others are accepted as is.
IlluminationPair pipeline_pair(const Context::Illumination& il) {
    if (il.params) {
        const auto k = il.params->kind;
        if (k == IlluminationKind::unimodal_cosine || k == IlluminationKind::affine_ratio)
            return make_illuminations(il.g1.grid, *il.params);
    }
    return analyze_illuminations(il.g1, il.g2, true);
}

std::string dataset_name(std::optional<std::uint64_t> seed) {
    return seed ? "seed_" + std::to_string(*seed) : "clean";
}

// ---------------------------------------------------------------- phantom

int cmd_phantom(Context& ctx, std::ostream& out) {
    ctx.load_manifest();
    if (!ctx.has("phantom")) throw InputError("manifest has no phantom section");
    const PhantomParams params = phantom_params_from_json(ctx.manifest()["phantom"]);
    ctx.progress("building " + to_string(params.kind) + " phantom on n = " + std::to_string(ctx.grid().n()));
    const CoefficientSet set = make_phantom(ctx.grid(), params);

    const fs::path dir = ctx.ensure_dir("phantom");
    write_field(dir / "D", set.D);
    write_field(dir / "sigma", set.sigma);
    json report{{"schema_version", 1},
                {"provenance", ctx.provenance()},
                {"grid", ctx.grid_json()},
                {"descriptor", phantom_params_json(params, ctx.grid().dim())},
                {"verified_bounds", bounds_json(set)},
                {"fields", {{"D", "phantom/D"}, {"sigma", "phantom/sigma"}}}};
    write_json(dir / "phantom.json", report);
    out << (dir / "phantom.json").string() << "\n";
    return exit_ok;
}

// --------------------------------------------------------------- simulate

ScalarField solve_stage(const CoefficientSet& set, const BoundaryTrace& g, const SolverConfig& cfg, const char* stage) {
    try {
        return solve_photon_density(set, g, cfg);
    } catch (Error& e) {
        e.set_stage(stage);
        throw;
    }
}

int cmd_simulate(Context& ctx, std::ostream& out) {
    ctx.load_manifest();
    const fs::path phantom_dir = ctx.out() / "phantom";
    const ScalarField D = ctx.read_field_checked(phantom_dir / "D", "phantom D (run 'qpat phantom' first)");
    const ScalarField sigma = ctx.read_field_checked(phantom_dir / "sigma", "phantom sigma");
    const CoefficientSet set = make_coefficient_set(D, sigma);
    const auto il = ctx.illumination();
    const IlluminationPair pair = pipeline_pair(il);
    const SolverConfig cfg = ctx.forward_solver();

    ctx.progress("solving forward problems");
    const ScalarField u1 = solve_stage(set, pair.g1, cfg, "forward_u1");
    const ScalarField u2 = solve_stage(set, pair.g2, cfg, "forward_u2");
    const ScalarField H1 = absorbed_energy(set.sigma, u1);
    const ScalarField H2 = absorbed_energy(set.sigma, u2);

    const fs::path illum_dir = ctx.ensure_dir("illumination");
    write_trace(illum_dir / "g1", pair.g1);
    write_trace(illum_dir / "g2", pair.g2);
    json illum_report{{"schema_version", 1},
                      {"provenance", ctx.provenance()},
                      {"grid", ctx.grid_json()},
                      {"descriptor", il.params ? illumination_params_json(*il.params, ctx.grid().dim()) : il.descriptor},
                      {"verified", illumination_summary(pair)},
                      {"traces", {{"g1", "illumination/g1"}, {"g2", "illumination/g2"}}}};
    write_json(illum_dir / "illumination.json", illum_report);

    const fs::path data_dir = ctx.ensure_dir("data");
    write_field(data_dir / "u1", u1);
    write_field(data_dir / "u2", u2);
    write_field(data_dir / "H1", H1);
    write_field(data_dir / "H2", H2);
    write_trace(data_dir / "D_boundary", restrict_to_boundary(set.D));

    double target_eps = 0.0;
    std::vector<std::uint64_t> seeds;
    if (ctx.has("noise")) {
        const json& noise = ctx.manifest()["noise"];
        try {
            target_eps = noise.value("target_eps", 0.0);
            if (noise.contains("seeds")) seeds = noise["seeds"].get<std::vector<std::uint64_t>>();
        } catch (const json::exception& e) {
            throw InputError(std::string("malformed noise section: ") + e.what());
        }
        if (!(target_eps >= 0.0)) throw InputError("noise.target_eps must be nonnegative");
    }
    if (ctx.opt().seed_override) seeds = {*ctx.opt().seed_override};

    json noisy = json::array();
    const MeasurementSet clean{H1, H2, 0.0, 0};
    if (target_eps > 0.0) {
        for (std::uint64_t seed : seeds) {
            ctx.progress("adding noise, seed " + std::to_string(seed));
            const MeasurementSet m = add_measurement_noise(clean, target_eps, seed);
            const std::string rel = "data/noisy/" + dataset_name(seed);
            const fs::path dir = ctx.ensure_dir(rel);
            write_field(dir / "H1", m.H1);
            write_field(dir / "H2", m.H2);
            ScalarField d1 = m.H1, d2 = m.H2;
            for (std::size_t p = 0; p < d1.size(); ++p) {
                d1[p] -= H1[p];
                d2[p] -= H2[p];
            }
            noisy.push_back({{"seed", seed},
                             {"target_eps", target_eps},
                             {"realized_eps", m.noise_level},
                             {"realized_eps_H1", interior_l2_norm(d1)},
                             {"realized_eps_H2", interior_l2_norm(d2)},
                             {"H1", rel + "/H1"},
                             {"H2", rel + "/H2"}});
        }
    }

    json manifest{{"schema_version", 1},
                  {"provenance", ctx.provenance()},
                  {"grid", ctx.grid_json()},
                  {"solver", cfg},
                  {"clean",
                   {{"seed", nullptr}, {"target_eps", 0.0}, {"realized_eps", 0.0}, {"H1", "data/H1"}, {"H2", "data/H2"}}},
                  {"noisy", noisy},
                  {"fields", {{"u1", "data/u1"}, {"u2", "data/u2"}}},
                  {"illumination", {{"g1", "illumination/g1"}, {"g2", "illumination/g2"}}},
                  {"D_boundary", "data/D_boundary"},
                  {"truth", {{"D", "phantom/D"}, {"sigma", "phantom/sigma"}}}};
    write_json(ctx.out() / "measurements.json", manifest);
    out << (ctx.out() / "measurements.json").string() << "\n";
    return exit_ok;
}

// ------------------------------------------------------------ reconstruct

int cmd_reconstruct(Context& ctx, std::ostream& out) {
    ctx.load_manifest();
    const fs::path mpath = ctx.out() / "measurements.json";
    if (!fs::exists(mpath)) throw InputError("measurement manifest '" + mpath.string() + "' is missing");
    const json meas = parse_json(read_text(mpath, "measurement manifest"), mpath);

    const json recon_section = ctx.has("reconstruction") ? ctx.manifest()["reconstruction"] : json::object();
    std::optional<std::uint64_t> seed = ctx.opt().seed_override;
    if (!seed && recon_section.contains("seed") && !recon_section["seed"].is_null())
        seed = recon_section["seed"].get<std::uint64_t>();

    json dataset;
    try {
        if (!seed) {
            dataset = meas.at("clean");
        } else {
            for (const auto& entry : meas.at("noisy"))
                if (entry.at("seed").get<std::uint64_t>() == *seed) dataset = entry;
            if (dataset.is_null())
                throw InputError("no noisy measurement with seed " + std::to_string(*seed) + " in '" + mpath.string() + "'");
        }
        const fs::path root = ctx.out();
        MeasurementSet m;
        m.H1 = ctx.read_field_checked(root / dataset.at("H1").get<std::string>(), "H1");
        m.H2 = ctx.read_field_checked(root / dataset.at("H2").get<std::string>(), "H2");
        m.noise_level = dataset.value("realized_eps", 0.0);
        m.seed = seed.value_or(0);
        const BoundaryTrace g1 = ctx.read_trace_checked(root / meas.at("illumination").at("g1").get<std::string>(), "g1");
        const BoundaryTrace g2 = ctx.read_trace_checked(root / meas.at("illumination").at("g2").get<std::string>(), "g2");
        const BoundaryTrace D_bd = ctx.read_trace_checked(root / meas.at("D_boundary").get<std::string>(), "D boundary");
        const ReconstructionConfig cfg = reconstruction_config_from_json(recon_section);
        const IlluminationPair pair = analyze_illuminations(g1, g2, true);

        const std::string name = dataset_name(seed);
        const fs::path dir = ctx.ensure_dir(fs::path("reconstruction") / name);
        json result{{"schema_version", 1},
                    {"provenance", ctx.provenance()},
                    {"grid", ctx.grid_json()},
                    {"dataset", {{"name", name}, {"seed", seed ? json(*seed) : json(nullptr)},
                                 {"target_eps", dataset.value("target_eps", 0.0)},
                                 {"realized_eps", dataset.value("realized_eps", 0.0)}}},
                    {"config", cfg},
                    {"illumination", illumination_summary(pair)}};

        ctx.progress("reconstructing " + name);
        ReconstructionResult rec;
        try {
            rec = reconstruct(m, pair, D_bd, cfg);
        } catch (const Error& e) {
            result["status"] = "failed";
            result["error"] = {{"kind", to_string(e.kind())}, {"stage", e.stage()}, {"message", e.what()}};
            write_json(dir / "result.json", result);
            throw;
        }

        write_field(dir / "a_hat", rec.a_hat);
        write_field(dir / "u1_hat", rec.u1_hat);
        write_field(dir / "D_hat", rec.D_hat);
        write_field(dir / "sigma_hat", rec.sigma_hat);
        write_field(dir / "U", rec.U);
        result["status"] = "ok";
        result["diagnostics"] = rec.diagnostics;
        result["timings"] = {{"seconds_total", rec.diagnostics.seconds_total}};
        const std::string rel = "reconstruction/" + name + "/";
        result["outputs"] = {{"a_hat", rel + "a_hat"}, {"u1_hat", rel + "u1_hat"}, {"D_hat", rel + "D_hat"},
                             {"sigma_hat", rel + "sigma_hat"}, {"U", rel + "U"}};

        if (meas.contains("truth")) {
            const fs::path tD = root / meas["truth"].value("D", "");
            const fs::path tS = root / meas["truth"].value("sigma", "");
            if (field_exists(tD) && field_exists(tS)) {
                const ScalarField D = ctx.read_field_checked(tD, "true D");
                const ScalarField S = ctx.read_field_checked(tS, "true sigma");
                result["errors_vs_truth"] = {{"D_rel_l2", relative_l2_error(rec.D_hat, D)},
                                             {"sigma_rel_l2", relative_l2_error(rec.sigma_hat, S)}};
            }
        }
        write_json(dir / "result.json", result);
        out << (dir / "result.json").string() << "\n";
    } catch (const json::exception& e) {
        throw InputError("malformed measurement manifest: " + std::string(e.what()));
    }
    return exit_ok;
}

// ------------------------------------------------------------------ sweep

int cmd_sweep(Context& ctx, std::ostream& out) {
    ctx.load_manifest();
    if (!ctx.has("sweep")) throw InputError("manifest has no sweep section");
    const json& s = ctx.manifest()["sweep"];
    SweepConfig sweep;
    try {
        sweep.amplitudes = s.value("amplitudes", std::vector<double>{});
        sweep.seeds = s.value("seeds", std::vector<std::uint64_t>{});
        if (s.contains("bump")) {
            const json& b = s["bump"];
            if (b.contains("center"))
                for (std::size_t a = 0; a < b["center"].size() && a < 3; ++a) sweep.bump_center[a] = b["center"][a];
            sweep.bump_radius = b.value("radius", sweep.bump_radius);
        }
        sweep.jitter = s.value("jitter", sweep.jitter);
        sweep.reconstruct = s.value("reconstruct", false);
        sweep.jobs = s.value("jobs", 1);
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed sweep section: ") + e.what());
    }
    if (ctx.opt().seed_override) sweep.seeds = {*ctx.opt().seed_override};
    if (ctx.opt().jobs > 0) sweep.jobs = ctx.opt().jobs;
    if (sweep.amplitudes.empty()) throw InputError("sweep.amplitudes is empty");
    if (sweep.seeds.empty()) throw InputError("sweep.seeds is empty");
    if (ctx.has("reconstruction")) sweep.recon = reconstruction_config_from_json(ctx.manifest()["reconstruction"]);

    const CoefficientSet base = ctx.phantom_from_manifest();
    const IlluminationPair pair = pipeline_pair(ctx.illumination());
    const SolverConfig cfg = ctx.forward_solver();
    ctx.progress("sweeping " + std::to_string(sweep.amplitudes.size() * sweep.seeds.size()) + " points with " +
                 std::to_string(sweep.jobs) + " job(s)");
    const SweepResult res = run_stability_sweep(base, pair, sweep, cfg);

    std::ostringstream csv;
    csv << "t,seed,center_x,center_y,center_z,eps,eps_prime,gap,err_D,err_sigma,err,recon_err_D,recon_err_sigma,status\n";
    for (const auto& pt : res.points) {
        const bool ok = pt.failure.empty();
        csv << fmt17(pt.amplitude) << ',' << pt.seed << ',' << fmt17(pt.center[0]) << ',' << fmt17(pt.center[1]) << ','
            << (ctx.grid().dim() == 3 ? fmt17(pt.center[2]) : "") << ',';
        if (ok)
            csv << fmt17(pt.report.eps) << ',' << fmt17(pt.report.eps_prime) << ',' << fmt17(pt.report.gap()) << ','
                << fmt17(pt.report.err_D) << ',' << fmt17(pt.report.err_sigma) << ',' << fmt17(pt.report.err()) << ',';
        else
            csv << ",,,,,,";
        csv << (pt.recon_err_D ? fmt17(*pt.recon_err_D) : "") << ','
            << (pt.recon_err_sigma ? fmt17(*pt.recon_err_sigma) : "") << ',';
        std::string status = ok ? "ok" : "failed: " + pt.failure;
        for (char& c : status)
            if (c == ',' || c == '\n') c = ';';
        csv << status << "\n";
    }
    const fs::path dir = ctx.ensure_dir("sweep");
    write_file_atomic(dir / "sweep.csv", csv.str());

    const auto medians = sweep_medians(res);
    json med = json::array();
    for (const auto& m : medians)
        med.push_back({{"t", m.amplitude}, {"gap", m.gap}, {"err", m.err}, {"recon_err", number(m.recon_err)},
                       {"count", m.count}});
    json fit{{"schema_version", 1},
             {"provenance", ctx.provenance()},
             {"grid", ctx.grid_json()},
             {"fit", res.fit ? json(*res.fit) : json(nullptr)},
             {"fit_error", res.fit ? json(nullptr) : json(res.fit_error)},
             {"theta_in_unit_interval", res.fit ? json(res.fit->theta > 0.0 && res.fit->theta <= 1.0) : json(nullptr)},
             {"medians", med},
             {"median_error_monotone", medians_monotone(medians)},
             {"points", res.points.size()},
             {"failures", res.failures}};
    write_json(dir / "holder_fit.json", fit);
    if (!res.fit) ctx.progress("fit refused: " + res.fit_error);
    out << (dir / "sweep.csv").string() << "\n" << (dir / "holder_fit.json").string() << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------- check-g

int cmd_check_g(Context& ctx, std::ostream& out) {
    BoundaryTrace g1, g2;
    if (!ctx.opt().g1.empty() || !ctx.opt().g2.empty()) {
        if (ctx.opt().g1.empty() || ctx.opt().g2.empty()) throw InputError("--g1 and --g2 must be given together");
        g1 = ctx.read_trace_checked(ctx.opt().g1, "g1");
        g2 = ctx.read_trace_checked(ctx.opt().g2, "g2");
        std::string bytes;
        for (const auto& stem : {ctx.opt().g1, ctx.opt().g2})
            for (const char* ext : {".json", ".bin"}) bytes += read_text(stem + ext, "trace file");
        ctx.set_input_hash(bytes);
    } else {
        ctx.load_manifest();
        auto il = ctx.illumination();
        g1 = std::move(il.g1);
        g2 = std::move(il.g2);
    }
    const IlluminationPair pair = analyze_illuminations(std::move(g1), std::move(g2), true);
    const bool pass = pair.violations.empty() && pair.unimodality.pass;
    json report = illumination_summary(pair);
    report["pass"] = pass;
    report["provenance"] = ctx.provenance();
    out << report.dump(2) << "\n";
    return pass ? exit_ok : exit_check_failed;
}

int exit_code_for(const Error& e, const std::string& command) {
    switch (e.kind()) {
        case ErrorKind::degeneracy:
            return exit_degenerate;
        case ErrorKind::solver:
            return exit_solver;
        case ErrorKind::coefficient:
            return command == "reconstruct" ? exit_degenerate : exit_input;
        default:
            return exit_input;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"qpat: quantitative photoacoustic experiments"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;
    int grid_n = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--manifest", opt.manifest, "experiment manifest (JSON)");
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--seed-override", seed, "replace manifest seeds by this one");
        sub->add_option("--grid-n", grid_n, "override grid.n");
        sub->add_flag("--quiet", opt.quiet, "no progress output");
    };
    CLI::App* phantom = app.add_subcommand("phantom", "write D, sigma fields and the bounds report");
    CLI::App* simulate = app.add_subcommand("simulate", "solve the forward problems and write H1, H2 (+ noise)");
    CLI::App* recon = app.add_subcommand("reconstruct", "recover D and sigma from a measurement set");
    CLI::App* sweep = app.add_subcommand("sweep", "stability sweep and Holder fit");
    CLI::App* check = app.add_subcommand("check-g", "check an illumination pair");
    for (CLI::App* sub : {phantom, simulate, recon, sweep, check}) common(sub);
    sweep->add_option("--jobs", opt.jobs, "concurrent sweep points")->check(CLI::PositiveNumber);
    check->add_option("--g1", opt.g1, "g1 trace stem");
    check->add_option("--g2", opt.g2, "g2 trace stem");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "qpat: " << e.what() << "\n";
        return exit_input;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    if (chosen->count("--seed-override")) opt.seed_override = seed;
    if (chosen->count("--grid-n")) opt.grid_n = grid_n;

    Context ctx(opt, err);
    try {
        if (command == "phantom") return cmd_phantom(ctx, out);
        if (command == "simulate") return cmd_simulate(ctx, out);
        if (command == "reconstruct") return cmd_reconstruct(ctx, out);
        if (command == "sweep") return cmd_sweep(ctx, out);
        return cmd_check_g(ctx, out);
    } catch (const Error& e) {
        const json report{{"error", to_string(e.kind())}, {"stage", e.stage()}, {"message", e.what()}};
        err << "qpat " << command << ": " << report.dump() << "\n";
        return exit_code_for(e, command);
    } catch (const fs::filesystem_error& e) {
        err << "qpat " << command << ": " << e.what() << "\n";
        return exit_input;
    }
}

}  // namespace qpat::cli
