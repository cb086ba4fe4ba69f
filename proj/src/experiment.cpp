#include "csmri/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "csmri/baselines.hpp"
#include "csmri/diagnostics.hpp"
#include "csmri/export.hpp"
#include "csmri/random.hpp"
#include "csmri/sampling.hpp"
#include "csmri/vdamp.hpp"

namespace csmri {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Typed field access that reports the dotted path of the offending field.
template <class T>
T field(const json& obj, const std::string& key, const std::string& path, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + path + key + "': unexpected type " +
                          std::string(it->type_name()));
    }
}

const json& object_field(const json& obj, const std::string& key, const std::string& path) {
    static const json empty = json::object();
    auto it = obj.find(key);
    if (it == obj.end()) return empty;
    if (!it->is_object()) throw ConfigError("config field '" + path + key + "': expected an object");
    return *it;
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& path) {
    for (const auto& item : obj.items()) {
        if (!known.contains(item.key())) {
            throw ConfigError("config field '" + path + item.key() + "': unknown field");
        }
    }
}

AlgorithmSettings algorithm_from_json(const json& j, const std::string& path,
                                      AlgorithmSettings defaults) {
    defaults.enabled = field(j, "enabled", path, defaults.enabled);
    defaults.iterations = field(j, "iterations", path, defaults.iterations);
    return defaults;
}

std::string format_r(double r) {
    std::ostringstream ss;
    ss << r;
    return ss.str();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(j,
                   {"phantom_size", "scales", "snr_db", "undersampling", "density", "algorithms",
                    "qq", "seed", "output_dir"},
                   "");
    ExperimentConfig c;
    c.phantom_size = field(j, "phantom_size", "", c.phantom_size);
    c.scales = field(j, "scales", "", c.scales);
    if (auto it = j.find("snr_db"); it != j.end()) {
        if (it->is_null()) c.snr_db.reset();
        else c.snr_db = field(j, "snr_db", "", 0.0);
    }
    c.undersampling = field(j, "undersampling", "", c.undersampling);
    c.seed = field(j, "seed", "", c.seed);
    c.output_dir = field(j, "output_dir", "", c.output_dir);

    const json& density = object_field(j, "density", "");
    reject_unknown(density, {"degree", "center_radius", "p_min"}, "density.");
    c.density_degree = field(density, "degree", "density.", c.density_degree);
    c.center_radius = field(density, "center_radius", "density.", c.center_radius);
    c.p_min = field(density, "p_min", "density.", c.p_min);

    const json& algs = object_field(j, "algorithms", "");
    reject_unknown(algs, {"vdamp", "fista", "sure_it"}, "algorithms.");
    const json& vd = object_field(algs, "vdamp", "algorithms.");
    reject_unknown(vd, {"enabled", "iterations"}, "algorithms.vdamp.");
    c.vdamp = algorithm_from_json(vd, "algorithms.vdamp.", c.vdamp);
    const json& si = object_field(algs, "sure_it", "algorithms.");
    reject_unknown(si, {"enabled", "iterations"}, "algorithms.sure_it.");
    c.sure_it = algorithm_from_json(si, "algorithms.sure_it.", c.sure_it);

    const json& fi = object_field(algs, "fista", "algorithms.");
    const std::string fpath = "algorithms.fista.";
    reject_unknown(fi, {"enabled", "iterations", "lambda", "lambda_grid", "tune_budget"}, fpath);
    static_cast<AlgorithmSettings&>(c.fista) = algorithm_from_json(fi, fpath, c.fista);
    if (auto it = fi.find("lambda"); it != fi.end() && !it->is_null()) {
        c.fista.lambda = field(fi, "lambda", fpath, 0.0);
    }
    if (auto it = fi.find("tune_budget"); it != fi.end() && !it->is_null()) {
        c.fista.tune_budget = field(fi, "tune_budget", fpath, 0);
    }
    const json& grid = object_field(fi, "lambda_grid", fpath);
    reject_unknown(grid, {"min", "max", "points"}, fpath + "lambda_grid.");
    c.fista.grid_min = field(grid, "min", fpath + "lambda_grid.", c.fista.grid_min);
    c.fista.grid_max = field(grid, "max", fpath + "lambda_grid.", c.fista.grid_max);
    c.fista.grid_points = field(grid, "points", fpath + "lambda_grid.", c.fista.grid_points);

    const json& qq = object_field(j, "qq", "");
    reject_unknown(qq, {"iterations", "quantiles"}, "qq.");
    c.qq_iterations = field(qq, "iterations", "qq.", c.qq_iterations);
    c.qq_quantiles = field(qq, "quantiles", "qq.", c.qq_quantiles);
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json fista = {{"enabled", c.fista.enabled},
                  {"iterations", c.fista.iterations},
                  {"lambda", c.fista.lambda ? json(*c.fista.lambda) : json(nullptr)},
                  {"lambda_grid",
                   {{"min", c.fista.grid_min}, {"max", c.fista.grid_max},
                    {"points", c.fista.grid_points}}},
                  {"tune_budget", c.fista.tune_budget ? json(*c.fista.tune_budget) : json(nullptr)}};
    return {{"phantom_size", c.phantom_size},
            {"scales", c.scales},
            {"snr_db", c.snr_db ? json(*c.snr_db) : json(nullptr)},
            {"undersampling", c.undersampling},
            {"density",
             {{"degree", c.density_degree},
              {"center_radius", c.center_radius},
              {"p_min", c.p_min}}},
            {"algorithms",
             {{"vdamp", {{"enabled", c.vdamp.enabled}, {"iterations", c.vdamp.iterations}}},
              {"fista", fista},
              {"sure_it", {{"enabled", c.sure_it.enabled}, {"iterations", c.sure_it.iterations}}}}},
            {"qq", {{"iterations", c.qq_iterations}, {"quantiles", c.qq_quantiles}}},
            {"seed", c.seed},
            {"output_dir", c.output_dir}};
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line/column.
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
    return parse_config(io::read_text(path));
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
    std::vector<std::string> v;
    bool grid_ok = true;
    if (c.scales < 1) {
        v.push_back("scales < 1");
        grid_ok = false;
    }
    if (c.phantom_size < 16) {
        v.push_back("phantom size " + std::to_string(c.phantom_size) + " < 16");
        grid_ok = false;
    }
    if (c.scales >= 1 && c.scales < 30) {
        const std::size_t factor = std::size_t{1} << c.scales;
        if (c.phantom_size % factor != 0) {
            v.push_back("phantom size " + std::to_string(c.phantom_size) +
                        " not divisible by 2^scales = " + std::to_string(factor));
            grid_ok = false;
        }
    } else if (c.scales >= 30) {
        v.push_back("scales too large");
        grid_ok = false;
    }
    if (c.snr_db && !std::isfinite(*c.snr_db)) v.push_back("snr_db must be finite (null = noiseless)");
    if (c.undersampling.empty()) v.push_back("no undersampling factors");
    bool density_ok = true;
    if (c.density_degree < 1) {
        v.push_back("density degree < 1");
        density_ok = false;
    }
    if (!(c.center_radius >= 0.0 && c.center_radius < 1.0)) {
        v.push_back("density center_radius outside [0, 1)");
        density_ok = false;
    }
    if (!(c.p_min > 0.0 && c.p_min <= 1.0)) {
        v.push_back("density p_min outside (0, 1]");
        density_ok = false;
    }
    for (double r : c.undersampling) {
        if (!(r >= 1.0)) {
            v.push_back("undersampling factor < 1: " + format_r(r));
            continue;
        }
        if (grid_ok && density_ok) {
            try {
                polynomial_pmap(c.phantom_size, c.phantom_size,
                                {c.density_degree, c.center_radius, r, c.p_min});
            } catch (const std::exception& e) {
                v.push_back("undersampling factor " + format_r(r) + ": " + e.what());
            }
        }
    }
    if (!c.vdamp.enabled && !c.fista.enabled && !c.sure_it.enabled) {
        v.push_back("no algorithm enabled");
    }
    if (c.vdamp.iterations < 1) v.push_back("algorithms.vdamp.iterations < 1");
    if (c.sure_it.iterations < 1) v.push_back("algorithms.sure_it.iterations < 1");
    if (c.fista.iterations < 1) v.push_back("algorithms.fista.iterations < 1");
    if (c.fista.lambda && !(*c.fista.lambda > 0.0)) v.push_back("algorithms.fista.lambda <= 0");
    if (c.fista.tune_budget && *c.fista.tune_budget < 1) {
        v.push_back("algorithms.fista.tune_budget < 1");
    }
    if (!c.fista.lambda) {
        if (!(c.fista.grid_min > 0.0) || !(c.fista.grid_max >= c.fista.grid_min)) {
            v.push_back("algorithms.fista.lambda_grid needs 0 < min <= max");
        }
        if (c.fista.grid_points < 1) v.push_back("algorithms.fista.lambda_grid.points < 1");
    }
    if (c.qq_quantiles < 10) v.push_back("qq.quantiles < 10");
    for (int k : c.qq_iterations) {
        if (k < 0) v.push_back("qq.iterations contains a negative iteration");
    }
    return v;
}

std::vector<std::string> validate_config_file(const fs::path& path) {
    try {
        return validate_config(load_config(path));
    } catch (const ConfigError& e) {
        return {e.what()};
    }
}

std::string run_id(const std::string& algorithm, double undersampling) {
    return algorithm + "_R" + format_r(undersampling);
}

std::uint64_t cell_seed(std::uint64_t master_seed, double undersampling) {
    return substream(master_seed, "cell/R" + format_r(undersampling))();
}

namespace {

struct CellOutput {
    CellSummary summary;
    std::string trace_csv;
    std::string timing_csv;
    std::string qq_csv;
    std::string lambda_csv;
    std::uint64_t seed = 0;
};

void append_qq(std::ostringstream& qq, const std::string& id, int k, const WaveletCoeffs& r,
               const WaveletCoeffs& w0, std::size_t quantiles) {
    for (std::size_t j = 0; j < r.layout.count(); ++j) {
        auto est = subband_view(r, j);
        auto ref = subband_view(w0, j);
        if (est.size() < quantiles) continue;
        std::vector<cplx> residual(est.size());
        for (std::size_t i = 0; i < est.size(); ++i) residual[i] = est[i] - ref[i];
        try {
            const auto [re, im] = qq_data(residual, quantiles);
            io::write_qq_rows(qq, id, k, r.layout[j].label(), re);
            io::write_qq_rows(qq, id, k, r.layout[j].label(), im);
        } catch (const std::invalid_argument&) {
            // zero-variance residual (e.g. exact recovery); nothing to plot
        }
    }
}

CellOutput run_cell(const ExperimentConfig& c, double r_factor, const ComplexImage& x0,
                    const fs::path& out_dir) {
    CellOutput out;
    out.summary.undersampling = r_factor;
    out.seed = cell_seed(c.seed, r_factor);
    const std::string tag = "R" + format_r(r_factor);
    const fs::path cell_dir = out_dir / tag;
    fs::create_directories(cell_dir);

    const ProbabilityMap pmap = polynomial_pmap(x0.height, x0.width,
                                                {c.density_degree, c.center_radius, r_factor, c.p_min});
    const SamplingMask mask = draw_mask(pmap, out.seed);
    const KSpaceData y = synthesize(x0, mask, c.snr_db.value_or(kNoiseless), out.seed);
    out.summary.measurements = mask.count();
    out.summary.noise_var = y.noise_var;
    io::write_real_grid(cell_dir / "pmap.bin", pmap.height, pmap.width, pmap.probs,
                        {{"undersampling", r_factor}, {"scale", pmap.scale},
                         {"degree", c.density_degree}, {"center_radius", c.center_radius},
                         {"p_min", c.p_min}});
    io::write_mask(cell_dir / "mask.bin", mask.height(), mask.width(), mask.grid(),
                   {{"undersampling", r_factor}, {"seed", out.seed}, {"n", mask.count()}});

    const WaveletCoeffs w0 = dwt(x0, c.scales);
    const std::set<int> qq_iters(c.qq_iterations.begin(), c.qq_iterations.end());
    std::ostringstream trace, timing, qq, lambdas;

    if (c.vdamp.enabled) {
        const std::string id = run_id("vdamp", r_factor);
        vdamp::Options opt;
        opt.scales = c.scales;
        opt.iterations = c.vdamp.iterations;
        opt.ground_truth = x0;
        opt.on_iteration = [&](const vdamp::State& s) {
            const int k = s.k - 1;
            if (!qq_iters.contains(k)) return;
            append_qq(qq, id, k, s.r, w0, c.qq_quantiles);
            WaveletCoeffs residual = s.r;
            for (std::size_t i = 0; i < residual.size(); ++i) residual.values[i] -= w0.values[i];
            io::write_complex_image(cell_dir / ("vdamp_residual_k" + std::to_string(k) + ".bin"),
                                    pyramid_image(residual),
                                    {{"iter", k}, {"content", "r_k - w0, pyramid arrangement"}});
        };
        const vdamp::Result res = vdamp::run(y, mask, pmap, opt);
        io::write_trace_rows(trace, id, res.trace, w0.layout);
        io::write_timing_rows(timing, id, res.trace);
        io::write_complex_image(cell_dir / "vdamp_recon.bin", res.image, {{"algorithm", "vdamp"}});
        out.summary.final_nmse_db["vdamp"] = res.trace.records.back().nmse_db;
    }

    if (c.fista.enabled) {
        const std::string id = run_id("fista", r_factor);
        double lambda = 0.0;
        if (c.fista.lambda) {
            lambda = *c.fista.lambda;
        } else {
            const auto search = baselines::tune_lambda(
                y, mask, x0, c.scales, c.fista.tune_budget.value_or(c.fista.iterations),
                baselines::log_grid(c.fista.grid_min, c.fista.grid_max, c.fista.grid_points));
            lambda = search.lambda;
            for (std::size_t i = 0; i < search.grid.size(); ++i) {
                lambdas << id << ',' << io::format_double(search.grid[i]) << ','
                        << io::format_double(search.nmse_db[i]) << '\n';
            }
        }
        out.summary.fista_lambda = lambda;
        const auto res = baselines::fista(y, mask, c.scales, lambda, c.fista.iterations, x0);
        io::write_trace_rows(trace, id, res.trace, w0.layout);
        io::write_timing_rows(timing, id, res.trace);
        io::write_complex_image(cell_dir / "fista_recon.bin", res.image,
                                {{"algorithm", "fista"}, {"lambda", lambda}});
        out.summary.final_nmse_db["fista"] = res.trace.records.back().nmse_db;
    }

    if (c.sure_it.enabled) {
        const std::string id = run_id("sure_it", r_factor);
        const auto res = baselines::sure_it(
            y, mask, c.scales, x0, c.sure_it.iterations, [&](int k, const WaveletCoeffs& r) {
                if (qq_iters.contains(k)) append_qq(qq, id, k, r, w0, c.qq_quantiles);
            });
        io::write_trace_rows(trace, id, res.trace, w0.layout);
        io::write_timing_rows(timing, id, res.trace);
        io::write_complex_image(cell_dir / "sure_it_recon.bin", res.image, {{"algorithm", "sure_it"}});
        out.summary.final_nmse_db["sure_it"] = res.trace.records.back().nmse_db;
    }

    out.trace_csv = trace.str();
    out.timing_csv = timing.str();
    out.qq_csv = qq.str();
    out.lambda_csv = lambdas.str();
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << content;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config, const fs::path& out_dir,
                                 int threads) {
    const auto violations = validate_config(config);
    if (!violations.empty()) {
        std::string msg = "invalid config:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw ConfigError(msg);
    }
    fs::create_directories(out_dir);
    // A stale manifest would mark a half-written directory as complete.
    fs::remove(out_dir / "manifest.json");

    const ComplexImage x0 = shepp_logan(config.phantom_size, config.phantom_size);
    io::write_complex_image(out_dir / "phantom.bin", x0, {{"content", "shepp-logan ground truth"}});

    const std::size_t n_cells = config.undersampling.size();
    std::vector<CellOutput> cells(n_cells);
    std::vector<std::exception_ptr> errors(n_cells);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n_cells; i = next++) {
            try {
                cells[i] = run_cell(config, config.undersampling[i], x0, out_dir);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto n_threads = static_cast<std::size_t>(std::clamp<int>(threads, 1, static_cast<int>(n_cells)));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::string trace = std::string(io::kTraceHeader) + '\n';
    std::string timing = std::string(io::kTimingHeader) + '\n';
    std::string qq = std::string(io::kQQHeader) + '\n';
    std::string lambdas = "run_id,lambda,nmse_db\n";
    for (const auto& cell : cells) {
        trace += cell.trace_csv;
        timing += cell.timing_csv;
        qq += cell.qq_csv;
        lambdas += cell.lambda_csv;
    }
    write_file(out_dir / "trace.csv", trace);
    write_file(out_dir / "timing.csv", timing);
    write_file(out_dir / "qq.csv", qq);
    write_file(out_dir / "lambda_search.csv", lambdas);
    const json config_json = config_to_json(config);
    write_file(out_dir / "config.json", config_json.dump(2) + '\n');

    ExperimentSummary summary;
    summary.directory = out_dir;
    json manifest;
    manifest["tool"] = "csmri";
    manifest["config"] = config_json;
    manifest["inputs_hash"] = io::git_blob_hash(config_json.dump());
    manifest["master_seed"] = config.seed;
    json cell_list = json::array();
    for (const auto& cell : cells) {
        summary.cells.push_back(cell.summary);
        json jc = {{"undersampling", cell.summary.undersampling},
                   {"seed", cell.seed},
                   {"measurements", cell.summary.measurements},
                   {"noise_var", cell.summary.noise_var},
                   {"final_nmse_db", cell.summary.final_nmse_db}};
        if (cell.summary.fista_lambda) jc["fista_lambda"] = *cell.summary.fista_lambda;
        cell_list.push_back(jc);
    }
    manifest["cells"] = cell_list;
    json files = json::object();
    for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
        if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
        files[fs::relative(entry.path(), out_dir).generic_string()] =
            io::git_blob_hash_file(entry.path());
    }
    manifest["files"] = files;
    write_file(out_dir / "manifest.json", manifest.dump(2) + '\n');
    return summary;
}

std::vector<std::string> list_outputs(const fs::path& run_dir) {
    const fs::path manifest_path = run_dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw std::runtime_error("no manifest in " + run_dir.string() + " (run incomplete?)");
    }
    const json manifest = json::parse(io::read_text(manifest_path));
    std::vector<std::string> out;
    for (const auto& item : manifest.at("files").items()) out.push_back(item.key());
    out.push_back("manifest.json");
    return out;
}

}  // namespace csmri
