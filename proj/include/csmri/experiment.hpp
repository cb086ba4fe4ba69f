#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace csmri {

struct AlgorithmSettings {
    bool enabled = true;
    int iterations = 30;
};

struct FistaSettings : AlgorithmSettings {
    FistaSettings() : AlgorithmSettings{true, 50} {}

    std::optional<double> lambda;  // fixed lambda; otherwise tuned on the grid
    double grid_min = 1e-4;
    double grid_max = 1e-1;
    int grid_points = 15;
    std::optional<int> tune_budget;  // defaults to `iterations`
};

struct ExperimentConfig {
    std::size_t phantom_size = 512;
    int scales = 4;
    std::optional<double> snr_db = 40.0;  // empty means noiseless
    std::vector<double> undersampling{4.0, 6.0, 8.0};
    int density_degree = 3;
    double center_radius = 0.06;
    double p_min = 0.08;
    AlgorithmSettings vdamp{true, 30};
    FistaSettings fista;
    AlgorithmSettings sure_it{true, 30};
    std::vector<int> qq_iterations{0, 1, 2};
    std::size_t qq_quantiles = 200;
    std::uint64_t seed = 1;
    std::string output_dir = "runs/default";
};

// Parse or field error with the location that caused it.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

// Parses text; JSON syntax errors report line and column.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Constraint violations, empty when the config is runnable.
std::vector<std::string> validate_config(const ExperimentConfig& config);
// File-level validation: parse errors become a single violation.
std::vector<std::string> validate_config_file(const std::filesystem::path& path);

std::string run_id(const std::string& algorithm, double undersampling);
std::uint64_t cell_seed(std::uint64_t master_seed, double undersampling);

struct CellSummary {
    double undersampling = 0.0;
    std::size_t measurements = 0;
    double noise_var = 0.0;
    std::map<std::string, double> final_nmse_db;  // by algorithm
    std::optional<double> fista_lambda;
};

struct ExperimentSummary {
    std::filesystem::path directory;
    std::vector<CellSummary> cells;
};

// Runs every (R, algorithm) cell and writes traces, images, QQ data and a
// manifest (written last) into `out_dir`. Throws ConfigError on invalid config.
ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 const std::filesystem::path& out_dir, int threads = 1);

// Files recorded in a run directory's manifest.
std::vector<std::string> list_outputs(const std::filesystem::path& run_dir);

}  // namespace csmri
