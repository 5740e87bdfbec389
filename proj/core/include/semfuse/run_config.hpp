#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semfuse/episode.hpp"
#include "semfuse/metrics.hpp"

namespace semfuse {

// Raised for malformed configuration files or values; the CLI maps it to
// its own exit code, distinct from usage and runtime failures.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kRunConfigVersion = 1;

struct RunConfig {
    // Scene source: a directory of scene files, or generation parameters.
    std::string scene_dir;  // empty: generate
    SceneSpec scene_spec;
    int scene_count = 100;
    std::uint64_t scene_seed = 1000;

    int episode_count = 100;
    std::uint64_t episode_seed = 42;
    int max_steps = 1000;
    double success_radius_m = 1.0;
    int fp_dilation_cells = 2;

    NoiseModel noise;
    SensorParams sensor;

    // Temperature: fixed value, or fitted on a simulated calibration
    // stream (fit_samples draws), or fitted on a logit file.
    std::optional<double> temperature;
    std::string temperature_logit_file;
    int fit_samples = 5000;

    std::vector<StrategyConfig> strategies;
    std::vector<PolicyKind> policies;

    int stubborn_train_episodes = 64;
    std::uint64_t train_seed = 777;  // disjoint stream for training scenes

    int workers = 0;  // 0: hardware concurrency
    std::string output_dir = "out";
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);
RunConfig default_run_config();

// Line-delimited per-episode records.
std::string episode_result_to_json(const EpisodeResult& r, const std::string& strategy,
                                   const std::string& policy);
void append_results_jsonl(const std::string& path,
                          const std::vector<EpisodeResult>& results,
                          const std::string& strategy, const std::string& policy);

struct ResultRecord {
    EpisodeResult result;
    std::string strategy;
    std::string policy;
};

std::vector<ResultRecord> read_results_jsonl(const std::string& path);

}  // namespace semfuse
