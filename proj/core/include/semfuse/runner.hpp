#pragma once

#include <vector>

#include "semfuse/hyperopt.hpp"
#include "semfuse/run_config.hpp"

namespace semfuse {

// Deterministic episode set: scenes are generated (or loaded) in order and
// episodes draw target class and start pose from a per-episode stream.
// Episodes whose target is unreachable are skipped (counted in
// excluded_episodes), mirroring the exclusion of unsolvable episodes.
struct EpisodeSet {
    std::vector<EpisodeSpec> episodes;
    int excluded_episodes = 0;
};

EpisodeSet build_episode_set(const RunConfig& cfg);

// Variant used for training / hyperparameter search: same construction,
// different seed stream and count.
EpisodeSet build_episode_set(const RunConfig& cfg, int episode_count,
                             std::uint64_t scene_seed, std::uint64_t episode_seed);

std::vector<EpisodeResult> run_episode_set(const std::vector<EpisodeSpec>& episodes,
                                           const EpisodeConfig& cfg, int workers);

// Runs the shortest-path policy over training episodes with the Stubborn
// channels in collection mode and fits the found-correct / found-wrong
// classifier on the gathered candidate features.
GaussianNB train_stubborn_classifier(const std::vector<EpisodeSpec>& train_episodes,
                                     EpisodeConfig cfg);

// Temperature from a synthetic calibration stream of the run's noise model.
double fit_run_temperature(const NoiseModel& noise, int num_classes, int n_samples,
                           std::uint64_t seed);

// Mean success rate of a strategy over a fixed episode set (hyperopt
// objective).
double evaluate_mean_success(const std::vector<EpisodeSpec>& episodes,
                             const EpisodeConfig& cfg, int workers);

struct BenchmarkOutput {
    std::vector<MetricsRow> rows;
    // Parallel to rows: the per-episode results behind each row.
    std::vector<std::vector<EpisodeResult>> per_row_results;
    int excluded_episodes = 0;
    double temperature = 1.0;
    GaussianNB stubborn_nb;  // trained iff a stubborn strategy was run
    bool stubborn_trained = false;
};

// Full strategy x policy matrix. Fits the temperature once, trains the
// Stubborn classifier when needed, and reuses the same episode set for
// every combination so comparisons are paired.
BenchmarkOutput run_benchmark(const RunConfig& cfg);

}  // namespace semfuse
