#pragma once

#include <string>
#include <vector>

#include "semfuse/episode.hpp"

namespace semfuse {

// Success weighted by path length: mean of S_i * l_i / max(p_i, l_i) over
// valid episodes, with l the ground-truth shortest length and p the
// traveled length.
double spl(const std::vector<EpisodeResult>& results);

struct MetricsRow {
    std::string strategy;
    std::string policy;
    bool calibrated = false;
    bool uncertainty_found = false;
    double sr = 0.0;      // percent
    double fpr = 0.0;     // percent
    double fnr = 0.0;     // percent
    double det_fp = 0.0;  // mean false detections per episode
    double det_fn = 0.0;  // mean per-step missing-target incidents per episode
    double spl = 0.0;     // percent
    int valid_episodes = 0;
    int excluded_episodes = 0;
};

// Shares are over valid episodes only; throws on an empty result set.
MetricsRow aggregate_metrics(const std::string& strategy_label,
                             const std::string& policy_label, bool calibrated,
                             bool uncertainty_found,
                             const std::vector<EpisodeResult>& results,
                             int excluded_episodes = 0);

// Aligned plain-text table, one decimal place.
std::string format_metrics_table(const std::vector<MetricsRow>& rows);
// Comma-separated, same rounding as the table.
std::string format_metrics_csv(const std::vector<MetricsRow>& rows);

// One-sided sign test: probability of at least `greater` successes in
// `greater + less` fair coin flips. Ties are discarded by the caller.
double sign_test_p_value(int greater, int less);

}  // namespace semfuse
