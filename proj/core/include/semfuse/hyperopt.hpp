#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "semfuse/strategies.hpp"

namespace semfuse {

struct ParamDef {
    std::string name;
    enum class Kind { Real, Int } kind = Kind::Real;
    double lo = 0.0;
    double hi = 1.0;
    bool log_scale = false;
};

struct ParamSpace {
    std::vector<ParamDef> params;
};

struct TrialRecord {
    int index = 0;
    std::map<std::string, double> params;
    double objective = 0.0;
    // Identical for every trial of a search: trials are paired on the
    // same evaluation episodes.
    std::vector<std::uint64_t> episode_seeds;
};

struct SearchResult {
    std::map<std::string, double> best_params;
    double best_objective = 0.0;
    int best_trial = 0;
    std::vector<TrialRecord> trials;
};

using Objective = std::function<double(const std::map<std::string, double>&)>;

// Uniform (log-uniform where marked) random sampling of `budget`
// configurations, each evaluated by the same objective; the evaluator is
// expected to reuse a fixed episode set so trials are paired, and the
// set's seeds are stamped into every trial record. Ties keep the earliest
// trial. Throws on an empty space or budget < 1.
SearchResult random_search(const ParamSpace& space, int budget,
                           const Objective& objective, std::uint64_t seed,
                           std::vector<std::uint64_t> episode_seeds = {});

// Tunable parameters per aggregation kind. Kinds without any (ground
// truth, latest, stubborn) yield an empty space; the erosion kernel stays
// fixed at its default.
ParamSpace default_param_space(StrategyKind kind);

// Writes sampled values back into a config (by parameter name).
void apply_params(StrategyConfig& cfg, const std::map<std::string, double>& params);

std::string format_trial_log(const SearchResult& result);

}  // namespace semfuse
