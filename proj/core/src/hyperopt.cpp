#include "semfuse/hyperopt.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "semfuse/rng.hpp"

namespace semfuse {

SearchResult random_search(const ParamSpace& space, int budget,
                           const Objective& objective, std::uint64_t seed,
                           std::vector<std::uint64_t> episode_seeds) {
    if (space.params.empty())
        throw std::invalid_argument("random_search: empty parameter space");
    if (budget < 1) throw std::invalid_argument("random_search: budget must be >= 1");
    for (const auto& p : space.params) {
        if (!(p.lo < p.hi)) throw std::invalid_argument("random_search: bad bounds for " + p.name);
        if (p.log_scale && !(p.lo > 0.0))
            throw std::invalid_argument("random_search: log scale needs positive bounds");
    }

    Rng rng(mix_seed(seed, 0x4587ULL));
    SearchResult result;
    result.best_objective = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < budget; ++trial) {
        TrialRecord record;
        record.index = trial;
        record.episode_seeds = episode_seeds;
        for (const auto& p : space.params) {
            double v;
            if (p.log_scale) {
                v = std::exp(rng.uniform(std::log(p.lo), std::log(p.hi)));
            } else {
                v = rng.uniform(p.lo, p.hi);
            }
            if (p.kind == ParamDef::Kind::Int) v = std::floor(v + 0.5);
            record.params[p.name] = v;
        }
        record.objective = objective(record.params);
        if (record.objective > result.best_objective) {
            result.best_objective = record.objective;
            result.best_params = record.params;
            result.best_trial = trial;
        }
        result.trials.push_back(std::move(record));
    }
    return result;
}

ParamSpace default_param_space(StrategyKind kind) {
    ParamSpace space;
    switch (kind) {
        case StrategyKind::HitsViews:
            space.params.push_back({"theta", ParamDef::Kind::Real, 0.3, 0.99, false});
            space.params.push_back({"min_views", ParamDef::Kind::Int, 1, 8, false});
            space.params.push_back(
                {"view_distance_m", ParamDef::Kind::Real, 0.5, 4.0, false});
            break;
        case StrategyKind::SkillFusion:
            space.params.push_back({"decay", ParamDef::Kind::Real, 0.5, 0.99, false});
            space.params.push_back(
                {"score_threshold", ParamDef::Kind::Real, 0.5, 8.0, false});
            break;
        case StrategyKind::LatestFiltered:
            space.params.push_back({"rho", ParamDef::Kind::Real, 0.05, 0.95, false});
            break;
        case StrategyKind::LogOdds:
        case StrategyKind::Averaging:
        case StrategyKind::WeightedAveraging:
            space.params.push_back({"xi", ParamDef::Kind::Real, 0.05, 0.95, false});
            break;
        default:
            break;  // nothing tunable
    }
    return space;
}

void apply_params(StrategyConfig& cfg, const std::map<std::string, double>& params) {
    for (const auto& [name, value] : params) {
        if (name == "theta") cfg.params.theta = value;
        else if (name == "min_views") cfg.params.min_views = static_cast<int>(value);
        else if (name == "view_distance_m") cfg.params.view_distance_m = value;
        else if (name == "decay") cfg.params.decay = value;
        else if (name == "score_threshold") cfg.params.score_threshold = value;
        else if (name == "erosion_m") cfg.params.erosion_m = value;
        else if (name == "rho") cfg.params.rho = value;
        else if (name == "xi") cfg.params.xi = value;
        else if (name == "uncertainty_clamp") cfg.params.uncertainty_clamp = value;
        else throw std::invalid_argument("apply_params: unknown parameter " + name);
    }
}

std::string format_trial_log(const SearchResult& result) {
    std::ostringstream os;
    os << "trial objective params\n";
    for (const auto& t : result.trials) {
        os << std::setw(5) << t.index << " " << std::fixed << std::setprecision(4)
           << t.objective << " ";
        bool first = true;
        for (const auto& [k, v] : t.params) {
            if (!first) os << " ";
            os << k << "=" << std::setprecision(4) << v;
            first = false;
        }
        os << "\n";
    }
    os << "best trial " << result.best_trial << " objective " << std::fixed
       << std::setprecision(4) << result.best_objective << "\n";
    return os.str();
}

}  // namespace semfuse
