#include "semfuse/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "semfuse/scene.hpp"

namespace semfuse {

std::string strategy_kind_name(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::GroundTruth: return "ground_truth";
        case StrategyKind::Latest: return "latest";
        case StrategyKind::HitsViews: return "hits_views";
        case StrategyKind::SkillFusion: return "skillfusion";
        case StrategyKind::Stubborn: return "stubborn";
        case StrategyKind::LatestFiltered: return "latest_filtered";
        case StrategyKind::LogOdds: return "logodds";
        case StrategyKind::Averaging: return "averaging";
        case StrategyKind::WeightedAveraging: return "weighted_averaging";
    }
    return "unknown";
}

std::vector<StrategyKind> all_strategy_kinds() {
    return {StrategyKind::GroundTruth,    StrategyKind::Latest,
            StrategyKind::HitsViews,      StrategyKind::SkillFusion,
            StrategyKind::Stubborn,       StrategyKind::LatestFiltered,
            StrategyKind::LogOdds,        StrategyKind::Averaging,
            StrategyKind::WeightedAveraging};
}

StrategyKind strategy_kind_from_name(const std::string& name) {
    for (StrategyKind k : all_strategy_kinds()) {
        if (strategy_kind_name(k) == name) return k;
    }
    std::string valid;
    for (StrategyKind k : all_strategy_kinds()) {
        if (!valid.empty()) valid += ", ";
        valid += strategy_kind_name(k);
    }
    throw std::invalid_argument("unknown strategy '" + name + "' (valid: " + valid + ")");
}

StrategyConfig default_strategy_config(StrategyKind kind) {
    StrategyConfig cfg;
    cfg.kind = kind;
    switch (kind) {
        case StrategyKind::GroundTruth:
        case StrategyKind::Latest:
        case StrategyKind::HitsViews:
        case StrategyKind::SkillFusion:
        case StrategyKind::Stubborn:
            cfg.use_calibration = false;
            cfg.use_uncertainty_found = false;
            break;
        case StrategyKind::LatestFiltered:
            cfg.use_calibration = true;
            cfg.use_uncertainty_found = false;
            break;
        case StrategyKind::LogOdds:
        case StrategyKind::Averaging:
        case StrategyKind::WeightedAveraging:
            cfg.use_calibration = true;
            cfg.use_uncertainty_found = true;
            break;
    }
    return cfg;
}

void StrategyConfig::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    switch (kind) {
        case StrategyKind::HitsViews:
            if (!in_unit(params.theta))
                throw std::invalid_argument("hits_views: theta must be in (0,1)");
            if (params.min_views < 1)
                throw std::invalid_argument("hits_views: min_views must be >= 1");
            if (!(params.view_distance_m > 0.0))
                throw std::invalid_argument("hits_views: view_distance_m must be > 0");
            break;
        case StrategyKind::SkillFusion:
            if (!in_unit(params.decay))
                throw std::invalid_argument("skillfusion: decay must be in (0,1)");
            if (!(params.score_threshold >= 0.0))
                throw std::invalid_argument("skillfusion: score_threshold must be >= 0");
            if (!(params.erosion_m >= 0.0))
                throw std::invalid_argument("skillfusion: erosion_m must be >= 0");
            break;
        case StrategyKind::LatestFiltered:
            if (!in_unit(params.rho))
                throw std::invalid_argument("latest_filtered: rho must be in (0,1)");
            break;
        case StrategyKind::LogOdds:
        case StrategyKind::Averaging:
        case StrategyKind::WeightedAveraging:
            if (!in_unit(params.xi))
                throw std::invalid_argument(strategy_kind_name(kind) +
                                            ": xi must be in (0,1)");
            if (kind == StrategyKind::WeightedAveraging &&
                !(params.uncertainty_clamp > 0.0 && params.uncertainty_clamp <= 1.0))
                throw std::invalid_argument(
                    "weighted_averaging: uncertainty_clamp must be in (0,1]");
            break;
        default:
            break;
    }
}

std::string StrategyConfig::label() const {
    StrategyConfig def = default_strategy_config(kind);
    std::string out = strategy_kind_name(kind);
    if (use_calibration != def.use_calibration)
        out += use_calibration ? "+cal" : "-cal";
    if (use_uncertainty_found != def.use_uncertainty_found)
        out += use_uncertainty_found ? "+unc" : "-unc";
    return out;
}

AggregationStrategy::AggregationStrategy(StrategyConfig cfg, int target_class,
                                         double found_distance_m)
    : cfg_(std::move(cfg)), target_class_(target_class),
      found_distance_m_(found_distance_m) {
    cfg_.validate();
    if (!(found_distance_m > 0.0))
        throw std::invalid_argument("strategy: found distance must be > 0");
}

void AggregationStrategy::apply_geometry(GridMap& map,
                                         const std::vector<ProjectedHit>& hits) const {
    for (const auto& h : hits) {
        map.mark_observed(h.cx, h.cy);
        map.update_height_occupancy(h.cx, h.cy, h.height_m);
    }
}

double AggregationStrategy::distance_to_cell(const GridMap& map, const AgentPose& pose,
                                             int cx, int cy) const {
    double dx = map.cell_center_x(cx) - pose.x;
    double dy = map.cell_center_y(cy) - pose.y;
    return std::hypot(dx, dy);
}

std::vector<std::pair<int, int>> AggregationStrategy::candidates(
    const GridMap& map, const AgentPose& pose) const {
    const double r = found_distance_m_;
    int x0 = std::max(0, static_cast<int>(std::floor((pose.x - r) / map.resolution())));
    int x1 = std::min(map.width() - 1,
                      static_cast<int>(std::floor((pose.x + r) / map.resolution())));
    int y0 = std::max(0, static_cast<int>(std::floor((pose.y - r) / map.resolution())));
    int y1 = std::min(map.height() - 1,
                      static_cast<int>(std::floor((pose.y + r) / map.resolution())));

    std::vector<std::pair<double, int>> ranked;  // (distance, cell index)
    for (int cy = y0; cy <= y1; ++cy) {
        for (int cx = x0; cx <= x1; ++cx) {
            if (map.rendered_class(cx, cy) != target_class_) continue;
            double d = distance_to_cell(map, pose, cx, cy);
            if (d <= r) ranked.emplace_back(d, map.index(cx, cy));
        }
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::pair<int, int>> cells;
    cells.reserve(ranked.size());
    for (const auto& [d, idx] : ranked)
        cells.emplace_back(idx % map.width(), idx / map.width());
    return cells;
}

FoundDecision AggregationStrategy::candidate(const GridMap& map,
                                             const AgentPose& pose) const {
    auto cells = candidates(map, pose);
    FoundDecision d;
    if (!cells.empty()) {
        d.cx = cells.front().first;
        d.cy = cells.front().second;
    }
    return d;
}

std::vector<std::pair<int, int>> AggregationStrategy::rendered_component(
    const GridMap& map, int cx, int cy) const {
    std::vector<std::pair<int, int>> out;
    if (!map.in_bounds(cx, cy)) return out;
    const int cls = map.rendered_class(cx, cy);
    std::vector<char> seen(static_cast<std::size_t>(map.width()) * map.height(), 0);
    std::deque<std::pair<int, int>> queue{{cx, cy}};
    seen[map.index(cx, cy)] = 1;
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        out.emplace_back(x, y);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                int nx = x + dx, ny = y + dy;
                if (!map.in_bounds(nx, ny) || seen[map.index(nx, ny)]) continue;
                if (map.rendered_class(nx, ny) != cls) continue;
                seen[map.index(nx, ny)] = 1;
                queue.emplace_back(nx, ny);
            }
        }
    }
    return out;
}

namespace {

// Map the class with the highest probability at each step, overwriting any
// previous value. Also serves the ground-truth camera configuration.
class LatestStrategy : public AggregationStrategy {
public:
    using AggregationStrategy::AggregationStrategy;

    void integrate(GridMap& map, const std::vector<ProjectedHit>& hits,
                   const AgentPose&) override {
        apply_geometry(map, hits);
        for (const auto& h : hits) {
            map.set_probs(h.cx, h.cy, h.p_pred);
            map.set_rendered_class(h.cx, h.cy, static_cast<int>(argmax(h.p_pred)));
        }
    }

    FoundDecision decide_found(GridMap& map, const AgentPose& pose) override {
        FoundDecision d = candidate(map, pose);
        if (d.cx >= 0) {
            d.found = true;
            d.reason = FoundReason::distance_only;
        }
        return d;
    }
};

class HitsViewsStrategy : public AggregationStrategy {
public:
    using AggregationStrategy::AggregationStrategy;

    void integrate(GridMap& map, const std::vector<ProjectedHit>& hits,
                   const AgentPose&) override {
        ensure_aux(map);
        apply_geometry(map, hits);
        for (const auto& h : hits) {
            const int i = map.index(h.cx, h.cy);
            map.set_probs(h.cx, h.cy, h.p_pred);
            int am = static_cast<int>(argmax(h.p_pred));
            if (h.distance_m <= cfg_.params.view_distance_m) views_[i]++;
            if (am == target_class_) hits_[i]++;
            if (am == target_class_ && rejected_[i])
                am = kWallClass;  // false detection, stop mapping the target here
            map.set_rendered_class(h.cx, h.cy, am);
        }
    }

    FoundDecision decide_found(GridMap& map, const AgentPose& pose) override {
        ensure_aux(map);
        for (auto [cx, cy] : candidates(map, pose)) {
            const int i = map.index(cx, cy);
            if (views_[i] < cfg_.params.min_views) continue;  // undecided, keep mapping
            double ratio = static_cast<double>(hits_[i]) / views_[i];
            if (ratio >= cfg_.params.theta)
                return {true, cx, cy, FoundReason::classifier};
            rejected_[i] = 1;
            map.set_rendered_class(cx, cy, kWallClass);
        }
        return {};
    }

private:
    void ensure_aux(const GridMap& map) {
        if (!views_.empty()) return;
        std::size_t n = static_cast<std::size_t>(map.width()) * map.height();
        views_.assign(n, 0);
        hits_.assign(n, 0);
        rejected_.assign(n, 0);
    }

    std::vector<int> views_;
    std::vector<int> hits_;
    std::vector<char> rejected_;
};

// Erode per-frame target detections to drop outliers, then accumulate a
// decayed score per cell; the goal is shown only while score > threshold.
class SkillFusionStrategy : public AggregationStrategy {
public:
    using AggregationStrategy::AggregationStrategy;

    void integrate(GridMap& map, const std::vector<ProjectedHit>& hits,
                   const AgentPose&) override {
        ensure_aux(map);
        apply_geometry(map, hits);

        frame_target_.assign(frame_target_.size(), 0);
        for (const auto& h : hits) {
            if (static_cast<int>(argmax(h.p_pred)) == target_class_)
                frame_target_[map.index(h.cx, h.cy)] = 1;
        }

        const int kernel = std::max(
            1, static_cast<int>(std::ceil(cfg_.params.erosion_m / map.resolution())));
        for (const auto& h : hits) {
            bool survives = true;
            for (int dy = 0; dy < kernel && survives; ++dy) {
                for (int dx = 0; dx < kernel; ++dx) {
                    int nx = h.cx + dx, ny = h.cy + dy;
                    if (!map.in_bounds(nx, ny) || !frame_target_[map.index(nx, ny)]) {
                        survives = false;
                        break;
                    }
                }
            }
            const int i = map.index(h.cx, h.cy);
            if (survives)
                score_[i] += 1.0;
            else
                score_[i] *= cfg_.params.decay;

            map.set_probs(h.cx, h.cy, h.p_pred);
            int am = static_cast<int>(argmax(h.p_pred));
            int shown;
            if (score_[i] > cfg_.params.score_threshold)
                shown = target_class_;
            else
                shown = (am == target_class_) ? kWallClass : am;
            map.set_rendered_class(h.cx, h.cy, shown);
        }
    }

    FoundDecision decide_found(GridMap& map, const AgentPose& pose) override {
        FoundDecision d = candidate(map, pose);
        if (d.cx >= 0) {
            d.found = true;
            d.reason = FoundReason::distance_only;
        }
        return d;
    }

    double score_at(int index) const { return score_[index]; }

private:
    void ensure_aux(const GridMap& map) {
        if (!score_.empty()) return;
        std::size_t n = static_cast<std::size_t>(map.width()) * map.height();
        score_.assign(n, 0.0);
        frame_target_.assign(n, 0);
    }

    std::vector<double> score_;
    std::vector<char> frame_target_;
};

// Latest mapping plus per-cell evidence channels feeding a Gaussian naive
// Bayes found decision.
class StubbornStrategy : public AggregationStrategy {
public:
    StubbornStrategy(StrategyConfig cfg, int target_class, double found_distance_m,
                     const GaussianNB* nb)
        : AggregationStrategy(std::move(cfg), target_class, found_distance_m), nb_(nb) {}

    void integrate(GridMap& map, const std::vector<ProjectedHit>& hits,
                   const AgentPose&) override {
        ensure_aux(map);
        apply_geometry(map, hits);
        for (const auto& h : hits) {
            const int i = map.index(h.cx, h.cy);
            map.set_probs(h.cx, h.cy, h.p_pred);
            map.set_rendered_class(h.cx, h.cy, static_cast<int>(argmax(h.p_pred)));
            views_[i]++;
            double conf = h.p_pred[static_cast<std::size_t>(target_class_)];
            cum_conf_[i] += conf;
            max_conf_[i] = std::max(max_conf_[i], conf);
            double other = 0.0;
            for (std::size_t c = 0; c < h.p_pred.size(); ++c) {
                if (static_cast<int>(c) != target_class_)
                    other = std::max(other, h.p_pred[c]);
            }
            max_other_[i] = std::max(max_other_[i], other);
        }
    }

    FoundDecision decide_found(GridMap& map, const AgentPose& pose) override {
        FoundDecision cand = candidate(map, pose);
        if (cand.cx < 0 || nb_ == nullptr) return {};
        auto f = decision_features(map, cand.cx, cand.cy);
        if (nb_->predict(f)) return {true, cand.cx, cand.cy, FoundReason::classifier};
        return {};
    }

    std::vector<double> decision_features(const GridMap& map, int cx,
                                          int cy) const override {
        double views = 0.0, cum = 0.0, mx = 0.0, mx_other = 0.0;
        for (auto [x, y] : rendered_component(map, cx, cy)) {
            const int i = map.index(x, y);
            views += views_[i];
            cum += cum_conf_[i];
            mx = std::max(mx, max_conf_[i]);
            mx_other = std::max(mx_other, max_other_[i]);
        }
        return {views, cum, mx, mx_other};
    }

private:
    void ensure_aux(const GridMap& map) {
        if (!views_.empty()) return;
        std::size_t n = static_cast<std::size_t>(map.width()) * map.height();
        views_.assign(n, 0.0);
        cum_conf_.assign(n, 0.0);
        max_conf_.assign(n, 0.0);
        max_other_.assign(n, 0.0);
    }

    const GaussianNB* nb_;
    std::vector<double> views_;
    std::vector<double> cum_conf_;
    std::vector<double> max_conf_;
    std::vector<double> max_other_;
};

// Latest rendering, but the target class is only shown while the map
// uncertainty (entropy of the running mean) stays below rho; otherwise the
// cell is mapped as occupied.
class LatestFilteredStrategy : public AggregationStrategy {
public:
    using AggregationStrategy::AggregationStrategy;

    void integrate(GridMap& map, const std::vector<ProjectedHit>& hits,
                   const AgentPose&) override {
        ensure_aux(map);
        apply_geometry(map, hits);
        for (const auto& h : hits) {
            const int i = map.index(h.cx, h.cy);
            if (sum_[i].empty()) sum_[i].assign(h.p_pred.size(), 0.0);
            for (std::size_t c = 0; c < h.p_pred.size(); ++c) sum_[i][c] += h.p_pred[c];
            wsum_[i] += 1.0;
            ProbVector mean(sum_[i].size());
            for (std::size_t c = 0; c < mean.size(); ++c) mean[c] = sum_[i][c] / wsum_[i];
            map.set_probs(h.cx, h.cy, std::move(mean));

            int am = static_cast<int>(argmax(h.p_pred));
            if (am == target_class_ && map.cell(h.cx, h.cy).u_map >= cfg_.params.rho)
                am = kWallClass;
            map.set_rendered_class(h.cx, h.cy, am);
        }
    }

    FoundDecision decide_found(GridMap& map, const AgentPose& pose) override {
        FoundDecision d = candidate(map, pose);
        if (d.cx >= 0) {
            d.found = true;
            d.reason = FoundReason::distance_only;
        }
        return d;
    }

private:
    void ensure_aux(const GridMap& map) {
        if (!wsum_.empty()) return;
        std::size_t n = static_cast<std::size_t>(map.width()) * map.height();
        sum_.assign(n, {});
        wsum_.assign(n, 0.0);
    }

    std::vector<ProbVector> sum_;
    std::vector<double> wsum_;
};

// Bayesian update with a multi-class log odds vector per cell: the
// posterior is the softmax of accumulated log probabilities (uniform
// prior), equivalent to the product of per-observation likelihoods.
class LogOddsStrategy : public AggregationStrategy {
public:
    using AggregationStrategy::AggregationStrategy;

    void integrate(GridMap& map, const std::vector<ProjectedHit>& hits,
                   const AgentPose&) override {
        ensure_aux(map);
        apply_geometry(map, hits);
        for (const auto& h : hits) {
            const int i = map.index(h.cx, h.cy);
            if (logacc_[i].empty()) logacc_[i].assign(h.p_pred.size(), 0.0);
            for (std::size_t c = 0; c < h.p_pred.size(); ++c)
                logacc_[i][c] += std::log(std::max(h.p_pred[c], kProbFloor));
            ProbVector posterior = softmax(logacc_[i]);
            int am = static_cast<int>(argmax(posterior));
            map.set_probs(h.cx, h.cy, std::move(posterior));
            map.set_rendered_class(h.cx, h.cy, am);
        }
    }

    FoundDecision decide_found(GridMap& map, const AgentPose& pose) override {
        for (auto [cx, cy] : candidates(map, pose)) {
            if (!cfg_.use_uncertainty_found)
                return {true, cx, cy, FoundReason::distance_only};
            if (map.cell(cx, cy).u_map < cfg_.params.xi)
                return {true, cx, cy, FoundReason::uncertainty_gated};
        }
        return {};
    }

private:
    void ensure_aux(const GridMap& map) {
        if (!logacc_.empty()) return;
        logacc_.assign(static_cast<std::size_t>(map.width()) * map.height(), {});
    }

    std::vector<std::vector<double>> logacc_;
};

// Running (optionally inverse-uncertainty weighted) average of calibrated
// probability vectors; found when a close target cell's map uncertainty
// drops below xi.
class AveragingStrategy : public AggregationStrategy {
public:
    AveragingStrategy(StrategyConfig cfg, int target_class, double found_distance_m,
                      bool weighted)
        : AggregationStrategy(std::move(cfg), target_class, found_distance_m),
          weighted_(weighted) {}

    void integrate(GridMap& map, const std::vector<ProjectedHit>& hits,
                   const AgentPose&) override {
        ensure_aux(map);
        apply_geometry(map, hits);
        for (const auto& h : hits) {
            const int i = map.index(h.cx, h.cy);
            double w = 1.0;
            if (weighted_) {
                double u = std::clamp(h.u, cfg_.params.uncertainty_clamp, 1.0);
                w = 1.0 / u;
            }
            if (sum_[i].empty()) sum_[i].assign(h.p_pred.size(), 0.0);
            for (std::size_t c = 0; c < h.p_pred.size(); ++c)
                sum_[i][c] += w * h.p_pred[c];
            wsum_[i] += w;
            ProbVector mean(sum_[i].size());
            for (std::size_t c = 0; c < mean.size(); ++c) mean[c] = sum_[i][c] / wsum_[i];
            int am = static_cast<int>(argmax(mean));
            map.set_probs(h.cx, h.cy, std::move(mean));
            map.set_rendered_class(h.cx, h.cy, am);
        }
    }

    FoundDecision decide_found(GridMap& map, const AgentPose& pose) override {
        for (auto [cx, cy] : candidates(map, pose)) {
            if (!cfg_.use_uncertainty_found)
                return {true, cx, cy, FoundReason::distance_only};
            if (map.cell(cx, cy).u_map < cfg_.params.xi)
                return {true, cx, cy, FoundReason::uncertainty_gated};
        }
        return {};
    }

private:
    void ensure_aux(const GridMap& map) {
        if (!wsum_.empty()) return;
        std::size_t n = static_cast<std::size_t>(map.width()) * map.height();
        sum_.assign(n, {});
        wsum_.assign(n, 0.0);
    }

    bool weighted_;
    std::vector<ProbVector> sum_;
    std::vector<double> wsum_;
};

}  // namespace

std::unique_ptr<AggregationStrategy> make_strategy(const StrategyConfig& cfg,
                                                   int target_class,
                                                   double found_distance_m,
                                                   const GaussianNB* stubborn_nb) {
    switch (cfg.kind) {
        case StrategyKind::GroundTruth:
        case StrategyKind::Latest:
            return std::make_unique<LatestStrategy>(cfg, target_class, found_distance_m);
        case StrategyKind::HitsViews:
            return std::make_unique<HitsViewsStrategy>(cfg, target_class,
                                                       found_distance_m);
        case StrategyKind::SkillFusion:
            return std::make_unique<SkillFusionStrategy>(cfg, target_class,
                                                         found_distance_m);
        case StrategyKind::Stubborn:
            return std::make_unique<StubbornStrategy>(cfg, target_class,
                                                      found_distance_m, stubborn_nb);
        case StrategyKind::LatestFiltered:
            return std::make_unique<LatestFilteredStrategy>(cfg, target_class,
                                                            found_distance_m);
        case StrategyKind::LogOdds:
            return std::make_unique<LogOddsStrategy>(cfg, target_class,
                                                     found_distance_m);
        case StrategyKind::Averaging:
            return std::make_unique<AveragingStrategy>(cfg, target_class,
                                                       found_distance_m, false);
        case StrategyKind::WeightedAveraging:
            return std::make_unique<AveragingStrategy>(cfg, target_class,
                                                       found_distance_m, true);
    }
    throw std::invalid_argument("make_strategy: unknown kind");
}

}  // namespace semfuse
