#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "semfuse/grid_map.hpp"
#include "semfuse/naive_bayes.hpp"

namespace semfuse {

enum class StrategyKind {
    GroundTruth,
    Latest,
    HitsViews,
    SkillFusion,
    Stubborn,
    LatestFiltered,
    LogOdds,
    Averaging,
    WeightedAveraging,
};

std::string strategy_kind_name(StrategyKind kind);
StrategyKind strategy_kind_from_name(const std::string& name);
std::vector<StrategyKind> all_strategy_kinds();

struct StrategyParams {
    // Hits/Views
    double theta = 0.8;
    int min_views = 3;
    double view_distance_m = 2.0;
    // SkillFusion. The erosion kernel is a physical size; it only removes
    // detections smaller than the kernel footprint at the map resolution.
    double decay = 0.9;
    double score_threshold = 2.0;
    double erosion_m = 0.04;
    // Latest Filtered
    double rho = 0.4;
    // Log odds / averaging found threshold
    double xi = 0.4;
    // Weighted averaging uncertainty clamp
    double uncertainty_clamp = 1e-3;
};

struct StrategyConfig {
    StrategyKind kind = StrategyKind::WeightedAveraging;
    bool use_calibration = true;
    bool use_uncertainty_found = true;
    StrategyParams params;

    // Throws std::invalid_argument when a parameter is out of range for
    // the kind (for instance xi outside (0,1)).
    void validate() const;
    std::string label() const;
};

// Canonical flag settings per kind: the calibrated and uncertainty-gated
// flags default on only for the methods defined around them.
StrategyConfig default_strategy_config(StrategyKind kind);

enum class FoundReason { none, distance_only, uncertainty_gated, classifier };

struct FoundDecision {
    bool found = false;
    int cx = -1;
    int cy = -1;
    FoundReason reason = FoundReason::none;
};

// Temporal aggregation strategy bound to one episode: integrates projected
// hits into the map (probabilities, geometry and the class rendered to the
// agent) and decides whether the target is found. The universal distance
// gate applies to every strategy: found requires a rendered target cell
// within found_distance_m of the agent.
class AggregationStrategy {
public:
    AggregationStrategy(StrategyConfig cfg, int target_class, double found_distance_m);
    virtual ~AggregationStrategy() = default;

    virtual void integrate(GridMap& map, const std::vector<ProjectedHit>& hits,
                           const AgentPose& pose) = 0;
    // May mutate the map: a strategy that rejects a candidate also stops
    // showing the target there.
    virtual FoundDecision decide_found(GridMap& map, const AgentPose& pose) = 0;

    // Nearest rendered target cell within the distance gate (found=false);
    // cx stays -1 when there is none. Used by decide_found and by the
    // Stubborn feature collector.
    FoundDecision candidate(const GridMap& map, const AgentPose& pose) const;

    // Decision-time features for a candidate cell; empty for strategies
    // without a feature-based decision.
    virtual std::vector<double> decision_features(const GridMap& map, int cx,
                                                  int cy) const {
        (void)map, (void)cx, (void)cy;
        return {};
    }

    // 8-connected component of cells sharing (cx, cy)'s rendered class.
    std::vector<std::pair<int, int>> rendered_component(const GridMap& map, int cx,
                                                        int cy) const;

    const StrategyConfig& config() const { return cfg_; }
    int target_class() const { return target_class_; }

protected:
    void apply_geometry(GridMap& map, const std::vector<ProjectedHit>& hits) const;
    double distance_to_cell(const GridMap& map, const AgentPose& pose, int cx,
                            int cy) const;
    // All rendered target cells within the gate, nearest first.
    std::vector<std::pair<int, int>> candidates(const GridMap& map,
                                                const AgentPose& pose) const;

    StrategyConfig cfg_;
    int target_class_;
    double found_distance_m_;
};

// The Stubborn baseline takes a trained classifier; every other kind
// ignores the pointer. A strategy built without one never raises found
// (feature-collection mode). The classifier must outlive the strategy.
std::unique_ptr<AggregationStrategy> make_strategy(const StrategyConfig& cfg,
                                                   int target_class,
                                                   double found_distance_m,
                                                   const GaussianNB* stubborn_nb = nullptr);

}  // namespace semfuse
