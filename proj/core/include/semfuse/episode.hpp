#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "semfuse/policy.hpp"
#include "semfuse/scene.hpp"
#include "semfuse/sensor.hpp"
#include "semfuse/strategies.hpp"

namespace semfuse {

// One concrete episode: where the agent starts, what it searches for and
// the seed of its observation noise stream.
struct EpisodeSpec {
    Scene scene;
    int target_class = kFirstObjectClass;
    AgentPose start;
    std::uint64_t seed = 0;
    int episode_id = 0;
};

struct EpisodeConfig {
    StrategyConfig strategy;
    PolicyKind policy = PolicyKind::ShortestPath;
    SensorParams sensor;
    NoiseModel noise;
    double temperature = 1.0;  // applied when the strategy uses calibration
    int max_steps = 1000;
    double success_radius_m = 1.0;
    int fp_dilation_cells = 2;
    const GaussianNB* stubborn_nb = nullptr;
};

struct EpisodeResult {
    int episode_id = 0;
    bool valid = false;  // false: target unreachable, excluded from metrics
    bool success = false;
    bool found_fp = false;
    bool found_fn = false;
    int det_fp_count = 0;  // connected components of falsely mapped targets
    int det_fn_count = 0;  // (visible bbox, step) incidents with no target shown
    int steps_used = 0;
    double path_length_m = 0.0;
    double shortest_length_m = 0.0;
    int found_step = -1;
    int found_cx = -1;
    int found_cy = -1;
    FoundReason found_reason = FoundReason::none;
    std::uint64_t obs_stream_hash = 0;
};

// Ground-truth shortest path from the start to the cheapest free cell
// within the success radius of a target instance, plus the aim point the
// agent faces on arrival. Empty when no target of the class is reachable.
struct EpisodePlan {
    Path path;
    double aim_x = 0.0;
    double aim_y = 0.0;
};

std::optional<EpisodePlan> plan_ground_truth_path(const Scene& scene, int target_class,
                                                  const AgentPose& start,
                                                  double success_radius_m);

// Dilates the mask by a square radius and counts 8-connected components.
int count_connected_components(const std::vector<char>& mask, int width, int height,
                               int dilation_cells);

// Number of target-class boxes in `boxes_seen` with no rendered target
// cell inside them (one step's detection false negatives).
int count_missing_boxes(const GridMap& map, int target_class,
                        const std::vector<CellBox>& boxes_seen);

std::uint64_t hash_observation(const Observation& obs);

using StepCallback =
    std::function<void(int step, GridMap& map, AggregationStrategy& strategy,
                       const AgentPose& pose)>;

// Closed loop: observe, project, integrate, decide, move. The shortest
// path policy finishes its trajectory even after a (possibly false) found
// decision; the frontier policy terminates on the first decision. The
// optional callback runs after each integration; final_map, when given,
// receives the map as of the last step.
EpisodeResult run_episode(const EpisodeSpec& spec, const EpisodeConfig& cfg,
                          const StepCallback& on_step = nullptr,
                          GridMap* final_map = nullptr);

}  // namespace semfuse
