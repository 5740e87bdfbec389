#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semfuse/grid_map.hpp"
#include "semfuse/scene.hpp"

namespace semfuse {

inline constexpr double kMaxStepDistance = 0.25;  // meters per step

enum class PolicyKind { ShortestPath, Frontier };
std::string policy_kind_name(PolicyKind kind);
PolicyKind policy_kind_from_name(const std::string& name);

struct Path {
    std::vector<std::pair<int, int>> waypoints;  // consecutive 4-/8-adjacent cells
    double length_m = 0.0;
};

// Traversability oracle over grid cells; out-of-bounds queries are handled
// by the planner.
using TraversableFn = std::function<bool(int, int)>;

// Optimal 8-connected path under unit cardinal / sqrt(2) diagonal costs
// (A* with the admissible octile heuristic, ties broken on f, then h, then
// cell index). Diagonal moves cannot cut corners. Returns std::nullopt
// when the goal is unreachable.
std::optional<Path> try_shortest_path(const TraversableFn& traversable, int width,
                                      int height, double resolution,
                                      std::pair<int, int> start,
                                      std::pair<int, int> goal);

// Throwing wrapper; std::runtime_error on no path.
Path shortest_path(const TraversableFn& traversable, int width, int height,
                   double resolution, std::pair<int, int> start,
                   std::pair<int, int> goal);

// Uniform-cost expansion from start until the nearest cell satisfying
// is_goal is reached.
std::optional<Path> nearest_goal_path(const TraversableFn& traversable, int width,
                                      int height, double resolution,
                                      std::pair<int, int> start,
                                      const std::function<bool(int, int)>& is_goal);

// State-independent policy: walks a precomputed shortest path at up to
// 0.25 m per step, heading along the direction of motion; after the final
// waypoint the position clamps at the goal and the heading turns toward
// the aim point (the target object). The pose at step i is a pure function
// of i, so every strategy sees the identical observation sequence.
class ShortestPathPolicy {
public:
    ShortestPathPolicy(const Scene& scene, const Path& path, double aim_x, double aim_y);

    AgentPose pose_at_step(int step) const;
    int arrival_step() const { return arrival_step_; }
    double path_length_m() const { return total_length_; }

private:
    std::vector<std::pair<double, double>> points_;  // waypoint centers, world coords
    std::vector<double> cumulative_;                 // arc length at each point
    double total_length_ = 0.0;
    int arrival_step_ = 0;
    double aim_x_, aim_y_;
};

// Frontier exploration over the agent's believed map: seek the nearest
// rendered target if one exists, otherwise the nearest frontier cell
// (believed-free next to unknown). Plans only through believed-free or
// unknown cells and replans when the plan is invalidated or stale.
class FrontierPolicy {
public:
    FrontierPolicy(double success_radius_m, int replan_interval = 10)
        : success_radius_m_(success_radius_m), replan_interval_(replan_interval) {}

    // Proposes the next pose; the caller enforces collisions against the
    // real world and reports them via notify_collision().
    AgentPose next_pose(const GridMap& belief, const std::vector<char>& target_mask,
                        const AgentPose& pose);
    void notify_collision() { force_replan_ = true; }

private:
    bool plan_valid(const GridMap& belief, const std::vector<char>& target_mask,
                    const AgentPose& pose) const;
    void replan(const GridMap& belief, const std::vector<char>& target_mask,
                const AgentPose& pose);

    double success_radius_m_;
    int replan_interval_;
    std::vector<std::pair<int, int>> plan_;  // remaining waypoints
    bool plan_to_target_ = false;
    std::vector<char> planned_mask_;
    int steps_since_replan_ = 0;
    bool force_replan_ = true;
};

}  // namespace semfuse
