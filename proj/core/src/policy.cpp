#include "semfuse/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace semfuse {

std::string policy_kind_name(PolicyKind kind) {
    return kind == PolicyKind::ShortestPath ? "shortest_path" : "frontier";
}

PolicyKind policy_kind_from_name(const std::string& name) {
    if (name == "shortest_path") return PolicyKind::ShortestPath;
    if (name == "frontier") return PolicyKind::Frontier;
    throw std::invalid_argument("unknown policy '" + name +
                                "' (valid: shortest_path, frontier)");
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double octile(int x, int y, int gx, int gy) {
    double dx = std::abs(gx - x), dy = std::abs(gy - y);
    return std::max(dx, dy) + (kSqrt2 - 1.0) * std::min(dx, dy);
}

struct Node {
    double f;
    double h;
    int idx;
    bool operator>(const Node& o) const {
        if (f != o.f) return f > o.f;
        if (h != o.h) return h > o.h;
        return idx > o.idx;
    }
};

// Shared A* / uniform-cost core. With use_heuristic = false it expands
// in cost order until the first cell satisfying is_goal.
std::optional<Path> search(const TraversableFn& traversable, int width, int height,
                           double resolution, std::pair<int, int> start,
                           const std::function<bool(int, int)>& is_goal,
                           bool use_heuristic, int gx, int gy) {
    auto in_bounds = [&](int x, int y) { return x >= 0 && x < width && y >= 0 && y < height; };
    if (!in_bounds(start.first, start.second) ||
        !traversable(start.first, start.second))
        return std::nullopt;

    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<double> g(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);
    std::vector<char> closed(n, 0);
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;

    auto idx = [&](int x, int y) { return y * width + x; };
    const int start_idx = idx(start.first, start.second);
    g[start_idx] = 0.0;
    open.push({use_heuristic ? octile(start.first, start.second, gx, gy) : 0.0,
               use_heuristic ? octile(start.first, start.second, gx, gy) : 0.0,
               start_idx});

    int goal_idx = -1;
    while (!open.empty()) {
        Node top = open.top();
        open.pop();
        if (closed[top.idx]) continue;
        closed[top.idx] = 1;
        int x = top.idx % width, y = top.idx / width;
        if (is_goal(x, y)) {
            goal_idx = top.idx;
            break;
        }
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                int nx = x + dx, ny = y + dy;
                if (!in_bounds(nx, ny) || !traversable(nx, ny)) continue;
                if (dx != 0 && dy != 0 &&
                    (!traversable(x + dx, y) || !traversable(x, y + dy)))
                    continue;  // no corner cutting
                double step = (dx != 0 && dy != 0) ? kSqrt2 : 1.0;
                double ng = g[top.idx] + step;
                int ni = idx(nx, ny);
                if (ng < g[ni] - 1e-12) {
                    g[ni] = ng;
                    parent[ni] = top.idx;
                    double h = use_heuristic ? octile(nx, ny, gx, gy) : 0.0;
                    open.push({ng + h, h, ni});
                }
            }
        }
    }
    if (goal_idx < 0) return std::nullopt;

    Path path;
    path.length_m = g[goal_idx] * resolution;
    for (int i = goal_idx; i >= 0; i = parent[i])
        path.waypoints.emplace_back(i % width, i / width);
    std::reverse(path.waypoints.begin(), path.waypoints.end());
    return path;
}

}  // namespace

std::optional<Path> try_shortest_path(const TraversableFn& traversable, int width,
                                      int height, double resolution,
                                      std::pair<int, int> start,
                                      std::pair<int, int> goal) {
    auto is_goal = [&](int x, int y) { return x == goal.first && y == goal.second; };
    return search(traversable, width, height, resolution, start, is_goal, true,
                  goal.first, goal.second);
}

Path shortest_path(const TraversableFn& traversable, int width, int height,
                   double resolution, std::pair<int, int> start,
                   std::pair<int, int> goal) {
    auto p = try_shortest_path(traversable, width, height, resolution, start, goal);
    if (!p) throw std::runtime_error("shortest_path: goal unreachable");
    return *p;
}

std::optional<Path> nearest_goal_path(const TraversableFn& traversable, int width,
                                      int height, double resolution,
                                      std::pair<int, int> start,
                                      const std::function<bool(int, int)>& is_goal) {
    return search(traversable, width, height, resolution, start, is_goal, false, 0, 0);
}

ShortestPathPolicy::ShortestPathPolicy(const Scene& scene, const Path& path,
                                       double aim_x, double aim_y)
    : aim_x_(aim_x), aim_y_(aim_y) {
    if (path.waypoints.empty())
        throw std::invalid_argument("ShortestPathPolicy: empty path");
    points_.reserve(path.waypoints.size());
    for (auto [cx, cy] : path.waypoints)
        points_.emplace_back(scene.cell_cx(cx), scene.cell_cy(cy));
    cumulative_.resize(points_.size(), 0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
        double dx = points_[i].first - points_[i - 1].first;
        double dy = points_[i].second - points_[i - 1].second;
        cumulative_[i] = cumulative_[i - 1] + std::hypot(dx, dy);
    }
    total_length_ = cumulative_.back();
    arrival_step_ = static_cast<int>(std::ceil(total_length_ / kMaxStepDistance));
}

AgentPose ShortestPathPolicy::pose_at_step(int step) const {
    double arc = std::min(static_cast<double>(step) * kMaxStepDistance, total_length_);
    // Segment containing the arc position.
    std::size_t seg = 1;
    while (seg < cumulative_.size() && cumulative_[seg] < arc) ++seg;

    AgentPose pose;
    if (points_.size() == 1 || arc >= total_length_) {
        pose.x = points_.back().first;
        pose.y = points_.back().second;
        pose.theta = std::atan2(aim_y_ - pose.y, aim_x_ - pose.x);
        return pose;
    }
    double seg_len = cumulative_[seg] - cumulative_[seg - 1];
    double t = seg_len > 0.0 ? (arc - cumulative_[seg - 1]) / seg_len : 0.0;
    double dx = points_[seg].first - points_[seg - 1].first;
    double dy = points_[seg].second - points_[seg - 1].second;
    pose.x = points_[seg - 1].first + t * dx;
    pose.y = points_[seg - 1].second + t * dy;
    pose.theta = std::atan2(dy, dx);
    return pose;
}

namespace {

bool believed_traversable(const GridMap& belief, int x, int y) {
    // Unknown is optimistically free; believed-occupied blocks.
    return !(belief.observed(x, y) && belief.cell(x, y).occupancy);
}

bool is_frontier(const GridMap& belief, int x, int y) {
    if (!belief.observed(x, y) || belief.cell(x, y).occupancy) return false;
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            int nx = x + dx, ny = y + dy;
            if (belief.in_bounds(nx, ny) && !belief.observed(nx, ny)) return true;
        }
    }
    return false;
}

bool any_target_rendered(const std::vector<char>& target_mask) {
    for (char v : target_mask)
        if (v) return true;
    return false;
}

}  // namespace

bool FrontierPolicy::plan_valid(const GridMap& belief,
                                const std::vector<char>& target_mask,
                                const AgentPose& pose) const {
    (void)pose;
    if (force_replan_ || plan_.empty()) return false;
    if (steps_since_replan_ >= replan_interval_) return false;
    if (plan_to_target_ && target_mask != planned_mask_) return false;
    // A frontier plan goes stale the moment a target appears on the map.
    if (!plan_to_target_ && any_target_rendered(target_mask)) return false;
    for (auto [x, y] : plan_) {
        if (!believed_traversable(belief, x, y)) return false;
    }
    return true;
}

void FrontierPolicy::replan(const GridMap& belief, const std::vector<char>& target_mask,
                            const AgentPose& pose) {
    plan_.clear();
    steps_since_replan_ = 0;
    force_replan_ = false;
    planned_mask_ = target_mask;

    auto [ax, ay] = belief.world_to_cell(pose.x, pose.y);
    auto traversable = [&belief](int x, int y) {
        return believed_traversable(belief, x, y);
    };

    bool have_target = any_target_rendered(target_mask);

    std::optional<Path> path;
    if (have_target) {
        // Nearest traversable cell within the success radius of any
        // rendered target cell.
        const double r2 = success_radius_m_ * success_radius_m_;
        auto is_goal = [&](int x, int y) {
            double cxw = belief.cell_center_x(x), cyw = belief.cell_center_y(y);
            int span = static_cast<int>(std::ceil(success_radius_m_ / belief.resolution())) + 1;
            for (int dy = -span; dy <= span; ++dy) {
                for (int dx = -span; dx <= span; ++dx) {
                    int tx = x + dx, ty = y + dy;
                    if (!belief.in_bounds(tx, ty)) continue;
                    if (!target_mask[static_cast<std::size_t>(belief.index(tx, ty))])
                        continue;
                    double ddx = belief.cell_center_x(tx) - cxw;
                    double ddy = belief.cell_center_y(ty) - cyw;
                    if (ddx * ddx + ddy * ddy <= r2) return true;
                }
            }
            return false;
        };
        path = nearest_goal_path(traversable, belief.width(), belief.height(),
                                 belief.resolution(), {ax, ay}, is_goal);
        plan_to_target_ = path.has_value();
    }
    if (!path) {
        auto is_goal = [&](int x, int y) { return is_frontier(belief, x, y); };
        path = nearest_goal_path(traversable, belief.width(), belief.height(),
                                 belief.resolution(), {ax, ay}, is_goal);
        plan_to_target_ = false;
    }
    if (path) {
        plan_.assign(path->waypoints.begin(), path->waypoints.end());
        // Drop the agent's own cell.
        if (!plan_.empty() && plan_.front() == std::make_pair(ax, ay))
            plan_.erase(plan_.begin());
    }
}

AgentPose FrontierPolicy::next_pose(const GridMap& belief,
                                    const std::vector<char>& target_mask,
                                    const AgentPose& pose) {
    if (!plan_valid(belief, target_mask, pose)) replan(belief, target_mask, pose);
    steps_since_replan_++;

    if (plan_.empty()) {
        // Nothing to walk toward: scan in place. This resolves frontiers
        // whose unknown side is outside the current field of view (and
        // gathers more views when standing next to a gated target).
        AgentPose next = pose;
        next.theta = std::remainder(pose.theta + M_PI / 4.0, 2.0 * M_PI);
        force_replan_ = true;
        return next;
    }

    auto [wx, wy] = plan_.front();
    double tx = belief.cell_center_x(wx), ty = belief.cell_center_y(wy);
    double dx = tx - pose.x, dy = ty - pose.y;
    double dist = std::hypot(dx, dy);

    AgentPose next = pose;
    if (dist < 1e-9) {
        plan_.erase(plan_.begin());
        return next_pose(belief, target_mask, next);
    }
    double step = std::min(kMaxStepDistance, dist);
    next.x = pose.x + dx / dist * step;
    next.y = pose.y + dy / dist * step;
    next.theta = std::atan2(dy, dx);
    if (step >= dist - 1e-9) plan_.erase(plan_.begin());
    return next;
}

}  // namespace semfuse
