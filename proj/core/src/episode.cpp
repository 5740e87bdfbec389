#include "semfuse/episode.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>

#include "semfuse/rng.hpp"

namespace semfuse {

namespace {

std::vector<std::pair<int, int>> target_class_cells(const Scene& scene,
                                                    int target_class) {
    std::vector<std::pair<int, int>> cells;
    for (const auto& t : scene.targets) {
        if (t.class_id != target_class) continue;
        for (int y = t.box.y0; y <= t.box.y1; ++y)
            for (int x = t.box.x0; x <= t.box.x1; ++x)
                if (scene.class_at(x, y) == target_class) cells.emplace_back(x, y);
    }
    return cells;
}

// Mirrors the raycast: marching from one cell center toward the other,
// the destination must be the first occupied cell encountered.
bool cell_line_of_sight(const Scene& scene, int fx, int fy, int tx, int ty) {
    double sx = scene.cell_cx(fx), sy = scene.cell_cy(fy);
    double ex = scene.cell_cx(tx), ey = scene.cell_cy(ty);
    double len = std::hypot(ex - sx, ey - sy);
    if (len < 1e-12) return true;
    double step = scene.resolution / 2.0;
    for (double d = 0.0; d <= len + step; d += step) {
        double t = std::min(d / len, 1.0);
        int cx = static_cast<int>(std::floor((sx + (ex - sx) * t) / scene.resolution));
        int cy = static_cast<int>(std::floor((sy + (ey - sy) * t) / scene.resolution));
        if (!scene.in_bounds(cx, cy)) return false;
        if (cx == tx && cy == ty) return true;
        if (scene.occupied(cx, cy)) return false;
    }
    return false;
}

}  // namespace

std::optional<EpisodePlan> plan_ground_truth_path(const Scene& scene, int target_class,
                                                  const AgentPose& start,
                                                  double success_radius_m) {
    auto targets = target_class_cells(scene, target_class);
    if (targets.empty()) return std::nullopt;

    // Goal cells need a target cell both within the success radius and in
    // line of sight, so the camera can actually view the object on arrival.
    const double r2 = success_radius_m * success_radius_m;
    auto visible_target = [&](int x, int y) -> std::optional<std::pair<int, int>> {
        double cx = scene.cell_cx(x), cy = scene.cell_cy(y);
        double best = std::numeric_limits<double>::infinity();
        std::optional<std::pair<int, int>> found;
        for (auto [tx, ty] : targets) {
            double dx = scene.cell_cx(tx) - cx, dy = scene.cell_cy(ty) - cy;
            double d2 = dx * dx + dy * dy;
            if (d2 > r2 || d2 >= best) continue;
            if (cell_line_of_sight(scene, x, y, tx, ty)) {
                best = d2;
                found = {tx, ty};
            }
        }
        return found;
    };
    auto near_target = [&](int x, int y) { return visible_target(x, y).has_value(); };
    auto traversable = [&scene](int x, int y) { return !scene.occupied(x, y); };

    int sx = static_cast<int>(start.x / scene.resolution);
    int sy = static_cast<int>(start.y / scene.resolution);
    auto path = nearest_goal_path(traversable, scene.width, scene.height,
                                  scene.resolution, {sx, sy}, near_target);
    if (!path) return std::nullopt;

    EpisodePlan plan;
    plan.path = std::move(*path);
    auto [gx, gy] = plan.path.waypoints.back();
    auto aim = visible_target(gx, gy);
    plan.aim_x = scene.cell_cx(aim->first);
    plan.aim_y = scene.cell_cy(aim->second);
    return plan;
}

int count_connected_components(const std::vector<char>& mask, int width, int height,
                               int dilation_cells) {
    std::vector<char> dilated(mask.size(), 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (!mask[static_cast<std::size_t>(y) * width + x]) continue;
            for (int dy = -dilation_cells; dy <= dilation_cells; ++dy) {
                for (int dx = -dilation_cells; dx <= dilation_cells; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
                    dilated[static_cast<std::size_t>(ny) * width + nx] = 1;
                }
            }
        }
    }
    int components = 0;
    std::vector<char> seen(mask.size(), 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * width + x;
            if (!dilated[i] || seen[i]) continue;
            components++;
            std::deque<std::pair<int, int>> queue{{x, y}};
            seen[i] = 1;
            while (!queue.empty()) {
                auto [qx, qy] = queue.front();
                queue.pop_front();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int nx = qx + dx, ny = qy + dy;
                        if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
                        std::size_t ni = static_cast<std::size_t>(ny) * width + nx;
                        if (dilated[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            queue.emplace_back(nx, ny);
                        }
                    }
                }
            }
        }
    }
    return components;
}

int count_missing_boxes(const GridMap& map, int target_class,
                        const std::vector<CellBox>& boxes_seen) {
    int missing = 0;
    for (const auto& box : boxes_seen) {
        bool shown = false;
        for (int y = box.y0; y <= box.y1 && !shown; ++y)
            for (int x = box.x0; x <= box.x1; ++x)
                if (map.rendered_class(x, y) == target_class) {
                    shown = true;
                    break;
                }
        if (!shown) missing++;
    }
    return missing;
}

std::uint64_t hash_observation(const Observation& obs) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    auto mix_double = [&](double d) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(d));
        std::memcpy(&bits, &d, sizeof(bits));
        mix(bits);
    };
    for (const auto& hit : obs.hits) {
        mix(static_cast<std::uint64_t>(hit.cx) << 32 | static_cast<unsigned>(hit.cy));
        mix_double(hit.distance_m);
        mix(static_cast<std::uint64_t>(hit.true_class));
        for (double l : hit.logits) mix_double(l);
    }
    return h;
}

EpisodeResult run_episode(const EpisodeSpec& spec, const EpisodeConfig& cfg,
                          const StepCallback& on_step, GridMap* final_map) {
    const Scene& scene = spec.scene;
    EpisodeResult result;
    result.episode_id = spec.episode_id;

    auto plan = plan_ground_truth_path(scene, spec.target_class, spec.start,
                                       cfg.success_radius_m);
    if (!plan) return result;  // unsolvable: excluded with valid = false
    result.valid = true;
    result.shortest_length_m = plan->path.length_m;

    GridMap map(scene.width, scene.height, scene.resolution, scene.num_classes);
    auto strategy = make_strategy(cfg.strategy, spec.target_class,
                                  cfg.success_radius_m, cfg.stubborn_nb);
    const bool gt_camera = cfg.strategy.kind == StrategyKind::GroundTruth;
    const double temperature = cfg.strategy.use_calibration ? cfg.temperature : 1.0;

    ShortestPathPolicy sp_policy(scene, plan->path, plan->aim_x, plan->aim_y);
    FrontierPolicy frontier_policy(cfg.success_radius_m);
    const bool shortest = cfg.policy == PolicyKind::ShortestPath;

    // Ground-truth bookkeeping for the detection metrics.
    std::vector<CellBox> target_boxes;
    for (const auto& t : scene.targets)
        if (t.class_id == spec.target_class) target_boxes.push_back(t.box);
    std::vector<char> box_seen(target_boxes.size(), 0);
    std::vector<char> inside_box(static_cast<std::size_t>(scene.width) * scene.height, 0);
    for (const auto& box : target_boxes)
        for (int y = box.y0; y <= box.y1; ++y)
            for (int x = box.x0; x <= box.x1; ++x) inside_box[scene.index(x, y)] = 1;
    auto true_targets = target_class_cells(scene, spec.target_class);

    std::vector<char> fp_union(inside_box.size(), 0);
    AgentPose pose = shortest ? sp_policy.pose_at_step(0) : spec.start;
    double traveled = 0.0;
    bool decided = false;
    bool truth_at_found = false;
    int step = 0;

    for (; step < cfg.max_steps; ++step) {
        Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(step)));
        Observation obs =
            make_observation(scene, pose, cfg.sensor, cfg.noise, rng, gt_camera);
        result.obs_stream_hash =
            mix_seed(result.obs_stream_hash, hash_observation(obs));

        auto hits = project_observation(obs, temperature);
        strategy->integrate(map, hits, pose);
        if (on_step) on_step(step, map, *strategy, pose);

        for (const auto& h : obs.hits) {
            if (h.true_class != spec.target_class) continue;
            for (std::size_t b = 0; b < target_boxes.size(); ++b)
                if (target_boxes[b].contains(h.cx, h.cy)) box_seen[b] = 1;
        }

        if (!decided) {
            FoundDecision decision = strategy->decide_found(map, pose);
            if (decision.found) {
                decided = true;
                result.found_step = step;
                result.found_cx = decision.cx;
                result.found_cy = decision.cy;
                result.found_reason = decision.reason;
                result.path_length_m = traveled;
                truth_at_found = false;
                const double r2 = cfg.success_radius_m * cfg.success_radius_m;
                for (auto [tx, ty] : true_targets) {
                    double dx = scene.cell_cx(tx) - pose.x;
                    double dy = scene.cell_cy(ty) - pose.y;
                    if (dx * dx + dy * dy <= r2) {
                        truth_at_found = true;
                        break;
                    }
                }
            }
        }

        // Detection-level errors, over the full trajectory.
        for (int cy = 0; cy < scene.height; ++cy) {
            for (int cx = 0; cx < scene.width; ++cx) {
                int i = scene.index(cx, cy);
                if (map.rendered_class(cx, cy) == spec.target_class && !inside_box[i])
                    fp_union[i] = 1;
            }
        }
        std::vector<CellBox> boxes_visible;
        for (std::size_t b = 0; b < target_boxes.size(); ++b)
            if (box_seen[b]) boxes_visible.push_back(target_boxes[b]);
        result.det_fn_count +=
            count_missing_boxes(map, spec.target_class, boxes_visible);

        if (shortest) {
            if (decided && step >= sp_policy.arrival_step()) break;
            AgentPose next = sp_policy.pose_at_step(step + 1);
            traveled += std::hypot(next.x - pose.x, next.y - pose.y);
            pose = next;
        } else {
            if (decided) break;
            AgentPose next =
                frontier_policy.next_pose(map, map.rendered_mask(spec.target_class), pose);
            int ncx = static_cast<int>(next.x / scene.resolution);
            int ncy = static_cast<int>(next.y / scene.resolution);
            if (!scene.in_bounds(ncx, ncy) || scene.occupied(ncx, ncy)) {
                frontier_policy.notify_collision();  // blocked, keep position
                next.x = pose.x;
                next.y = pose.y;
            }
            traveled += std::hypot(next.x - pose.x, next.y - pose.y);
            pose = next;
        }
    }

    result.steps_used = std::min(step + 1, cfg.max_steps);
    if (decided) {
        result.success = truth_at_found;
        result.found_fp = !truth_at_found;
    } else {
        result.found_fn = true;
    }
    // The shortest-path protocol walks the full trajectory regardless of
    // the decision, so its recorded length is the whole walk; the frontier
    // policy stops at its decision.
    if (shortest || !decided) result.path_length_m = traveled;
    result.det_fp_count =
        count_connected_components(fp_union, scene.width, scene.height,
                                   cfg.fp_dilation_cells);
    if (final_map) *final_map = map;
    return result;
}

}  // namespace semfuse
