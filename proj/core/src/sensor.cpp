#include "semfuse/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace semfuse {

std::vector<RayHit> raycast_fov(const Scene& scene, const AgentPose& pose,
                                double fov_rad, int n_rays, double max_range_m) {
    if (n_rays < 1) throw std::invalid_argument("raycast_fov: need at least one ray");
    std::unordered_map<int, RayHit> best;
    const double step = scene.resolution / 2.0;

    for (int r = 0; r < n_rays; ++r) {
        double angle = pose.theta;
        if (n_rays > 1)
            angle += -fov_rad / 2.0 + fov_rad * static_cast<double>(r) / (n_rays - 1);
        const double dx = std::cos(angle), dy = std::sin(angle);
        for (double d = 0.0; d <= max_range_m; d += step) {
            int cx = static_cast<int>(std::floor((pose.x + d * dx) / scene.resolution));
            int cy = static_cast<int>(std::floor((pose.y + d * dy) / scene.resolution));
            if (!scene.in_bounds(cx, cy)) break;
            int key = scene.index(cx, cy);
            auto it = best.find(key);
            if (it == best.end()) {
                best.emplace(key, RayHit{cx, cy, d});
            } else if (d < it->second.distance_m) {
                it->second.distance_m = d;
            }
            if (scene.occupied(cx, cy)) break;  // ray stops here, cell included
        }
    }

    std::vector<RayHit> hits;
    hits.reserve(best.size());
    for (const auto& [key, hit] : best) hits.push_back(hit);
    // Hash order is not deterministic across platforms; fix the order.
    std::sort(hits.begin(), hits.end(), [&](const RayHit& a, const RayHit& b) {
        return scene.index(a.cx, a.cy) < scene.index(b.cx, b.cy);
    });
    return hits;
}

double NoiseModel::error_probability(double distance_m) const {
    double eps = base_error + distance_error_slope * distance_m / max_range_m;
    return std::clamp(eps, 0.0, 1.0);
}

double NoiseModel::mean_confidence(double distance_m) const {
    // At d = 0 this is exactly true_confidence; with the default
    // true_confidence = 1 - base_error it equals 1 - eps(d), the true
    // posterior of the observed class.
    double scale = (base_error < 1.0)
                       ? (1.0 - error_probability(distance_m)) / (1.0 - base_error)
                       : 1.0;
    return std::clamp(true_confidence * scale, 1e-6, 1.0 - 1e-9);
}

Logits generate_logits(int true_class, double distance_m, int num_classes,
                       const NoiseModel& noise, Rng& rng) {
    if (true_class < 0 || true_class >= num_classes)
        throw std::invalid_argument("generate_logits: class out of range");
    if (distance_m < 0.0 || distance_m > noise.max_range_m)
        throw std::invalid_argument("generate_logits: distance out of range");

    const double mean_c = noise.mean_confidence(distance_m);
    const double conf_floor = 1.0 / num_classes + 0.02;
    double conf = mean_c;
    double p_correct = 1.0 - noise.error_probability(distance_m);
    if (noise.confidence_spread > 0.0) {
        // Two-point mean-preserving confidence mixture: easy pixels near
        // certainty, hard pixels well below the mean. Correctness follows
        // the drawn confidence exactly, so q stays a true posterior,
        // errors concentrate on the soft draws, and the entropy signal
        // survives only as long as the probabilities stay calibrated.
        double hi = mean_c + noise.confidence_spread * 0.9 * (1.0 - mean_c);
        double lo = std::max(2.0 * mean_c - hi, conf_floor);
        double p_hi = hi > lo ? (mean_c - lo) / (hi - lo) : 1.0;
        conf = rng.bernoulli(p_hi) ? hi : lo;
        conf = std::clamp(conf, conf_floor, 1.0 - 1e-6);
        p_correct = conf;
    } else {
        conf = std::clamp(conf, conf_floor, 1.0 - 1e-6);
    }

    int observed = true_class;
    if (!rng.bernoulli(p_correct) && num_classes > 1) {
        if (noise.confusion.empty()) {
            int pick = static_cast<int>(rng.uniform_index(num_classes - 1));
            observed = pick >= true_class ? pick + 1 : pick;
        } else {
            std::vector<double> row(num_classes);
            for (int c = 0; c < num_classes; ++c)
                row[c] = (c == true_class)
                             ? 0.0
                             : noise.confusion[true_class * num_classes + c];
            observed = static_cast<int>(rng.weighted_index(row));
        }
    }

    const double rest = (1.0 - conf) / (num_classes - 1);
    Logits l(num_classes);
    for (int c = 0; c < num_classes; ++c) {
        double q = (c == observed) ? conf : rest;
        l[c] = noise.overconfidence_factor * std::log(q);
    }
    return l;
}

Logits ground_truth_logits(int true_class, int num_classes) {
    Logits l(num_classes);
    const double rest = kProbFloor;
    const double top = 1.0 - rest * (num_classes - 1);
    for (int c = 0; c < num_classes; ++c) l[c] = std::log(c == true_class ? top : rest);
    return l;
}

Observation make_observation(const Scene& scene, const AgentPose& pose,
                             const SensorParams& sensor, const NoiseModel& noise,
                             Rng& rng, bool ground_truth) {
    Observation obs;
    obs.pose = pose;
    auto hits = raycast_fov(scene, pose, sensor.fov_rad, sensor.n_rays, sensor.max_range_m);
    obs.hits.reserve(hits.size());
    for (const auto& h : hits) {
        ObservedCell cell;
        cell.cx = h.cx;
        cell.cy = h.cy;
        cell.distance_m = h.distance_m;
        cell.height_m = scene.height_at(h.cx, h.cy);
        cell.true_class = scene.class_at(h.cx, h.cy);
        cell.logits = ground_truth
                          ? ground_truth_logits(cell.true_class, scene.num_classes)
                          : generate_logits(cell.true_class, h.distance_m,
                                            scene.num_classes, noise, rng);
        obs.hits.push_back(std::move(cell));
    }
    return obs;
}

void make_calibration_stream(int num_classes, int n_samples, const NoiseModel& noise,
                             Rng& rng, std::vector<Logits>& logits_out,
                             std::vector<int>& labels_out) {
    logits_out.clear();
    labels_out.clear();
    logits_out.reserve(n_samples);
    labels_out.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        int cls = static_cast<int>(rng.uniform_index(num_classes));
        double d = rng.uniform(0.0, noise.max_range_m);
        logits_out.push_back(generate_logits(cls, d, num_classes, noise, rng));
        labels_out.push_back(cls);
    }
}

}  // namespace semfuse
