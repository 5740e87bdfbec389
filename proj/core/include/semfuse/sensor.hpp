#pragma once

#include <cmath>
#include <vector>

#include "semfuse/calibration.hpp"
#include "semfuse/rng.hpp"
#include "semfuse/scene.hpp"

namespace semfuse {

struct SensorParams {
    double fov_rad = M_PI / 2.0;  // 90 degrees
    int n_rays = 61;
    double max_range_m = 5.0;
};

struct RayHit {
    int cx = 0;
    int cy = 0;
    double distance_m = 0.0;
};

// Cells crossed by n_rays evenly spaced over the field of view, marched at
// half-cell increments. Each ray stops at the first occupied cell
// (inclusive) or at max range; duplicates keep the smallest distance.
std::vector<RayHit> raycast_fov(const Scene& scene, const AgentPose& pose,
                                double fov_rad, int n_rays, double max_range_m);

// Distance-dependent miscalibrated perception.
//
// Each observation draws a confidence c and puts mass c on an observed
// class that equals the true class with probability exactly c (errors
// follow the confusion row), the remainder spread uniformly. The mean of
// c is true_confidence at d = 0 and shrinks with the error ramp
// eps(d) = min(1, base_error + distance_error_slope * d / max_range);
// confidence_spread widens c into a mean-preserving uniform interval, so
// low-confidence draws account for most errors while P(correct | c) = c
// keeps the stream calibrated at every distance. Emitted logits are
// overconfidence_factor * ln(q): temperature scaling with the fitted
// t = overconfidence_factor recovers q exactly. A spread of zero emits
// the fixed-confidence vector deterministically.
struct NoiseModel {
    double base_error = 0.1;
    double distance_error_slope = 0.3;
    double true_confidence = 0.9;
    double confidence_spread = 1.0;  // 0: deterministic confidence
    double overconfidence_factor = 3.0;
    double max_range_m = 5.0;
    // Row-stochastic confusion matrix (num_classes^2, row-major). Empty
    // means uniform off-diagonal confusion.
    std::vector<double> confusion;

    double error_probability(double distance_m) const;
    double mean_confidence(double distance_m) const;
};

Logits generate_logits(int true_class, double distance_m, int num_classes,
                       const NoiseModel& noise, Rng& rng);

// Near-one-hot logits for the ground-truth semantic camera.
Logits ground_truth_logits(int true_class, int num_classes);

struct ObservedCell {
    int cx = 0;
    int cy = 0;
    double distance_m = 0.0;
    double height_m = 0.0;  // top-most surface height at the cell
    int true_class = 0;
    Logits logits;
};

struct Observation {
    AgentPose pose;
    std::vector<ObservedCell> hits;
};

// One posed frame: raycast then attach per-cell logits, either noisy or
// from the ground-truth camera.
Observation make_observation(const Scene& scene, const AgentPose& pose,
                             const SensorParams& sensor, const NoiseModel& noise,
                             Rng& rng, bool ground_truth = false);

// Labeled stream for temperature fitting / calibration evaluation. Draws
// classes uniformly and distances uniformly in [0, max_range]; the noise
// model's construction keeps the stream calibrated, so the fitted
// temperature should recover the overconfidence factor.
void make_calibration_stream(int num_classes, int n_samples, const NoiseModel& noise,
                             Rng& rng, std::vector<Logits>& logits_out,
                             std::vector<int>& labels_out);

}  // namespace semfuse
