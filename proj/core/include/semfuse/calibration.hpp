#pragma once

#include <cstddef>
#include <vector>

namespace semfuse {

using Logits = std::vector<double>;
using ProbVector = std::vector<double>;

// Temperature search bounds and golden-section tolerance.
inline constexpr double kTemperatureMin = 0.05;
inline constexpr double kTemperatureMax = 20.0;
inline constexpr double kTemperatureTol = 1e-3;

// Floor applied to probabilities before taking logs (NLL, log-odds).
inline constexpr double kProbFloor = 1e-12;

bool is_prob_vector(const ProbVector& p, double tol = 1e-9);

// Numerically stabilized softmax (max subtraction). Throws
// std::invalid_argument on non-finite logits.
ProbVector softmax(const Logits& l);

// Divides every logit by t. Throws std::invalid_argument if t <= 0.
Logits scale_logits(const Logits& l, double t);

// Shannon entropy over natural log, normalized by ln C into [0, 1].
// Zero entries contribute zero.
double normalized_entropy(const ProbVector& p);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(const std::vector<double>& v);

// Mean negative log-likelihood of softmax(l / t) at the true labels.
double mean_nll(const std::vector<Logits>& logits, const std::vector<int>& labels,
                double t);

// Temperature minimizing mean NLL, found by golden-section search over
// [kTemperatureMin, kTemperatureMax]. Deterministic; never returns a
// temperature whose NLL exceeds the uncalibrated (t = 1) one.
double fit_temperature(const std::vector<Logits>& logits, const std::vector<int>& labels);

// Expected calibration error with equal-width bins over max-probability
// confidence. Empty bins contribute nothing.
double expected_calibration_error(const std::vector<ProbVector>& preds,
                                  const std::vector<int>& labels, int n_bins);

// As ECE but confidence is (1 - normalized entropy).
double uncertainty_ece(const std::vector<ProbVector>& preds,
                       const std::vector<int>& labels, int n_bins);

struct CalibrationBin {
    double confidence_mean = 0.0;  // bin midpoint when the bin is empty
    double accuracy = 0.0;
    std::size_t count = 0;
};

struct CalibrationReport {
    double ece = 0.0;
    double uece = 0.0;
    std::vector<CalibrationBin> prob_bins;  // binned by max probability
    std::vector<CalibrationBin> unc_bins;   // binned by 1 - entropy
    int n_bins = 0;
};

CalibrationReport reliability_diagram(const std::vector<ProbVector>& preds,
                                      const std::vector<int>& labels, int n_bins);

}  // namespace semfuse
