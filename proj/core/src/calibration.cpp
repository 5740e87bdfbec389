#include "semfuse/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semfuse {

bool is_prob_vector(const ProbVector& p, double tol) {
    if (p.empty()) return false;
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0 + tol)) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

ProbVector softmax(const Logits& l) {
    if (l.empty()) throw std::invalid_argument("softmax: empty logits");
    double mx = l[0];
    for (double v : l) {
        if (!std::isfinite(v)) throw std::invalid_argument("softmax: non-finite logit");
        mx = std::max(mx, v);
    }
    ProbVector p(l.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) {
        p[i] = std::exp(l[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

Logits scale_logits(const Logits& l, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("scale_logits: temperature must be > 0");
    Logits out(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) out[i] = l[i] / t;
    return out;
}

double normalized_entropy(const ProbVector& p) {
    if (p.size() < 2) return 0.0;
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    double u = h / std::log(static_cast<double>(p.size()));
    return std::clamp(u, 0.0, 1.0);
}

std::size_t argmax(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

double mean_nll(const std::vector<Logits>& logits, const std::vector<int>& labels,
                double t) {
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        ProbVector p = softmax(scale_logits(logits[i], t));
        total -= std::log(std::max(p[static_cast<std::size_t>(labels[i])], kProbFloor));
    }
    return total / static_cast<double>(logits.size());
}

double fit_temperature(const std::vector<Logits>& logits, const std::vector<int>& labels) {
    if (logits.empty() || logits.size() != labels.size())
        throw std::invalid_argument("fit_temperature: empty or mismatched dataset");
    const std::size_t c = logits[0].size();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c)
            throw std::invalid_argument("fit_temperature: label out of range");
    }

    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = kTemperatureMin, b = kTemperatureMax;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = mean_nll(logits, labels, x1);
    double f2 = mean_nll(logits, labels, x2);
    while (b - a > kTemperatureTol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = mean_nll(logits, labels, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = mean_nll(logits, labels, x2);
        }
    }
    double t = 0.5 * (a + b);
    // Calibration may never make the NLL worse than the identity scaling.
    if (mean_nll(logits, labels, t) > mean_nll(logits, labels, 1.0)) t = 1.0;
    return t;
}

namespace {

int bin_index(double confidence, int n_bins) {
    int idx = static_cast<int>(std::floor(confidence * n_bins));
    return std::clamp(idx, 0, n_bins - 1);
}

std::vector<CalibrationBin> fill_bins(const std::vector<double>& confidences,
                                      const std::vector<bool>& correct, int n_bins) {
    std::vector<CalibrationBin> bins(static_cast<std::size_t>(n_bins));
    std::vector<double> conf_sum(static_cast<std::size_t>(n_bins), 0.0);
    std::vector<std::size_t> hits(static_cast<std::size_t>(n_bins), 0);
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        int b = bin_index(confidences[i], n_bins);
        bins[b].count++;
        conf_sum[b] += confidences[i];
        if (correct[i]) hits[b]++;
    }
    for (int b = 0; b < n_bins; ++b) {
        if (bins[b].count > 0) {
            bins[b].confidence_mean = conf_sum[b] / static_cast<double>(bins[b].count);
            bins[b].accuracy = static_cast<double>(hits[b]) / static_cast<double>(bins[b].count);
        } else {
            bins[b].confidence_mean = (b + 0.5) / static_cast<double>(n_bins);
        }
    }
    return bins;
}

double ece_from_bins(const std::vector<CalibrationBin>& bins, std::size_t n) {
    double e = 0.0;
    for (const auto& b : bins) {
        if (b.count == 0) continue;
        e += (static_cast<double>(b.count) / static_cast<double>(n)) *
             std::abs(b.accuracy - b.confidence_mean);
    }
    return e;
}

void check_ece_inputs(const std::vector<ProbVector>& preds, const std::vector<int>& labels,
                      int n_bins) {
    if (preds.size() != labels.size())
        throw std::invalid_argument("calibration error: preds/labels length mismatch");
    if (preds.empty()) throw std::invalid_argument("calibration error: empty dataset");
    if (n_bins < 1) throw std::invalid_argument("calibration error: n_bins must be >= 1");
}

}  // namespace

double expected_calibration_error(const std::vector<ProbVector>& preds,
                                  const std::vector<int>& labels, int n_bins) {
    check_ece_inputs(preds, labels, n_bins);
    std::vector<double> conf(preds.size());
    std::vector<bool> correct(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        std::size_t am = argmax(preds[i]);
        conf[i] = preds[i][am];
        correct[i] = (static_cast<int>(am) == labels[i]);
    }
    return ece_from_bins(fill_bins(conf, correct, n_bins), preds.size());
}

double uncertainty_ece(const std::vector<ProbVector>& preds,
                       const std::vector<int>& labels, int n_bins) {
    check_ece_inputs(preds, labels, n_bins);
    std::vector<double> conf(preds.size());
    std::vector<bool> correct(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        conf[i] = 1.0 - normalized_entropy(preds[i]);
        correct[i] = (static_cast<int>(argmax(preds[i])) == labels[i]);
    }
    return ece_from_bins(fill_bins(conf, correct, n_bins), preds.size());
}

CalibrationReport reliability_diagram(const std::vector<ProbVector>& preds,
                                      const std::vector<int>& labels, int n_bins) {
    check_ece_inputs(preds, labels, n_bins);
    CalibrationReport report;
    report.n_bins = n_bins;

    std::vector<double> pconf(preds.size()), uconf(preds.size());
    std::vector<bool> correct(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        std::size_t am = argmax(preds[i]);
        pconf[i] = preds[i][am];
        uconf[i] = 1.0 - normalized_entropy(preds[i]);
        correct[i] = (static_cast<int>(am) == labels[i]);
    }
    report.prob_bins = fill_bins(pconf, correct, n_bins);
    report.unc_bins = fill_bins(uconf, correct, n_bins);
    report.ece = ece_from_bins(report.prob_bins, preds.size());
    report.uece = ece_from_bins(report.unc_bins, preds.size());
    return report;
}

}  // namespace semfuse
