#include "semfuse/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace semfuse {

double spl(const std::vector<EpisodeResult>& results) {
    double total = 0.0;
    int n = 0;
    for (const auto& r : results) {
        if (!r.valid) continue;
        n++;
        if (!r.success) continue;
        if (r.shortest_length_m <= 0.0) {
            total += 1.0;  // started at the goal
        } else {
            total += r.shortest_length_m /
                     std::max(r.path_length_m, r.shortest_length_m);
        }
    }
    if (n == 0) throw std::invalid_argument("spl: no valid episodes");
    return total / static_cast<double>(n);
}

MetricsRow aggregate_metrics(const std::string& strategy_label,
                             const std::string& policy_label, bool calibrated,
                             bool uncertainty_found,
                             const std::vector<EpisodeResult>& results,
                             int excluded_episodes) {
    int n = 0, success = 0, fp = 0, fn = 0;
    double det_fp = 0.0, det_fn = 0.0;
    for (const auto& r : results) {
        if (!r.valid) {
            excluded_episodes++;
            continue;
        }
        n++;
        success += r.success;
        fp += r.found_fp;
        fn += r.found_fn;
        det_fp += r.det_fp_count;
        det_fn += r.steps_used > 0
                      ? static_cast<double>(r.det_fn_count) / r.steps_used
                      : 0.0;
    }
    if (n == 0) throw std::invalid_argument("aggregate_metrics: no valid episodes");

    MetricsRow row;
    row.strategy = strategy_label;
    row.policy = policy_label;
    row.calibrated = calibrated;
    row.uncertainty_found = uncertainty_found;
    row.sr = 100.0 * success / n;
    row.fpr = 100.0 * fp / n;
    row.fnr = 100.0 * fn / n;
    row.det_fp = det_fp / n;
    row.det_fn = det_fn / n;
    row.spl = 100.0 * spl(results);
    row.valid_episodes = n;
    row.excluded_episodes = excluded_episodes;
    return row;
}

namespace {

std::string fixed1(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << v;
    return os.str();
}

std::string fixed2(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

}  // namespace

std::string format_metrics_table(const std::vector<MetricsRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(28) << "strategy" << std::setw(15) << "policy"
       << std::setw(5) << "cal" << std::setw(5) << "unc" << std::right
       << std::setw(7) << "SR" << std::setw(7) << "FPR" << std::setw(7) << "FNR"
       << std::setw(7) << "#FP" << std::setw(7) << "#FN" << std::setw(7) << "SPL"
       << std::setw(6) << "N" << std::setw(6) << "excl" << "\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(28) << r.strategy << std::setw(15) << r.policy
           << std::setw(5) << (r.calibrated ? "yes" : "no") << std::setw(5)
           << (r.uncertainty_found ? "yes" : "no") << std::right << std::setw(7)
           << fixed1(r.sr) << std::setw(7) << fixed1(r.fpr) << std::setw(7)
           << fixed1(r.fnr) << std::setw(7) << fixed2(r.det_fp) << std::setw(7)
           << fixed2(r.det_fn) << std::setw(7) << fixed1(r.spl) << std::setw(6)
           << r.valid_episodes << std::setw(6) << r.excluded_episodes << "\n";
    }
    return os.str();
}

std::string format_metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream os;
    os << "strategy,policy,calibrated,uncertainty_found,sr,fpr,fnr,det_fp,det_fn,"
          "spl,valid_episodes,excluded_episodes\n";
    for (const auto& r : rows) {
        os << r.strategy << "," << r.policy << "," << (r.calibrated ? 1 : 0) << ","
           << (r.uncertainty_found ? 1 : 0) << "," << fixed1(r.sr) << ","
           << fixed1(r.fpr) << "," << fixed1(r.fnr) << "," << fixed2(r.det_fp) << ","
           << fixed2(r.det_fn) << "," << fixed1(r.spl) << "," << r.valid_episodes
           << "," << r.excluded_episodes << "\n";
    }
    return os.str();
}

double sign_test_p_value(int greater, int less) {
    const int n = greater + less;
    if (n == 0) return 1.0;
    // P(X >= greater) for X ~ Binomial(n, 1/2), in log space for large n.
    double p = 0.0;
    for (int k = greater; k <= n; ++k) {
        double log_c = std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
        p += std::exp(log_c - n * std::log(2.0));
    }
    return std::min(p, 1.0);
}

}  // namespace semfuse
