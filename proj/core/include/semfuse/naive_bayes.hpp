#pragma once

#include <string>
#include <vector>

namespace semfuse {

// Two-class Gaussian naive Bayes over real-valued features, used for the
// found-correct vs found-wrong decision. Variances are floored at 1e-6.
class GaussianNB {
public:
    void fit(const std::vector<std::vector<double>>& features,
             const std::vector<int>& labels);

    // log P(label=1 | x) - log P(label=0 | x)
    double log_posterior_ratio(const std::vector<double>& x) const;

    bool predict(const std::vector<double>& x) const {
        return log_posterior_ratio(x) > 0.0;
    }

    bool trained() const { return !mean_[0].empty() || !mean_[1].empty(); }
    std::size_t num_features() const { return mean_[0].size(); }
    double prior(int cls) const { return prior_[cls]; }
    const std::vector<double>& mean(int cls) const { return mean_[cls]; }
    const std::vector<double>& variance(int cls) const { return var_[cls]; }

    void save(const std::string& path) const;
    static GaussianNB load(const std::string& path);

private:
    double prior_[2] = {0.5, 0.5};
    std::vector<double> mean_[2];
    std::vector<double> var_[2];
};

inline constexpr double kNbVarianceFloor = 1e-6;

}  // namespace semfuse
