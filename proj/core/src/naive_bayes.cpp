#include "semfuse/naive_bayes.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace semfuse {

void GaussianNB::fit(const std::vector<std::vector<double>>& features,
                     const std::vector<int>& labels) {
    if (features.empty() || features.size() != labels.size())
        throw std::invalid_argument("GaussianNB::fit: empty or mismatched training set");
    const std::size_t d = features[0].size();

    std::size_t counts[2] = {0, 0};
    for (int cls = 0; cls < 2; ++cls) {
        mean_[cls].assign(d, 0.0);
        var_[cls].assign(d, 0.0);
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw std::invalid_argument("GaussianNB::fit: labels must be 0 or 1");
        if (features[i].size() != d)
            throw std::invalid_argument("GaussianNB::fit: inconsistent feature size");
        counts[labels[i]]++;
        for (std::size_t j = 0; j < d; ++j) mean_[labels[i]][j] += features[i][j];
    }
    for (int cls = 0; cls < 2; ++cls) {
        if (counts[cls] == 0) continue;
        for (double& m : mean_[cls]) m /= static_cast<double>(counts[cls]);
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        int cls = labels[i];
        for (std::size_t j = 0; j < d; ++j) {
            double diff = features[i][j] - mean_[cls][j];
            var_[cls][j] += diff * diff;
        }
    }
    for (int cls = 0; cls < 2; ++cls) {
        for (std::size_t j = 0; j < d; ++j) {
            var_[cls][j] = counts[cls] > 0
                               ? std::max(var_[cls][j] / static_cast<double>(counts[cls]),
                                          kNbVarianceFloor)
                               : kNbVarianceFloor;
        }
        prior_[cls] = static_cast<double>(counts[cls]) / static_cast<double>(features.size());
    }
}

double GaussianNB::log_posterior_ratio(const std::vector<double>& x) const {
    if (!trained()) throw std::logic_error("GaussianNB: not trained");
    if (x.size() != mean_[0].size())
        throw std::invalid_argument("GaussianNB: feature size mismatch");
    double score[2];
    for (int cls = 0; cls < 2; ++cls) {
        // A never-seen class keeps probability zero.
        score[cls] = prior_[cls] > 0.0 ? std::log(prior_[cls]) : -1e300;
        for (std::size_t j = 0; j < x.size(); ++j) {
            double diff = x[j] - mean_[cls][j];
            score[cls] -= 0.5 * (std::log(2.0 * M_PI * var_[cls][j]) +
                                 diff * diff / var_[cls][j]);
        }
    }
    return score[1] - score[0];
}

void GaussianNB::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("GaussianNB::save: cannot open " + path);
    out.precision(17);
    out << "semfuse-nb 1\n";
    out << "features " << mean_[0].size() << "\n";
    out << "priors " << prior_[0] << " " << prior_[1] << "\n";
    for (int cls = 0; cls < 2; ++cls) {
        out << "mean " << cls;
        for (double v : mean_[cls]) out << " " << v;
        out << "\nvar " << cls;
        for (double v : var_[cls]) out << " " << v;
        out << "\n";
    }
    if (!out) throw std::runtime_error("GaussianNB::save: write failed for " + path);
}

GaussianNB GaussianNB::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("GaussianNB::load: cannot open " + path);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "semfuse-nb" || version != 1)
        throw std::runtime_error("GaussianNB::load: bad header in " + path);
    std::size_t d = 0;
    in >> tag >> d;
    GaussianNB nb;
    in >> tag >> nb.prior_[0] >> nb.prior_[1];
    for (int k = 0; k < 2; ++k) {
        int cls = 0;
        in >> tag >> cls;
        nb.mean_[cls].resize(d);
        for (double& v : nb.mean_[cls]) in >> v;
        in >> tag >> cls;
        nb.var_[cls].resize(d);
        for (double& v : nb.var_[cls]) in >> v;
    }
    if (!in) throw std::runtime_error("GaussianNB::load: truncated file " + path);
    return nb;
}

}  // namespace semfuse
