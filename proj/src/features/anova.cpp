#include "metacomment/features/anova.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "metacomment/util/error.hpp"

namespace metacomment::features {

std::vector<double> anova_f_scores(const Matrix& x, std::span<const int> y) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (y.size() != n) throw InvalidArgument("anova_f_scores: one label per row");
    std::size_t n1 = 0;
    for (int v : y) {
        if (v != 0 && v != 1) throw InvalidArgument("anova_f_scores: labels must be 0 or 1");
        n1 += static_cast<std::size_t>(v);
    }
    const std::size_t n0 = n - n1;
    if (n0 == 0 || n1 == 0) throw InvalidArgument("anova_f_scores: both classes must be present");

    std::vector<double> scores(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        double sum0 = 0, sum1 = 0;
        for (std::size_t r = 0; r < n; ++r) (y[r] ? sum1 : sum0) += x(static_cast<Eigen::Index>(r), c);
        const double mean0 = sum0 / static_cast<double>(n0);
        const double mean1 = sum1 / static_cast<double>(n1);
        const double grand = (sum0 + sum1) / static_cast<double>(n);
        double within = 0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = x(static_cast<Eigen::Index>(r), c) - (y[r] ? mean1 : mean0);
            within += d * d;
        }
        const double between = static_cast<double>(n0) * (mean0 - grand) * (mean0 - grand) +
                               static_cast<double>(n1) * (mean1 - grand) * (mean1 - grand);
        double f = 0.0;
        if (within == 0.0) {
            f = mean0 != mean1 ? std::numeric_limits<double>::infinity() : 0.0;
        } else if (n > 2) {
            f = between / (within / static_cast<double>(n - 2));
        }
        scores[static_cast<std::size_t>(c)] = f;
    }
    return scores;
}

std::vector<std::pair<std::string, double>> anova_f_scores(const FeatureMatrix& m, std::span<const int> y) {
    const auto scores = anova_f_scores(m.to_dense(), y);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out.emplace_back(m.registry->name(i), scores[i]);
    return out;
}

std::vector<std::size_t> select_k_best(std::span<const double> scores, std::optional<std::size_t> k) {
    if (k && *k > scores.size()) {
        throw InvalidArgument("select_k_best: k=" + std::to_string(*k) + " exceeds the " +
                              std::to_string(scores.size()) + " available features");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    if (k) order.resize(*k);
    return order;
}

std::vector<std::string> select_k_best(const std::vector<std::pair<std::string, double>>& scores,
                                       std::optional<std::size_t> k) {
    std::vector<double> values;
    values.reserve(scores.size());
    for (const auto& s : scores) values.push_back(s.second);
    std::vector<std::string> out;
    for (auto i : select_k_best(values, k)) out.push_back(scores[i].first);
    return out;
}

}  // namespace metacomment::features
