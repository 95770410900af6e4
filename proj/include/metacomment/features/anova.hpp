#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metacomment/features/registry.hpp"
#include "metacomment/util/matrix.hpp"

namespace metacomment::features {

// One-way ANOVA F per column for a binary target (k = 2, df = (1, n - 2)).
// Zero within-class variance gives +inf when the class means differ, 0 otherwise.
std::vector<double> anova_f_scores(const Matrix& x, std::span<const int> y);

std::vector<std::pair<std::string, double>> anova_f_scores(const FeatureMatrix& m, std::span<const int> y);

// Column indices of the k best scores (nullopt = all), by descending F with
// ties in column order.
std::vector<std::size_t> select_k_best(std::span<const double> scores, std::optional<std::size_t> k);
std::vector<std::string> select_k_best(const std::vector<std::pair<std::string, double>>& scores,
                                       std::optional<std::size_t> k);

}  // namespace metacomment::features
