#pragma once

#include <span>

#include "metacomment/classifiers.hpp"

namespace metacomment::classifiers {

Forest train_forest(const Matrix& x, std::span<const int> y, const ForestHyperparams& p);
Boost train_boost(const Matrix& x, std::span<const int> y, const AdaBoostHyperparams& p);

double forest_decision(const Forest& f, std::span<const double> x);
double boost_decision(const Boost& b, std::span<const double> x);
double knn_decision(const KnnModel& m, std::span<const double> x);

}  // namespace metacomment::classifiers
