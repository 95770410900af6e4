#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "metacomment/features/registry.hpp"
#include "metacomment/util/matrix.hpp"

namespace metacomment::classifiers {

enum class Kind { LinearSvm, DecisionTree, RandomForest, AdaBoost, Knn };

std::string_view kind_name(Kind kind);  // linear_svm, decision_tree, random_forest, adaboost, knn
Kind parse_kind(std::string_view name);

struct SvmHyperparams {
    double C = 1.0;
    // Iteration cap is max_epochs * n pair updates.
    int max_epochs = 1000;
    // Stop when the maximal KKT violation falls below this.
    double tolerance = 1e-6;
    std::uint64_t seed = 0;
};

struct TreeHyperparams {
    int max_depth = 20;
    int min_leaf = 2;
    // Features tried per split; 0 = all.
    int max_features = 0;
    std::uint64_t seed = 0;
};

struct ForestHyperparams {
    int n_trees = 100;
    int max_depth = 20;
    int min_leaf = 2;
    std::uint64_t seed = 0;
};

struct AdaBoostHyperparams {
    int n_estimators = 50;
    double learning_rate = 1.0;
    std::uint64_t seed = 0;
};

struct KnnHyperparams {
    int k = 5;
};

using Hyperparams =
    std::variant<SvmHyperparams, TreeHyperparams, ForestHyperparams, AdaBoostHyperparams, KnnHyperparams>;

// Flat name -> number view, used by configuration files and grid search.
// Seeds are kept out of it (they need all 64 bits).
using ParamMap = std::map<std::string, double>;

Kind kind_of(const Hyperparams& p);
Hyperparams default_hyperparams(Kind kind);
// Starts from the defaults; unknown names and invalid values throw InvalidArgument.
Hyperparams make_hyperparams(Kind kind, const ParamMap& values);
ParamMap to_param_map(const Hyperparams& p);
void validate(const Hyperparams& p);
Hyperparams with_seed(Hyperparams p, std::uint64_t seed);
std::uint64_t seed_of(const Hyperparams& p);

// Zero mean, unit variance per column; constant columns keep scale 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& x);
    Matrix apply(const Matrix& x) const;
};

struct LinearModel {
    std::vector<double> w;
    double b = 0;
    std::vector<double> alpha;
    // Dual objective after every pair update; non-increasing.
    std::vector<double> objective;
    std::size_t iterations = 0;
    bool converged = false;
};

// C * sum hinge + 0.5 |w|^2.
double svm_primal_objective(std::span<const double> w, double b, const Matrix& x, std::span<const int> y, double C);

// Two-coordinate dual solver with an unregularised bias. Labels are 0/1.
LinearModel train_linear_svm(const Matrix& x, std::span<const int> y, const SvmHyperparams& p);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0;  // weighted share of positives
};

struct Tree {
    std::vector<TreeNode> nodes;
    double probability(std::span<const double> x) const;
};

// CART with Gini impurity. `weights` may be empty (all 1).
Tree train_tree(const Matrix& x, std::span<const int> y, std::span<const double> weights, const TreeHyperparams& p);

struct Forest {
    std::vector<Tree> trees;
};

struct Boost {
    std::vector<Tree> stumps;
    std::vector<double> alphas;
};

struct KnnModel {
    Matrix points;
    std::vector<int> labels;
    int k = 5;
};

struct Calibration {
    // p = 1 / (1 + exp(a * f + b)), a <= 0.
    double a = 0;
    double b = 0;
    double operator()(double decision) const;
};

// Platt scaling fitted by Newton's method on smoothed targets.
Calibration fit_platt(std::span<const double> decisions, std::span<const int> y);

using ModelBody = std::variant<LinearModel, Tree, Forest, Boost, KnnModel>;

class TrainedModel {
public:
    TrainedModel() = default;
    TrainedModel(Hyperparams params, std::string registry_version, std::size_t n_features,
                 std::vector<std::size_t> columns, std::optional<Standardizer> standardizer, ModelBody body);

    Kind kind() const { return kind_of(params_); }
    const Hyperparams& params() const { return params_; }
    const std::string& registry_version() const { return registry_version_; }
    std::size_t n_features() const { return n_features_; }
    const std::vector<std::size_t>& columns() const { return columns_; }
    const std::optional<Standardizer>& standardizer() const { return standardizer_; }
    const ModelBody& body() const { return body_; }

    // Positive class when the decision value is >= 0.
    double decision_value(const features::FeatureVector& x) const;
    int predict(const features::FeatureVector& x) const;
    double confidence(const features::FeatureVector& x) const;

    // Rows over the full registry (n_features columns).
    std::vector<double> decision_values(const Matrix& x) const;
    std::vector<int> predict(const Matrix& x) const;
    std::vector<double> confidences(const Matrix& x) const;

    bool calibrated() const { return calibration_.has_value(); }
    const std::optional<Calibration>& calibration() const { return calibration_; }
    void set_calibration(std::optional<Calibration> c) { calibration_ = c; }

    friend bool operator==(const TrainedModel& a, const TrainedModel& b);

private:
    Matrix prepare(const Matrix& x) const;

    Hyperparams params_ = SvmHyperparams{};
    std::string registry_version_;
    std::size_t n_features_ = 0;
    std::vector<std::size_t> columns_;
    std::optional<Standardizer> standardizer_;
    ModelBody body_;
    std::optional<Calibration> calibration_;
};

// X holds rows over the whole registry; `columns` restricts training to a
// subset (empty = all). SVM and k-NN standardise on the training rows.
TrainedModel train(const Hyperparams& params, const Matrix& x, std::span<const int> y,
                   const std::string& registry_version, std::vector<std::size_t> columns = {});
TrainedModel train(const Hyperparams& params, const features::FeatureMatrix& x, std::span<const int> y,
                   std::vector<std::size_t> columns = {});

// Returns a copy with a sigmoid fitted on held-out decision values.
TrainedModel calibrate(const TrainedModel& m, const Matrix& x_holdout, std::span<const int> y_holdout);

std::string serialize_model(const TrainedModel& m);
TrainedModel deserialize_model(std::string_view text);
void save_model(const TrainedModel& m, const std::string& path);
TrainedModel load_model(const std::string& path);
// Throws StateError when the model was trained over another registry.
void check_registry(const TrainedModel& m, const features::FeatureRegistry& registry);

}  // namespace metacomment::classifiers
