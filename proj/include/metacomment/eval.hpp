#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "metacomment/classifiers.hpp"
#include "metacomment/corpus.hpp"
#include "metacomment/features/extractor.hpp"
#include "metacomment/neural.hpp"

namespace metacomment::eval {

struct Metrics {
    double precision = 0;
    double recall = 0;
    double f_beta = 0;
    double beta = 0.5;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// (1 + b^2) p r / (b^2 p + r), 0 when the denominator is 0.
double f_beta(double precision, double recall, double beta);
Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn, double beta = 0.5);
Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, double beta = 0.5);

struct Fold {
    std::vector<std::size_t> train;  // positions into y, ascending
    std::vector<std::size_t> test;
};

// Members of each class are shuffled and dealt round robin; the dealing
// position carries over from class 0 to class 1.
std::vector<Fold> stratified_k_fold(std::span<const int> y, int k, std::uint64_t seed);

// Rows that carry at least one label.
std::vector<std::size_t> labeled_rows(const corpus::LabeledDataset& ds);
// 1 when the row's labels contain `target`.
std::vector<int> binary_labels(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows, corpus::Label target);

class Pipeline {
public:
    virtual ~Pipeline() = default;
    virtual void fit(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows, std::span<const int> y) = 0;
    virtual std::vector<double> decision_values(const corpus::LabeledDataset& ds,
                                                std::span<const std::size_t> rows) const = 0;
    // Ids of every comment a fitted transformer saw.
    virtual std::vector<std::string> seen_ids() const = 0;
};

using PipelineFactory = std::function<std::unique_ptr<Pipeline>(std::uint64_t seed)>;

// Feature extraction, optional ANOVA selection of the k best columns, classifier.
struct TraditionalSpec {
    features::FeatureConfig features;
    classifiers::Hyperparams classifier = classifiers::SvmHyperparams{};
    std::optional<std::size_t> k_features;  // nullopt = all
};

class TraditionalPipeline : public Pipeline {
public:
    TraditionalPipeline(std::shared_ptr<const features::CompiledResources> resources, TraditionalSpec spec,
                        std::uint64_t seed);
    void fit(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows, std::span<const int> y) override;
    std::vector<double> decision_values(const corpus::LabeledDataset& ds,
                                        std::span<const std::size_t> rows) const override;
    std::vector<std::string> seen_ids() const override;

    const features::FeatureExtractor& extractor() const { return extractor_; }
    const classifiers::TrainedModel& model() const { return *model_; }

private:
    std::shared_ptr<const features::CompiledResources> resources_;
    TraditionalSpec spec_;
    std::uint64_t seed_;
    features::FeatureExtractor extractor_;
    std::optional<classifiers::TrainedModel> model_;
};

// Token sequences without stop-word removal into the CNN; decision = p(positive) - 0.5.
class CnnPipeline : public Pipeline {
public:
    CnnPipeline(std::shared_ptr<const embeddings::WordEmbeddingModel> words, neural::CnnConfig config);
    void fit(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows, std::span<const int> y) override;
    std::vector<double> decision_values(const corpus::LabeledDataset& ds,
                                        std::span<const std::size_t> rows) const override;
    std::vector<std::string> seen_ids() const override { return {}; }

    const neural::CnnModel& model() const { return model_; }
    const neural::TrainResult& history() const { return history_; }

private:
    std::shared_ptr<const embeddings::WordEmbeddingModel> words_;
    neural::CnnConfig config_;
    neural::CnnModel model_;
    neural::TrainResult history_;
    bool fitted_ = false;
};

PipelineFactory traditional_factory(std::shared_ptr<const features::CompiledResources> resources, TraditionalSpec spec);
PipelineFactory cnn_factory(std::shared_ptr<const embeddings::WordEmbeddingModel> words, neural::CnnConfig config);

struct FoldResult {
    Metrics metrics;
    std::vector<std::size_t> test_rows;  // dataset rows
};

struct CvResult {
    std::vector<FoldResult> folds;
    Metrics mean;    // unweighted mean over folds; counts are summed
    Metrics pooled;  // from the summed counts
    std::uint64_t seed = 0;
};

Metrics mean_metrics(std::span<const Metrics> folds);

// Fold i trains a pipeline from factory(derive_seed(seed, i)) on the other
// folds. Throws StateError when a fitted transformer saw a test-fold id.
CvResult cross_validate(const PipelineFactory& factory, const corpus::LabeledDataset& ds,
                        std::span<const std::size_t> rows, corpus::Label target, int k, std::uint64_t seed,
                        double beta = 0.5);

struct ClassifierGrid {
    classifiers::Kind kind = classifiers::Kind::LinearSvm;
    // Parameter name -> candidate values; names iterate in map order, the last varying fastest.
    std::map<std::string, std::vector<double>> values;
};

struct GridSpec {
    features::FeatureConfig features;
    std::vector<ClassifierGrid> classifiers;
    std::vector<std::optional<std::size_t>> k_features = {10, 50, std::nullopt};
    double beta = 0.5;
};

struct GridConfig {
    classifiers::Kind kind = classifiers::Kind::LinearSvm;
    classifiers::ParamMap params;
    std::optional<std::size_t> k_features;
    std::string label() const;
};

// Classifiers in order, then feature counts, then parameter combinations.
std::vector<GridConfig> enumerate_grid(const GridSpec& grid);

struct GridResult {
    std::vector<GridConfig> configs;
    std::vector<CvResult> results;
    std::size_t best = 0;  // first configuration with the highest mean F_beta
};

// Same folds and fold seeds as cross_validate with a TraditionalPipeline per
// configuration; feature extraction is shared across configurations.
GridResult grid_search(const GridSpec& grid, std::shared_ptr<const features::CompiledResources> resources,
                       const corpus::LabeledDataset& ds, std::span<const std::size_t> rows, corpus::Label target,
                       int k, std::uint64_t seed);

// One row per (configuration, fold) plus "mean" and "pooled" rows per configuration.
void write_grid_csv(const GridResult& result, std::ostream& out);
void write_cv_csv(const CvResult& result, std::ostream& out);

struct TwoStepModels {
    classifiers::TrainedModel meta;
    // Media, Journalist, Moderator.
    std::array<classifiers::TrainedModel, 3> addressees;
};

struct TwoStepResult {
    bool meta = false;
    corpus::LabelSet labels;  // Meta plus the accepted addressees, or NonMeta
    double meta_decision = 0;
    std::array<double, 3> confidence{};  // zero when step 1 says NonMeta
};

// An addressee is accepted when its confidence is strictly above the threshold.
TwoStepResult two_step_classify(const TwoStepModels& models, const features::FeatureVector& x,
                                double threshold = 0.8);

struct TwoStepTraining {
    std::unique_ptr<features::FeatureExtractor> extractor;
    TwoStepModels models;
};

struct TwoStepSpec {
    features::FeatureConfig features;
    classifiers::Hyperparams meta = classifiers::SvmHyperparams{};
    classifiers::Hyperparams addressee = classifiers::SvmHyperparams{};
    std::optional<std::size_t> k_features;
    // Folds for the out-of-fold decision values the sigmoid is fitted on.
    int calibration_folds = 3;
};

// One extractor fitted on `rows`; four calibrated one-vs-rest models over it.
TwoStepTraining train_two_step(std::shared_ptr<const features::CompiledResources> resources, const TwoStepSpec& spec,
                               const corpus::LabeledDataset& ds, std::span<const std::size_t> rows,
                               std::uint64_t seed);

// Fits on every labeled row of `train`, scores every labeled row of `test`,
// once per class in `targets`.
std::map<corpus::Label, Metrics> cross_dataset_eval(const corpus::LabeledDataset& train,
                                                    const corpus::LabeledDataset& test,
                                                    const PipelineFactory& factory,
                                                    std::span<const corpus::Label> targets, std::uint64_t seed,
                                                    double beta = 0.5);

}  // namespace metacomment::eval
