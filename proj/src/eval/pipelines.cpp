#include <algorithm>
#include <unordered_set>

#include "metacomment/eval.hpp"
#include "metacomment/features/anova.hpp"
#include "metacomment/textprep.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"

namespace metacomment::eval {

namespace {

[[noreturn]] void rethrow_with_context(const std::string& context) {
    try {
        throw;
    } catch (const DataError& e) {
        throw DataError(context + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(context + e.what());
    } catch (const StateError& e) {
        throw StateError(context + e.what());
    } catch (const std::exception& e) {
        throw Error(context + e.what());
    }
}

}  // namespace

TraditionalPipeline::TraditionalPipeline(std::shared_ptr<const features::CompiledResources> resources,
                                         TraditionalSpec spec, std::uint64_t seed)
    : resources_(std::move(resources)), spec_(std::move(spec)), seed_(seed), extractor_(resources_, spec_.features) {}

void TraditionalPipeline::fit(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows,
                              std::span<const int> y) {
    extractor_.fit(ds, rows);
    const Matrix x = extractor_.assemble(ds, rows).to_dense();
    std::vector<std::size_t> columns;
    if (spec_.k_features) {
        const auto scores = features::anova_f_scores(x, y);
        const std::size_t k = std::min(*spec_.k_features, scores.size());
        columns = features::select_k_best(scores, k);
    }
    model_ = classifiers::train(classifiers::with_seed(spec_.classifier, seed_), x, y,
                                extractor_.registry()->version(), std::move(columns));
}

std::vector<double> TraditionalPipeline::decision_values(const corpus::LabeledDataset& ds,
                                                         std::span<const std::size_t> rows) const {
    if (!model_) throw StateError("pipeline not fitted");
    return model_->decision_values(extractor_.assemble(ds, rows).to_dense());
}

std::vector<std::string> TraditionalPipeline::seen_ids() const { return extractor_.seen_ids(); }

CnnPipeline::CnnPipeline(std::shared_ptr<const embeddings::WordEmbeddingModel> words, neural::CnnConfig config)
    : words_(std::move(words)), config_(config) {
    if (!words_) throw InvalidArgument("CNN pipeline needs a word embedding model");
    config_.validate();
}

namespace {

std::vector<std::vector<int>> encode_rows(const neural::CnnModel& model, const corpus::LabeledDataset& ds,
                                          std::span<const std::size_t> rows) {
    std::vector<std::vector<int>> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(model.encode(textprep::preprocess(ds[r].comment, nullptr).tokens));
    return out;
}

}  // namespace

void CnnPipeline::fit(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows, std::span<const int> y) {
    model_ = neural::CnnModel::build(*words_, config_);
    history_ = neural::train_cnn(model_, encode_rows(model_, ds, rows), y);
    fitted_ = true;
}

std::vector<double> CnnPipeline::decision_values(const corpus::LabeledDataset& ds,
                                                 std::span<const std::size_t> rows) const {
    if (!fitted_) throw StateError("pipeline not fitted");
    std::vector<double> out;
    for (const auto& seq : encode_rows(model_, ds, rows)) out.push_back(model_.predict_proba(seq)[1] - 0.5);
    return out;
}

PipelineFactory traditional_factory(std::shared_ptr<const features::CompiledResources> resources,
                                    TraditionalSpec spec) {
    return [resources = std::move(resources), spec = std::move(spec)](std::uint64_t seed) {
        return std::make_unique<TraditionalPipeline>(resources, spec, seed);
    };
}

PipelineFactory cnn_factory(std::shared_ptr<const embeddings::WordEmbeddingModel> words, neural::CnnConfig config) {
    return [words = std::move(words), config](std::uint64_t seed) {
        auto cfg = config;
        cfg.seed = seed;
        return std::make_unique<CnnPipeline>(words, cfg);
    };
}

CvResult cross_validate(const PipelineFactory& factory, const corpus::LabeledDataset& ds,
                        std::span<const std::size_t> rows, corpus::Label target, int k, std::uint64_t seed,
                        double beta) {
    const auto y = binary_labels(ds, rows, target);
    const auto folds = stratified_k_fold(y, k, seed);
    CvResult result;
    result.seed = seed;
    std::vector<Metrics> per_fold;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        std::vector<int> train_y, test_y;
        for (auto i : folds[f].train) {
            train_rows.push_back(rows[i]);
            train_y.push_back(y[i]);
        }
        for (auto i : folds[f].test) {
            test_rows.push_back(rows[i]);
            test_y.push_back(y[i]);
        }
        try {
            auto pipeline = factory(derive_seed(seed, static_cast<std::uint64_t>(f)));
            pipeline->fit(ds, train_rows, train_y);
            std::unordered_set<std::string> test_ids;
            for (auto r : test_rows) test_ids.insert(ds[r].comment.id);
            for (const auto& id : pipeline->seen_ids()) {
                if (test_ids.count(id)) throw StateError("a transformer was fitted on test comment '" + id + "'");
            }
            const auto dv = pipeline->decision_values(ds, test_rows);
            std::vector<int> pred;
            for (double v : dv) pred.push_back(v >= 0.0 ? 1 : 0);
            FoldResult fr{compute_metrics(test_y, pred, beta), test_rows};
            per_fold.push_back(fr.metrics);
            result.folds.push_back(std::move(fr));
        } catch (...) {
            rethrow_with_context("fold " + std::to_string(f) + ": ");
        }
    }
    result.mean = mean_metrics(per_fold);
    result.pooled = metrics_from_counts(result.mean.tp, result.mean.fp, result.mean.fn, result.mean.tn, beta);
    return result;
}

std::map<corpus::Label, Metrics> cross_dataset_eval(const corpus::LabeledDataset& train,
                                                    const corpus::LabeledDataset& test,
                                                    const PipelineFactory& factory,
                                                    std::span<const corpus::Label> targets, std::uint64_t seed,
                                                    double beta) {
    const auto train_rows = labeled_rows(train);
    const auto test_rows = labeled_rows(test);
    if (train_rows.empty() || test_rows.empty()) throw InvalidArgument("cross-dataset evaluation needs labeled comments");
    std::map<corpus::Label, Metrics> out;
    for (auto target : targets) {
        const auto y_train = binary_labels(train, train_rows, target);
        const auto y_test = binary_labels(test, test_rows, target);
        try {
            auto pipeline = factory(derive_seed(seed, std::string("cross-dataset-") + std::string(corpus::label_name(target))));
            pipeline->fit(train, train_rows, y_train);
            std::vector<int> pred;
            for (double v : pipeline->decision_values(test, test_rows)) pred.push_back(v >= 0.0 ? 1 : 0);
            out[target] = compute_metrics(y_test, pred, beta);
        } catch (...) {
            rethrow_with_context(std::string(corpus::label_name(target)) + ": ");
        }
    }
    return out;
}

}  // namespace metacomment::eval
