#include <algorithm>

#include "metacomment/eval.hpp"
#include "metacomment/features/anova.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"

namespace metacomment::eval {

using corpus::Label;

TwoStepResult two_step_classify(const TwoStepModels& models, const features::FeatureVector& x, double threshold) {
    const auto& version = models.meta.registry_version();
    for (const auto& m : models.addressees) {
        if (m.registry_version() != version) throw StateError("two-step models were trained over different registries");
        if (!m.calibrated()) throw StateError("addressee models must be calibrated");
    }
    TwoStepResult r;
    r.meta_decision = models.meta.decision_value(x);
    r.meta = r.meta_decision >= 0.0;
    if (!r.meta) {
        r.labels.insert(Label::NonMeta);
        return r;
    }
    r.labels.insert(Label::Meta);
    for (std::size_t i = 0; i < 3; ++i) {
        r.confidence[i] = models.addressees[i].confidence(x);
        if (r.confidence[i] > threshold) r.labels.insert(corpus::kAddressees[i]);
    }
    return r;
}

namespace {

classifiers::TrainedModel train_calibrated(const classifiers::Hyperparams& params, const Matrix& x,
                                           std::span<const int> y, const std::string& version,
                                           std::optional<std::size_t> k_features, int folds, std::uint64_t seed,
                                           Label target) {
    auto select = [&](const Matrix& xs, std::span<const int> ys) {
        std::vector<std::size_t> columns;
        if (k_features) {
            const auto scores = features::anova_f_scores(xs, ys);
            columns = features::select_k_best(scores, std::min(*k_features, scores.size()));
        }
        return columns;
    };
    const auto positives = static_cast<int>(std::count(y.begin(), y.end(), 1));
    const int negatives = static_cast<int>(y.size()) - positives;
    const int k = std::min({folds, positives, negatives});
    if (k < 2) {
        throw InvalidArgument("calibrating the " + std::string(corpus::label_name(target)) +
                              " model needs at least two positive and two negative comments");
    }
    std::vector<double> oof(y.size());
    const auto split = stratified_k_fold(y, k, derive_seed(seed, "calibration"));
    for (std::size_t f = 0; f < split.size(); ++f) {
        Matrix xt(static_cast<Eigen::Index>(split[f].train.size()), x.cols());
        std::vector<int> yt;
        for (std::size_t i = 0; i < split[f].train.size(); ++i) {
            xt.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(split[f].train[i]));
            yt.push_back(y[split[f].train[i]]);
        }
        Matrix xv(static_cast<Eigen::Index>(split[f].test.size()), x.cols());
        for (std::size_t i = 0; i < split[f].test.size(); ++i) {
            xv.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(split[f].test[i]));
        }
        const auto fold_params = classifiers::with_seed(params, derive_seed(seed, static_cast<std::uint64_t>(f)));
        const auto m = classifiers::train(fold_params, xt, yt, version, select(xt, yt));
        const auto dv = m.decision_values(xv);
        for (std::size_t i = 0; i < dv.size(); ++i) oof[split[f].test[i]] = dv[i];
    }
    auto model = classifiers::train(classifiers::with_seed(params, seed), x, y, version, select(x, y));
    model.set_calibration(classifiers::fit_platt(oof, y));
    return model;
}

}  // namespace

TwoStepTraining train_two_step(std::shared_ptr<const features::CompiledResources> resources, const TwoStepSpec& spec,
                               const corpus::LabeledDataset& ds, std::span<const std::size_t> rows,
                               std::uint64_t seed) {
    TwoStepTraining out;
    out.extractor = std::make_unique<features::FeatureExtractor>(std::move(resources), spec.features);
    out.extractor->fit(ds, rows);
    const Matrix x = out.extractor->assemble(ds, rows).to_dense();
    const auto version = out.extractor->registry()->version();
    auto fit = [&](Label target, const classifiers::Hyperparams& params) {
        const auto y = binary_labels(ds, rows, target);
        return train_calibrated(params, x, y, version, spec.k_features, spec.calibration_folds,
                                derive_seed(seed, std::string(corpus::label_name(target))), target);
    };
    out.models.meta = fit(Label::Meta, spec.meta);
    for (std::size_t i = 0; i < 3; ++i) out.models.addressees[i] = fit(corpus::kAddressees[i], spec.addressee);
    return out;
}

}  // namespace metacomment::eval
