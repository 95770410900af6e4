#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "metacomment/eval.hpp"
#include "metacomment/synthetic.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"
#include "metacomment/util/strings.hpp"

using namespace metacomment;
using namespace metacomment::eval;
using corpus::Label;
using corpus::LabelSet;

namespace {

std::shared_ptr<const features::CompiledResources> synthetic_resources(int dialect = 0) {
    features::FeatureResources r;
    const auto kw = synthetic::keywords(dialect);
    for (std::size_t i = 0; i < 3; ++i) {
        r.keywords[i].cls = corpus::kAddressees[i];
        for (const auto& t : kw[i]) r.keywords[i].seeds.push_back(to_lower_ascii(t));
        r.keywords[i].enriched = r.keywords[i].seeds;
    }
    return std::make_shared<const features::CompiledResources>(r);
}

corpus::LabeledDataset synthetic_set(std::size_t n, std::uint64_t seed, int dialect = 0, const std::string& tag = "syn") {
    synthetic::Options opt;
    opt.n_comments = n;
    opt.seed = seed;
    opt.dialect = dialect;
    opt.id_prefix = tag;
    opt.source_tag = tag;
    return synthetic::generate(opt);
}

class ConstantPipeline : public Pipeline {
public:
    explicit ConstantPipeline(double value) : value_(value) {}
    void fit(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows, std::span<const int>) override {
        for (auto r : rows) seen_.push_back(ds[r].comment.id);
    }
    std::vector<double> decision_values(const corpus::LabeledDataset&, std::span<const std::size_t> rows) const override {
        return std::vector<double>(rows.size(), value_);
    }
    std::vector<std::string> seen_ids() const override { return seen_; }

private:
    double value_;
    std::vector<std::string> seen_;
};

// Fits on the whole dataset, whatever rows it is given.
class LeakyPipeline : public ConstantPipeline {
public:
    LeakyPipeline() : ConstantPipeline(1.0) {}
    void fit(const corpus::LabeledDataset& ds, std::span<const std::size_t>, std::span<const int> y) override {
        std::vector<std::size_t> all(ds.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        ConstantPipeline::fit(ds, all, y);
    }
};

double oracle_f(double p, double r, double b) {
    const double num = (1 + b * b) * p * r;
    const double den = b * b * p + r;
    return den > 0 ? num / den : 0.0;
}

}  // namespace

TEST_CASE("f_beta examples") {
    CHECK(f_beta(0.91, 0.91, 0.5) == doctest::Approx(0.91).epsilon(1e-12));
    CHECK(f_beta(0.8, 0.4, 0.5) == doctest::Approx(0.6667).epsilon(1e-4));
    CHECK(f_beta(0.7, 0.0, 0.5) == 0.0);
    CHECK(f_beta(0.0, 0.0, 0.5) == 0.0);
    const auto m = metrics_from_counts(3, 1, 2, 4);
    CHECK(m.precision == doctest::Approx(0.75));
    CHECK(m.recall == doctest::Approx(0.6));
    CHECK(m.tp + m.fp + m.fn + m.tn == 10);
    const auto none = metrics_from_counts(0, 0, 5, 5);
    CHECK(none.precision == 0.0);
    CHECK(none.f_beta == 0.0);
    const std::vector<int> truth = {1, 1, 0, 0, 1}, pred = {1, 0, 1, 0, 1};
    const auto c = compute_metrics(truth, pred);
    CHECK(c.tp == 2);
    CHECK(c.fp == 1);
    CHECK(c.fn == 1);
    CHECK(c.tn == 1);
}

TEST_CASE("property: f_beta matches the formula on random counts") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t tp = rng.below(50), fp = rng.below(50), fn = rng.below(50);
        const double beta = 0.25 + rng.uniform() * 2;
        const auto m = metrics_from_counts(tp, fp, fn, 0, beta);
        const double p = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double r = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        REQUIRE(std::abs(m.f_beta - oracle_f(p, r, beta)) <= 1e-12);
    }
}

TEST_CASE("property: beta below one favours precision") {
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        const double p = 0.01 + 0.98 * rng.uniform(), r = 0.01 + 0.98 * rng.uniform();
        if (std::abs(p - r) < 1e-6) continue;
        const double f05 = f_beta(p, r, 0.5), f1 = f_beta(p, r, 1.0), f2 = f_beta(p, r, 2.0);
        if (p > r) {
            REQUIRE(f05 > f1);
            REQUIRE(f1 > f2);
        } else {
            REQUIRE(f05 < f1);
            REQUIRE(f1 < f2);
        }
    }
}

TEST_CASE("stratified folds: examples") {
    std::vector<int> y(10);
    for (int i = 0; i < 5; ++i) y[i] = 1;
    for (const auto& f : stratified_k_fold(y, 5, 1)) {
        REQUIRE(f.test.size() == 2);
        CHECK(y[f.test[0]] + y[f.test[1]] == 1);
    }
    std::vector<int> y2(13, 1);
    y2[2] = y2[7] = y2[11] = 0;
    for (const auto& f : stratified_k_fold(y2, 3, 2)) {
        CHECK(std::count_if(f.test.begin(), f.test.end(), [&](std::size_t i) { return y2[i] == 0; }) == 1);
    }
    CHECK_THROWS_AS(stratified_k_fold(std::vector<int>{1, 0, 0, 0}, 2, 1), InvalidArgument);
    CHECK(stratified_k_fold(y, 5, 7)[0].test == stratified_k_fold(y, 5, 7)[0].test);
}

TEST_CASE("property: folds partition and stay stratified") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(9));
        const std::size_t pos = static_cast<std::size_t>(k) + rng.below(40);
        const std::size_t neg = static_cast<std::size_t>(k) + rng.below(80);
        std::vector<int> y(pos + neg, 0);
        for (std::size_t i = 0; i < pos; ++i) y[i] = 1;
        rng.shuffle(std::span<int>(y));
        const auto folds = stratified_k_fold(y, k, rng.next());
        REQUIRE(folds.size() == static_cast<std::size_t>(k));
        std::vector<int> seen(y.size(), 0);
        for (const auto& f : folds) {
            REQUIRE(f.train.size() + f.test.size() == y.size());
            std::set<std::size_t> train(f.train.begin(), f.train.end());
            std::size_t fold_pos = 0;
            for (auto i : f.test) {
                ++seen[i];
                REQUIRE(train.count(i) == 0);
                fold_pos += static_cast<std::size_t>(y[i]);
            }
            const double exact_pos = static_cast<double>(pos) / k;
            const double exact_neg = static_cast<double>(neg) / k;
            REQUIRE(std::abs(static_cast<double>(fold_pos) - exact_pos) <= 1.0);
            REQUIRE(std::abs(static_cast<double>(f.test.size() - fold_pos) - exact_neg) <= 1.0);
        }
        for (int s : seen) REQUIRE(s == 1);
    }
}

TEST_CASE("cross-validation with constant pipelines") {
    const auto ds = synthetic_set(200, 2);
    const auto rows = labeled_rows(ds);
    const auto always = cross_validate([](std::uint64_t) { return std::make_unique<ConstantPipeline>(1.0); }, ds, rows,
                                       Label::Meta, 5, 1);
    REQUIRE(always.folds.size() == 5);
    for (const auto& f : always.folds) CHECK(f.metrics.recall == 1.0);
    CHECK(always.mean.tp + always.mean.fn == ds.count(Label::Meta));
    const auto never = cross_validate([](std::uint64_t) { return std::make_unique<ConstantPipeline>(-1.0); }, ds, rows,
                                      Label::Meta, 5, 1);
    for (const auto& f : never.folds) CHECK(f.metrics.recall == 0.0);
    CHECK(never.mean.f_beta == 0.0);

    std::set<std::size_t> tested;
    for (const auto& f : always.folds) tested.insert(f.test_rows.begin(), f.test_rows.end());
    CHECK(tested.size() == rows.size());
}

TEST_CASE("cross-validation rejects a leaking transformer") {
    const auto ds = synthetic_set(100, 3);
    CHECK_THROWS_AS(cross_validate([](std::uint64_t) { return std::make_unique<LeakyPipeline>(); }, ds, labeled_rows(ds),
                                   Label::Meta, 3, 1),
                    StateError);
}

TEST_CASE("separable synthetic data: SVM reaches F0.5 = 1") {
    const auto ds = synthetic_set(300, 4);
    TraditionalSpec spec{features::FeatureConfig::parse("regex"), classifiers::SvmHyperparams{0.5}, std::nullopt};
    const auto r = cross_validate(traditional_factory(synthetic_resources(), spec), ds, labeled_rows(ds), Label::Meta,
                                  10, 7);
    CHECK(r.mean.f_beta == 1.0);
    CHECK(r.pooled.f_beta == 1.0);
}

TEST_CASE("traditional pipeline fits transformers on training rows only") {
    const auto ds = synthetic_set(120, 5);
    TraditionalSpec spec{features::FeatureConfig::parse("tfidf,text"), classifiers::SvmHyperparams{}, 10};
    TraditionalPipeline p(synthetic_resources(), spec, 1);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < 60; ++i) rows.push_back(i);
    p.fit(ds, rows, binary_labels(ds, rows, Label::Meta));
    const auto seen = p.seen_ids();
    CHECK(seen.size() == 60);
    CHECK(std::find(seen.begin(), seen.end(), ds[100].comment.id) == seen.end());
    CHECK(p.model().columns().size() == 10);
}

TEST_CASE("grid search: one configuration, table layout") {
    const auto ds = synthetic_set(150, 6);
    GridSpec grid;
    grid.features = features::FeatureConfig::parse("regex,text");
    grid.classifiers = {{classifiers::Kind::LinearSvm, {{"C", {0.5}}}}};
    grid.k_features = {std::nullopt};
    const auto r = grid_search(grid, synthetic_resources(), ds, labeled_rows(ds), Label::Meta, 3, 1);
    REQUIRE(r.configs.size() == 1);
    CHECK(r.best == 0);
    CHECK(r.configs[0].params.at("C") == 0.5);

    grid.classifiers[0].values["C"] = {0.5, 1.0};
    const auto two = grid_search(grid, synthetic_resources(), ds, labeled_rows(ds), Label::Meta, 3, 1);
    std::ostringstream out;
    write_grid_csv(two, out);
    const auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 1 + 2 * (3 + 2));
    const auto fold_col = static_cast<std::size_t>(std::find(rows[0].begin(), rows[0].end(), "fold") - rows[0].begin());
    std::size_t means = 0;
    for (const auto& row : rows) means += row[fold_col] == "mean";
    CHECK(means == 2);
    CHECK(std::find(rows[0].begin(), rows[0].end(), "C") != rows[0].end());
}

TEST_CASE("grid search matches cross_validate per configuration") {
    const auto ds = synthetic_set(150, 8);
    const auto res = synthetic_resources();
    GridSpec grid;
    grid.features = features::FeatureConfig::parse("regex,keywords,text");
    grid.classifiers = {{classifiers::Kind::LinearSvm, {{"C", {0.5, 1.0}}}},
                        {classifiers::Kind::Knn, {{"k", {3}}}}};
    grid.k_features = {5, std::nullopt};
    const auto r = grid_search(grid, res, ds, labeled_rows(ds), Label::Media, 3, 11);
    REQUIRE(r.configs.size() == 6);
    for (std::size_t c = 0; c < r.configs.size(); ++c) {
        const auto& cfg = r.configs[c];
        TraditionalSpec spec{grid.features, classifiers::make_hyperparams(cfg.kind, cfg.params), cfg.k_features};
        const auto cv = cross_validate(traditional_factory(res, spec), ds, labeled_rows(ds), Label::Media, 3, 11);
        CHECK(cv.mean.f_beta == doctest::Approx(r.results[c].mean.f_beta).epsilon(1e-12));
    }
    for (std::size_t c = 0; c < r.best; ++c) CHECK(r.results[c].mean.f_beta < r.results[r.best].mean.f_beta);
}

TEST_CASE("grid search picks the planted penalty") {
    // One informative count: far negatives at 0, negatives at 8, positives at 9. The far group inflates
    // the standardised spread, so a weak penalty leaves the positives inside the margin on the wrong side.
    std::vector<corpus::Entry> entries;
    auto add = [&](std::size_t n, int count, bool meta) {
        for (std::size_t i = 0; i < n; ++i) {
            std::string text = "Kommentar";
            for (int c = 0; c < count; ++c) text += " Autor";
            entries.push_back(testing::make_entry("p" + std::to_string(entries.size()), text,
                                                  meta ? LabelSet{Label::Meta, Label::Journalist}
                                                       : LabelSet{Label::NonMeta}));
        }
    };
    add(15, 0, false);
    add(150, 8, false);
    add(12, 9, true);
    const corpus::LabeledDataset ds(entries, "planted");
    GridSpec grid;
    grid.features = features::FeatureConfig::parse("regex");
    grid.classifiers = {{classifiers::Kind::LinearSvm, {{"C", {0.5, 1.0}}}}};
    grid.k_features = {std::nullopt};
    const auto r = grid_search(grid, synthetic_resources(), ds, labeled_rows(ds), Label::Journalist, 3, 1);
    CHECK(r.configs[r.best].params.at("C") == 1.0);
    CHECK(r.results[1].mean.f_beta > r.results[0].mean.f_beta);
}

TEST_CASE("two-step classification") {
    const auto ds = synthetic_set(600, 9);
    const auto res = synthetic_resources();
    TwoStepSpec spec;
    spec.features = features::FeatureConfig::parse("regex,keywords,text");
    spec.meta = classifiers::SvmHyperparams{0.5};
    spec.addressee = classifiers::SvmHyperparams{0.5};
    const auto trained = train_two_step(res, spec, ds, labeled_rows(ds), 3);
    const auto& ex = *trained.extractor;
    for (const auto& m : trained.models.addressees) CHECK(m.calibrated());

    const auto moderator = testing::make_comment("m", "Zensur", "Lieber Moderator, die Moderation hier ist Zensur. Admin!");
    const auto x = ex.assemble(moderator);
    const auto r = two_step_classify(trained.models, x, 0.8);
    CHECK(r.meta);
    CHECK(r.labels == LabelSet{Label::Meta, Label::Moderator});
    CHECK(r.confidence[2] > 0.8);

    const auto strict = two_step_classify(trained.models, x, 1.0);
    CHECK(strict.meta);
    CHECK(strict.labels == LabelSet{Label::Meta});

    // step 1 says NonMeta: the addressee models are never consulted
    TwoStepModels gated = trained.models;
    const auto reg = ex.registry();
    gated.meta = classifiers::TrainedModel(
        classifiers::SvmHyperparams{}, reg->version(), reg->size(), {0}, std::nullopt,
        classifiers::LinearModel{{0.0}, -1.0, {}, {}, 0, true});
    const auto g = two_step_classify(gated, x, 0.8);
    CHECK_FALSE(g.meta);
    CHECK(g.labels == LabelSet{Label::NonMeta});
    for (double c : g.confidence) CHECK(c == 0.0);

    features::FeatureVector foreign = x;
    foreign.registry_version = "other";
    CHECK_THROWS_AS(two_step_classify(trained.models, foreign, 0.8), StateError);
}

TEST_CASE("cross-dataset evaluation") {
    const auto a = synthetic_set(300, 10, 0, "a");
    const auto b = synthetic_set(300, 11, 1, "b");
    const auto res = synthetic_resources(0);
    TraditionalSpec spec{features::FeatureConfig::parse("regex,tfidf"), classifiers::SvmHyperparams{0.5}, std::nullopt};
    const auto factory = traditional_factory(res, spec);
    const std::vector<Label> targets = {Label::Meta, Label::Media};

    const auto same = cross_dataset_eval(a, a, factory, targets, 4);
    for (auto t : targets) {
        auto p = factory(derive_seed(4, std::string("cross-dataset-") + std::string(corpus::label_name(t))));
        const auto rows = labeled_rows(a);
        const auto y = binary_labels(a, rows, t);
        p->fit(a, rows, y);
        std::vector<int> pred;
        for (double v : p->decision_values(a, rows)) pred.push_back(v >= 0 ? 1 : 0);
        const auto in_sample = compute_metrics(y, pred);
        CHECK(same.at(t).tp == in_sample.tp);
        CHECK(same.at(t).fp == in_sample.fp);
        CHECK(same.at(t).f_beta == in_sample.f_beta);
    }

    const auto ab = cross_dataset_eval(a, b, factory, targets, 4);
    const auto ba = cross_dataset_eval(b, a, factory, targets, 4);
    CHECK(ab.at(Label::Meta).f_beta != ba.at(Label::Meta).f_beta);
    CHECK(ab.at(Label::Meta).tp + ab.at(Label::Meta).fn == b.count(Label::Meta));
    CHECK(ba.at(Label::Meta).tp + ba.at(Label::Meta).fn == a.count(Label::Meta));
    const auto again = cross_dataset_eval(a, b, factory, targets, 4);
    CHECK(again.at(Label::Media).f_beta == ab.at(Label::Media).f_beta);
}
