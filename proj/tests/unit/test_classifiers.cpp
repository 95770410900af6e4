#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fixtures.hpp"
#include "metacomment/classifiers.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"

using namespace metacomment;
using namespace metacomment::classifiers;

namespace {

// Two Gaussian blobs in d dimensions, labels alternate.
std::pair<Matrix, std::vector<int>> blobs(std::size_t n, std::size_t d, double gap, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 2);
        for (std::size_t j = 0; j < d; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal() + (y[i] ? gap : -gap) * (j == 0);
        }
    }
    return {x, y};
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& y) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < y.size(); ++i) ok += pred[i] == y[i];
    return static_cast<double>(ok) / static_cast<double>(y.size());
}

// Minimum of the primal over (w1, w2, b) in [-3, 3]^3, step 0.01.
double grid_minimum(const Matrix& x, const std::vector<int>& y, double C) {
    double best = std::numeric_limits<double>::infinity();
    const int steps = 600;
    for (int i = 0; i <= steps; ++i) {
        const double w1 = -3.0 + 0.01 * i;
        for (int j = 0; j <= steps; ++j) {
            const double w2 = -3.0 + 0.01 * j;
            const double reg = 0.5 * (w1 * w1 + w2 * w2);
            if (reg >= best) continue;
            double f[4];
            for (int r = 0; r < 4; ++r) f[r] = (y[r] ? 1.0 : -1.0) * (w1 * x(r, 0) + w2 * x(r, 1));
            for (int k = 0; k <= steps; ++k) {
                const double b = -3.0 + 0.01 * k;
                double v = reg;
                for (int r = 0; r < 4; ++r) v += C * std::max(0.0, 1.0 - f[r] - (y[r] ? b : -b));
                best = std::min(best, v);
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("linear SVM: separable pair has zero error and zero hinge") {
    Matrix x(2, 1);
    x << -1, 1;
    const std::vector<int> y = {0, 1};
    const auto m = train_linear_svm(x, y, SvmHyperparams{10.0});
    CHECK(m.converged);
    for (int r = 0; r < 2; ++r) {
        const double f = m.w[0] * x(r, 0) + m.b;
        CHECK((y[r] ? f : -f) >= 1.0 - 1e-6);
    }
    const double obj = svm_primal_objective(m.w, m.b, x, y, 10.0);
    CHECK(obj == doctest::Approx(0.5 * m.w[0] * m.w[0]).epsilon(1e-9));
}

TEST_CASE("linear SVM: objective matches a brute-force grid of the primal") {
    struct Case {
        std::vector<double> pts;
        std::vector<int> y;
        double C;
    };
    const std::vector<Case> cases = {
        {{1, 0, 2, 1, -1, 0, -2, -1}, {1, 1, 0, 0}, 1.0},
        {{0, 0, 1, 1, 1, 0, 0, 1}, {1, 1, 0, 0}, 0.5},
        {{2, 0, 0, 2, 0.5, 0.5, -1, -1}, {1, 1, 0, 1}, 0.5},
    };
    for (const auto& c : cases) {
        Matrix x(4, 2);
        for (int r = 0; r < 4; ++r) x.row(r) << c.pts[2 * r], c.pts[2 * r + 1];
        SvmHyperparams p{c.C};
        p.tolerance = 1e-9;
        const auto m = train_linear_svm(x, c.y, p);
        const double learned = svm_primal_objective(m.w, m.b, x, c.y, c.C);
        CHECK(std::abs(learned - grid_minimum(x, c.y, c.C)) < 1e-3);
    }
}

TEST_CASE("property: SVM dual objective never increases") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto [x, y] = blobs(80, 4, 0.5, seed);
        const auto m = train_linear_svm(x, y, SvmHyperparams{0.5});
        REQUIRE(m.objective.size() > 1);
        for (std::size_t i = 1; i < m.objective.size(); ++i) REQUIRE(m.objective[i] <= m.objective[i - 1] + 1e-9);
    }
}

TEST_CASE("property: permuting training rows changes no SVM prediction") {
    const auto [x, y] = blobs(120, 5, 0.8, 3);
    const auto [test_x, test_y] = blobs(200, 5, 0.8, 4);
    const auto base = train(SvmHyperparams{0.5}, x, y, "r").predict(test_x);
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::size_t> perm(y.size());
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(std::span<std::size_t>(perm));
        Matrix px(x.rows(), x.cols());
        std::vector<int> py(y.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            px.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(perm[i]));
            py[i] = y[perm[i]];
        }
        CHECK(train(SvmHyperparams{0.5}, px, py, "r").predict(test_x) == base);
    }
}

TEST_CASE("training input errors") {
    Matrix x(3, 2);
    x.setOnes();
    const std::vector<int> same = {1, 1, 1};
    for (auto kind : {Kind::LinearSvm, Kind::DecisionTree, Kind::RandomForest, Kind::AdaBoost, Kind::Knn}) {
        CHECK_THROWS_AS(train(default_hyperparams(kind), x, same, "r"), InvalidArgument);
        CHECK_THROWS_AS(train(default_hyperparams(kind), Matrix(0, 2), std::vector<int>{}, "r"), InvalidArgument);
    }
    CHECK_THROWS_AS(make_hyperparams(Kind::LinearSvm, {{"C", 0.0}}), InvalidArgument);
    CHECK_THROWS_AS(make_hyperparams(Kind::LinearSvm, {{"gamma", 1.0}}), InvalidArgument);
    CHECK_THROWS_AS(make_hyperparams(Kind::Knn, {{"k", 2.5}}), InvalidArgument);
    CHECK_THROWS_AS(parse_kind("svm_rbf"), InvalidArgument);
}

TEST_CASE("k-NN with k = 1 reproduces the training labels") {
    const auto [x, y] = blobs(150, 3, 0.2, 6);
    const auto m = train(make_hyperparams(Kind::Knn, {{"k", 1}}), x, y, "r");
    CHECK(accuracy(m.predict(x), y) == 1.0);
}

TEST_CASE("zero decision value predicts the positive class") {
    const TrainedModel m(SvmHyperparams{}, "r", 2, {0, 1}, std::nullopt, LinearModel{{1.0, 0.0}, 0.0, {}, {}, 0, true});
    Matrix x(3, 2);
    x << 0, 5, -1, 0, 1, 0;
    CHECK(m.decision_values(x)[0] == 0.0);
    CHECK(m.predict(x) == std::vector<int>{1, 0, 1});
}

TEST_CASE("trees, forests and boosting") {
    // 1-D with a wide gap: every bootstrap tree splits the same way.
    Matrix x(40, 1);
    std::vector<int> y(40);
    for (int i = 0; i < 40; ++i) {
        y[i] = i % 2;
        x(i, 0) = y[i] ? 10.0 + i : -10.0 - i;
    }
    const auto forest = train(ForestHyperparams{25, 20, 2, 3}, x, y, "r");
    const auto f = forest.decision_values(x);
    for (int i = 0; i < 40; ++i) CHECK((f[static_cast<std::size_t>(i)] >= 0) == (y[i] == 1));
    CHECK(forest == train(ForestHyperparams{25, 20, 2, 3}, x, y, "r"));

    const auto [bx, by] = blobs(200, 4, 0.7, 12);
    TreeHyperparams stump_params;
    stump_params.max_depth = 1;
    const auto stump = train(stump_params, bx, by, "r");
    const auto boost = train(AdaBoostHyperparams{1, 1.0, 0}, bx, by, "r");
    CHECK(boost.predict(bx) == stump.predict(bx));

    const auto tree = train(TreeHyperparams{}, bx, by, "r");
    CHECK(accuracy(tree.predict(bx), by) > 0.85);
    const auto ada = train(AdaBoostHyperparams{}, bx, by, "r");
    CHECK(accuracy(ada.predict(bx), by) > 0.75);
}

TEST_CASE("property: all classifiers beat chance on well separated blobs") {
    const auto [x, y] = blobs(300, 6, 1.5, 21);
    const auto [tx, ty] = blobs(300, 6, 1.5, 22);
    for (auto kind : {Kind::LinearSvm, Kind::DecisionTree, Kind::RandomForest, Kind::AdaBoost, Kind::Knn}) {
        const auto m = train(with_seed(default_hyperparams(kind), 4), x, y, "r");
        CHECK_MESSAGE(accuracy(m.predict(tx), ty) > 0.85, kind_name(kind));
    }
}

TEST_CASE("Platt calibration") {
    Rng rng(5);
    std::vector<double> f;
    std::vector<int> y;
    for (int i = 0; i < 2000; ++i) {
        const int label = i % 2;
        y.push_back(label);
        f.push_back(rng.normal() + (label ? 1.0 : -1.0));
    }
    const auto cal = fit_platt(f, y);
    CHECK(cal.a <= 0.0);
    CHECK(std::abs(cal(0.0) - 0.5) <= 0.05);
    double prev = 0;
    for (double v = -10; v <= 10; v += 0.01) {
        const double p = cal(v);
        REQUIRE(p > 0.0);
        REQUIRE(p < 1.0);
        REQUIRE(p >= prev);
        prev = p;
    }
    CHECK_THROWS_AS(fit_platt(f, std::vector<int>(f.size(), 1)), InvalidArgument);

    const auto [x, ly] = blobs(200, 3, 1.0, 8);
    const auto m = train(SvmHyperparams{0.5}, x, ly, "r");
    CHECK_THROWS_AS(m.confidences(x), StateError);
    CHECK_THROWS_AS(calibrate(m, x, std::vector<int>(ly.size(), 0)), InvalidArgument);
    const auto cm = calibrate(m, x, ly);
    const auto dv = cm.decision_values(x);
    const auto conf = cm.confidences(x);
    for (std::size_t i = 0; i < dv.size(); ++i) {
        for (std::size_t j = 0; j < dv.size(); j += 17) {
            if (dv[i] < dv[j]) REQUIRE(conf[i] <= conf[j]);
        }
    }
}

TEST_CASE("model serialization round-trips and checks the registry") {
    const features::FeatureRegistry reg({"f0", "f1", "f2"});
    const auto [x, y] = blobs(60, 3, 1.0, 2);
    testing::TempDir dir;
    for (auto kind : {Kind::LinearSvm, Kind::DecisionTree, Kind::RandomForest, Kind::AdaBoost, Kind::Knn}) {
        auto m = train(with_seed(default_hyperparams(kind), 1), x, y, reg.version(), {0, 2});
        m = calibrate(m, x, y);
        const auto text = serialize_model(m);
        const auto back = deserialize_model(text);
        CHECK(back == m);
        CHECK(back.decision_values(x) == m.decision_values(x));
        CHECK(serialize_model(back) == text);
        save_model(m, dir.file("m.json"));
        CHECK(load_model(dir.file("m.json")) == m);
        CHECK_NOTHROW(check_registry(back, reg));
        CHECK_THROWS_AS(check_registry(back, features::FeatureRegistry({"a", "b", "c"})), StateError);
    }
    CHECK_THROWS_AS(deserialize_model("{\"format\":\"other\"}"), DataError);
    CHECK_THROWS_AS(deserialize_model("not json"), DataError);

    const auto m = train(SvmHyperparams{}, x, y, reg.version());
    features::FeatureVector v{{{0, 1.0}}, "elsewhere"};
    CHECK_THROWS_AS(m.decision_value(v), StateError);
    v.registry_version = reg.version();
    CHECK_NOTHROW(m.decision_value(v));
}

TEST_CASE("hyperparameter maps round-trip") {
    for (auto kind : {Kind::LinearSvm, Kind::DecisionTree, Kind::RandomForest, Kind::AdaBoost, Kind::Knn}) {
        const auto p = default_hyperparams(kind);
        CHECK(parse_kind(kind_name(kind)) == kind);
        CHECK(to_param_map(make_hyperparams(kind, to_param_map(p))) == to_param_map(p));
        CHECK(seed_of(with_seed(p, 77)) == (kind == Kind::Knn ? 0u : 77u));
    }
}
