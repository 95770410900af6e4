#include <cmath>

#include "metacomment/classifiers.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/numeric_io.hpp"

namespace metacomment::classifiers {

namespace {

constexpr std::array<std::string_view, 5> kKindNames = {"linear_svm", "decision_tree", "random_forest", "adaboost",
                                                        "knn"};

int as_int(const std::string& name, double v) {
    if (v != std::floor(v) || std::abs(v) > 1e9) {
        throw InvalidArgument("hyperparameter " + name + " must be an integer, got " + format_real(v));
    }
    return static_cast<int>(v);
}

template <typename Fn>
void each_param(Hyperparams& p, Fn&& fn) {
    std::visit(
        [&](auto& h) {
            using T = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<T, SvmHyperparams>) {
                fn("C", h.C);
                fn("max_epochs", h.max_epochs);
                fn("tolerance", h.tolerance);
            } else if constexpr (std::is_same_v<T, TreeHyperparams>) {
                fn("max_depth", h.max_depth);
                fn("min_leaf", h.min_leaf);
                fn("max_features", h.max_features);
            } else if constexpr (std::is_same_v<T, ForestHyperparams>) {
                fn("n_trees", h.n_trees);
                fn("max_depth", h.max_depth);
                fn("min_leaf", h.min_leaf);
            } else if constexpr (std::is_same_v<T, AdaBoostHyperparams>) {
                fn("n_estimators", h.n_estimators);
                fn("learning_rate", h.learning_rate);
            } else {
                fn("k", h.k);
            }
        },
        p);
}

}  // namespace

std::string_view kind_name(Kind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

Kind parse_kind(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return static_cast<Kind>(i);
    }
    throw InvalidArgument("unknown classifier '" + std::string(name) +
                          "' (expected linear_svm, decision_tree, random_forest, adaboost or knn)");
}

Kind kind_of(const Hyperparams& p) { return static_cast<Kind>(p.index()); }

Hyperparams default_hyperparams(Kind kind) {
    switch (kind) {
        case Kind::LinearSvm: return SvmHyperparams{};
        case Kind::DecisionTree: return TreeHyperparams{};
        case Kind::RandomForest: return ForestHyperparams{};
        case Kind::AdaBoost: return AdaBoostHyperparams{};
        case Kind::Knn: return KnnHyperparams{};
    }
    throw InvalidArgument("bad classifier kind");
}

Hyperparams make_hyperparams(Kind kind, const ParamMap& values) {
    Hyperparams p = default_hyperparams(kind);
    std::size_t used = 0;
    each_param(p, [&](const std::string& name, auto& field) {
        const auto it = values.find(name);
        if (it == values.end()) return;
        ++used;
        if constexpr (std::is_same_v<std::decay_t<decltype(field)>, int>) {
            field = as_int(name, it->second);
        } else {
            field = it->second;
        }
    });
    if (used != values.size()) {
        const ParamMap known = to_param_map(p);
        for (const auto& [name, v] : values) {
            if (!known.count(name)) {
                throw InvalidArgument("unknown hyperparameter '" + name + "' for " + std::string(kind_name(kind)));
            }
        }
    }
    validate(p);
    return p;
}

ParamMap to_param_map(const Hyperparams& p) {
    ParamMap out;
    Hyperparams copy = p;
    each_param(copy, [&](const std::string& name, auto& field) { out[name] = static_cast<double>(field); });
    return out;
}

void validate(const Hyperparams& p) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw InvalidArgument(what);
    };
    std::visit(
        [&](const auto& h) {
            using T = std::decay_t<decltype(h)>;
            if constexpr (std::is_same_v<T, SvmHyperparams>) {
                require(h.C > 0 && std::isfinite(h.C), "C must be positive");
                require(h.max_epochs > 0, "max_epochs must be positive");
                require(h.tolerance > 0, "tolerance must be positive");
            } else if constexpr (std::is_same_v<T, TreeHyperparams>) {
                require(h.max_depth >= 0, "max_depth must be >= 0");
                require(h.min_leaf >= 1, "min_leaf must be >= 1");
                require(h.max_features >= 0, "max_features must be >= 0");
            } else if constexpr (std::is_same_v<T, ForestHyperparams>) {
                require(h.n_trees >= 1, "n_trees must be >= 1");
                require(h.max_depth >= 0, "max_depth must be >= 0");
                require(h.min_leaf >= 1, "min_leaf must be >= 1");
            } else if constexpr (std::is_same_v<T, AdaBoostHyperparams>) {
                require(h.n_estimators >= 1, "n_estimators must be >= 1");
                require(h.learning_rate > 0, "learning_rate must be positive");
            } else {
                require(h.k >= 1, "k must be >= 1");
            }
        },
        p);
}

Hyperparams with_seed(Hyperparams p, std::uint64_t seed) {
    std::visit(
        [&](auto& h) {
            if constexpr (requires { h.seed; }) h.seed = seed;
        },
        p);
    return p;
}

std::uint64_t seed_of(const Hyperparams& p) {
    return std::visit(
        [](const auto& h) -> std::uint64_t {
            if constexpr (requires { h.seed; }) {
                return h.seed;
            } else {
                return 0;
            }
        },
        p);
}

}  // namespace metacomment::classifiers
