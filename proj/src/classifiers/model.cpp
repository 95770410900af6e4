#include <algorithm>
#include <cmath>
#include <numeric>

#include "internal.hpp"
#include "metacomment/util/error.hpp"

namespace metacomment::classifiers {

namespace {

std::span<const double> row_span(const Matrix& x, Eigen::Index r) {
    return {x.row(r).data(), static_cast<std::size_t>(x.cols())};
}

Matrix select_columns(const Matrix& x, const std::vector<std::size_t>& columns) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(columns[j]));
    }
    return out;
}

double log1p_exp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

Standardizer Standardizer::fit(const Matrix& x) {
    if (x.rows() == 0) throw InvalidArgument("standardizer needs at least one row");
    Standardizer s;
    const double n = static_cast<double>(x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).sum() / n;
        const double var = (x.col(j).array() - mean).square().sum() / n;
        s.mean.push_back(mean);
        s.scale.push_back(var > 0 ? std::sqrt(var) : 1.0);
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != mean.size()) throw InvalidArgument("standardizer: column count mismatch");
    Matrix out = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        out.col(j) = (out.col(j).array() - mean[static_cast<std::size_t>(j)]) / scale[static_cast<std::size_t>(j)];
    }
    return out;
}

double Calibration::operator()(double decision) const {
    const double z = a * decision + b;
    // 1 / (1 + e^z), written to avoid overflow.
    return z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

Calibration fit_platt(std::span<const double> f, std::span<const int> y) {
    if (f.size() != y.size() || f.empty()) throw InvalidArgument("fit_platt: one label per decision value");
    const double prior1 = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const double prior0 = static_cast<double>(y.size()) - prior1;
    if (prior1 == 0 || prior0 == 0) throw InvalidArgument("calibration holdout must contain both classes");
    const double hi = (prior1 + 1.0) / (prior1 + 2.0), lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] ? hi : lo;

    auto objective = [&](double a, double b) {
        double v = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double z = f[i] * a + b;
            v += t[i] * z + log1p_exp(-z);
        }
        return v;
    };

    double a = 0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = objective(a, b);
    for (int iter = 0; iter < 100; ++iter) {
        double h11 = 1e-12, h22 = 1e-12, h21 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double z = f[i] * a + b;
            double p, q;
            if (z >= 0) {
                p = std::exp(-z) / (1.0 + std::exp(-z));
                q = 1.0 / (1.0 + std::exp(-z));
            } else {
                p = 1.0 / (1.0 + std::exp(z));
                q = std::exp(z) / (1.0 + std::exp(z));
            }
            const double d2 = p * q;
            h11 += f[i] * f[i] * d2;
            h22 += d2;
            h21 += f[i] * d2;
            const double d1 = t[i] - p;
            g1 += f[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= 1e-10) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < 1e-10) break;
    }
    if (a > 0) {
        // Decision values anti-correlated with the labels: keep the map monotone.
        const double mean_t = (prior1 * hi + prior0 * lo) / (prior1 + prior0);
        a = 0;
        b = std::log((1.0 - mean_t) / mean_t);
    }
    return Calibration{a, b};
}

TrainedModel::TrainedModel(Hyperparams params, std::string registry_version, std::size_t n_features,
                           std::vector<std::size_t> columns, std::optional<Standardizer> standardizer, ModelBody body)
    : params_(std::move(params)),
      registry_version_(std::move(registry_version)),
      n_features_(n_features),
      columns_(std::move(columns)),
      standardizer_(std::move(standardizer)),
      body_(std::move(body)) {
    if (kind_of(params_) != static_cast<Kind>(body_.index())) throw InvalidArgument("model body does not match kind");
    for (auto c : columns_) {
        if (c >= n_features_) throw InvalidArgument("selected column outside the registry");
    }
    if (standardizer_ && standardizer_->mean.size() != columns_.size()) {
        throw InvalidArgument("standardizer width does not match the selected columns");
    }
}

Matrix TrainedModel::prepare(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != n_features_) {
        throw InvalidArgument("expected " + std::to_string(n_features_) + " feature columns, got " +
                              std::to_string(x.cols()));
    }
    Matrix sel = select_columns(x, columns_);
    return standardizer_ ? standardizer_->apply(sel) : sel;
}

std::vector<double> TrainedModel::decision_values(const Matrix& x) const {
    const Matrix z = prepare(x);
    std::vector<double> out(static_cast<std::size_t>(z.rows()));
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            for (Eigen::Index r = 0; r < z.rows(); ++r) {
                const auto row = row_span(z, r);
                double v;
                if constexpr (std::is_same_v<T, LinearModel>) {
                    v = body.b;
                    for (std::size_t j = 0; j < row.size(); ++j) v += body.w[j] * row[j];
                } else if constexpr (std::is_same_v<T, Tree>) {
                    v = body.probability(row) - 0.5;
                } else if constexpr (std::is_same_v<T, Forest>) {
                    v = forest_decision(body, row);
                } else if constexpr (std::is_same_v<T, Boost>) {
                    v = boost_decision(body, row);
                } else {
                    v = knn_decision(body, row);
                }
                out[static_cast<std::size_t>(r)] = v;
            }
        },
        body_);
    return out;
}

std::vector<int> TrainedModel::predict(const Matrix& x) const {
    std::vector<int> out;
    for (double v : decision_values(x)) out.push_back(v >= 0.0 ? 1 : 0);
    return out;
}

std::vector<double> TrainedModel::confidences(const Matrix& x) const {
    if (!calibration_) throw StateError("model is not calibrated");
    std::vector<double> out;
    for (double v : decision_values(x)) out.push_back((*calibration_)(v));
    return out;
}

namespace {

Matrix dense_row(const features::FeatureVector& v, const std::string& version, std::size_t n) {
    if (v.registry_version != version) {
        throw StateError("feature registry mismatch: model expects " + version + ", vector has " + v.registry_version);
    }
    Matrix x = Matrix::Zero(1, static_cast<Eigen::Index>(n));
    for (const auto& [c, value] : v.entries) {
        if (c >= n) throw InvalidArgument("feature column outside the registry");
        x(0, static_cast<Eigen::Index>(c)) = value;
    }
    return x;
}

}  // namespace

double TrainedModel::decision_value(const features::FeatureVector& x) const {
    return decision_values(dense_row(x, registry_version_, n_features_)).front();
}

int TrainedModel::predict(const features::FeatureVector& x) const { return decision_value(x) >= 0.0 ? 1 : 0; }

double TrainedModel::confidence(const features::FeatureVector& x) const {
    if (!calibration_) throw StateError("model is not calibrated");
    return (*calibration_)(decision_value(x));
}

TrainedModel train(const Hyperparams& params, const Matrix& x, std::span<const int> y,
                   const std::string& registry_version, std::vector<std::size_t> columns) {
    validate(params);
    if (x.rows() == 0) throw InvalidArgument("empty training set");
    if (y.size() != static_cast<std::size_t>(x.rows())) throw InvalidArgument("one label per training row");
    const auto pos = std::count(y.begin(), y.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size())) {
        throw InvalidArgument("both classes must be present in the training set");
    }
    if (columns.empty()) {
        columns.resize(static_cast<std::size_t>(x.cols()));
        std::iota(columns.begin(), columns.end(), 0);
    }
    for (auto c : columns) {
        if (c >= static_cast<std::size_t>(x.cols())) throw InvalidArgument("selected column outside the matrix");
    }
    Matrix sel = select_columns(x, columns);
    const Kind kind = kind_of(params);
    std::optional<Standardizer> standardizer;
    if (kind == Kind::LinearSvm || kind == Kind::Knn) {
        standardizer = Standardizer::fit(sel);
        sel = standardizer->apply(sel);
    }
    ModelBody body = std::visit(
        [&](const auto& p) -> ModelBody {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SvmHyperparams>) {
                LinearModel m = train_linear_svm(sel, y, p);
                m.alpha.clear();
                m.alpha.shrink_to_fit();
                return m;
            } else if constexpr (std::is_same_v<T, TreeHyperparams>) {
                return train_tree(sel, y, {}, p);
            } else if constexpr (std::is_same_v<T, ForestHyperparams>) {
                return train_forest(sel, y, p);
            } else if constexpr (std::is_same_v<T, AdaBoostHyperparams>) {
                return train_boost(sel, y, p);
            } else {
                return KnnModel{sel, std::vector<int>(y.begin(), y.end()), p.k};
            }
        },
        params);
    return TrainedModel(params, registry_version, static_cast<std::size_t>(x.cols()), std::move(columns),
                        std::move(standardizer), std::move(body));
}

TrainedModel train(const Hyperparams& params, const features::FeatureMatrix& x, std::span<const int> y,
                   std::vector<std::size_t> columns) {
    return train(params, x.to_dense(), y, x.registry->version(), std::move(columns));
}

TrainedModel calibrate(const TrainedModel& m, const Matrix& x_holdout, std::span<const int> y_holdout) {
    const auto f = m.decision_values(x_holdout);
    TrainedModel out = m;
    out.set_calibration(fit_platt(f, y_holdout));
    return out;
}

void check_registry(const TrainedModel& m, const features::FeatureRegistry& registry) {
    if (m.registry_version() != registry.version() || m.n_features() != registry.size()) {
        throw StateError("model was trained over feature registry " + m.registry_version() + ", not " +
                         registry.version());
    }
}

}  // namespace metacomment::classifiers
