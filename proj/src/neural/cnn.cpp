#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "metacomment/neural.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/hash.hpp"
#include "metacomment/util/random.hpp"

namespace metacomment::neural {

namespace {

std::vector<std::span<double>> blocks(CnnParameters& p) {
    std::vector<std::span<double>> out;
    for (auto& w : p.conv) out.emplace_back(w.data(), static_cast<std::size_t>(w.size()));
    out.emplace_back(p.conv_bias.data(), static_cast<std::size_t>(p.conv_bias.size()));
    out.emplace_back(p.dense.data(), static_cast<std::size_t>(p.dense.size()));
    out.emplace_back(p.dense_bias.data(), static_cast<std::size_t>(p.dense_bias.size()));
    out.emplace_back(p.output.data(), static_cast<std::size_t>(p.output.size()));
    out.emplace_back(p.output_bias.data(), static_cast<std::size_t>(p.output_bias.size()));
    return out;
}

CnnParameters zeros_like(const CnnParameters& p) {
    CnnParameters z;
    for (const auto& w : p.conv) z.conv.push_back(Matrix::Zero(w.rows(), w.cols()));
    z.conv_bias = Vector::Zero(p.conv_bias.size());
    z.dense = Matrix::Zero(p.dense.rows(), p.dense.cols());
    z.dense_bias = Vector::Zero(p.dense_bias.size());
    z.output = Matrix::Zero(p.output.rows(), p.output.cols());
    z.output_bias = Vector::Zero(p.output_bias.size());
    return z;
}

}  // namespace

void CnnConfig::validate() const {
    if (max_len < 1 || n_filters < 1 || kernel_size < 1 || dense_units < 1 || batch_size < 1 || epochs < 1) {
        throw InvalidArgument("CNN sizes must all be >= 1");
    }
    if (kernel_size > max_len) throw InvalidArgument("kernel_size must not exceed max_len");
    if (!(learning_rate > 0)) throw InvalidArgument("learning_rate must be positive");
}

CnnModel CnnModel::build(const embeddings::WordEmbeddingModel& m, const CnnConfig& cfg) {
    cfg.validate();
    if (m.dim() == 0 || m.size() == 0) throw InvalidArgument("CNN needs a trained word embedding model");
    CnnModel model;
    model.config_ = cfg;
    const auto d = static_cast<Eigen::Index>(m.dim());
    model.embedding_ = Matrix::Zero(static_cast<Eigen::Index>(m.size()) + 2, d);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto v = m.vector(i);
        if (static_cast<Eigen::Index>(v.size()) != d) throw InvalidArgument("word vector dimension mismatch");
        std::copy(v.begin(), v.end(), model.embedding_.row(static_cast<Eigen::Index>(i) + 2).data());
        model.index_.emplace(m.vocab()[i], static_cast<int>(i) + 2);
    }

    auto& p = model.params_;
    for (int o = 0; o < cfg.kernel_size; ++o) p.conv.emplace_back(d, cfg.n_filters);
    p.conv_bias.resize(cfg.n_filters);
    p.dense.resize(cfg.n_filters, cfg.dense_units);
    p.dense_bias.resize(cfg.dense_units);
    p.output.resize(cfg.dense_units, 2);
    p.output_bias.resize(2);
    Rng rng(derive_seed(cfg.seed, "cnn-init"));
    for (auto block : blocks(p)) {
        for (double& v : block) v = rng.uniform(-0.05, 0.05);
    }
    return model;
}

std::vector<int> CnnModel::encode(const std::vector<std::string>& tokens) const {
    std::vector<int> out(static_cast<std::size_t>(config_.max_len), kPadIndex);
    const std::size_t n = std::min(tokens.size(), out.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto it = index_.find(tokens[i]);
        out[i] = it == index_.end() ? kOovIndex : it->second;
    }
    return out;
}

Activations CnnModel::forward(std::span<const int> indices) const {
    const int len = config_.max_len, k = config_.kernel_size, f = config_.n_filters;
    if (static_cast<int>(indices.size()) != len) {
        throw InvalidArgument("CNN input must have exactly max_len = " + std::to_string(len) + " indices");
    }
    int last = 0;
    for (int t = 0; t < len; ++t) {
        const int idx = indices[static_cast<std::size_t>(t)];
        if (idx < 0 || idx >= embedding_.rows()) throw InvalidArgument("token index outside the embedding layer");
        if (idx != kPadIndex) last = t + 1;
    }
    Activations a;
    a.windows = len - k + 1;
    // Windows starting at or after `last` see only padding and all equal tanh(bias).
    const int computed = std::min(a.windows, last);
    const bool pad_windows = computed < a.windows;

    a.pooled = Vector::Constant(f, -std::numeric_limits<double>::infinity());
    a.argmax.assign(static_cast<std::size_t>(f), -1);
    if (computed > 0) {
        const int rows = computed + k - 1;
        Matrix seq(rows, embedding_.cols());
        for (int t = 0; t < rows; ++t) seq.row(t) = embedding_.row(indices[static_cast<std::size_t>(t)]);
        Matrix z = seq.topRows(computed) * params_.conv[0];
        for (int o = 1; o < k; ++o) z.noalias() += seq.middleRows(o, computed) * params_.conv[static_cast<std::size_t>(o)];
        z.rowwise() += params_.conv_bias.transpose();
        z = z.array().tanh();
        for (int j = 0; j < f; ++j) {
            for (int t = 0; t < computed; ++t) {
                if (z(t, j) > a.pooled[j]) {
                    a.pooled[j] = z(t, j);
                    a.argmax[static_cast<std::size_t>(j)] = t;
                }
            }
        }
    }
    if (pad_windows) {
        for (int j = 0; j < f; ++j) {
            const double v = std::tanh(params_.conv_bias[j]);
            if (v > a.pooled[j]) {
                a.pooled[j] = v;
                a.argmax[static_cast<std::size_t>(j)] = -1;
            }
        }
    }
    a.hidden = (params_.dense.transpose() * a.pooled + params_.dense_bias).array().tanh();
    const Vector logits = params_.output.transpose() * a.hidden + params_.output_bias;
    const double mx = logits.maxCoeff();
    const double e0 = std::exp(logits[0] - mx), e1 = std::exp(logits[1] - mx);
    a.probabilities = {e0 / (e0 + e1), e1 / (e0 + e1)};
    return a;
}

double CnnModel::loss(std::span<const std::vector<int>> batch, std::span<const int> labels, CnnParameters* grad) const {
    if (batch.empty() || batch.size() != labels.size()) throw InvalidArgument("CNN batch needs one label per sequence");
    if (grad) *grad = zeros_like(params_);
    const double scale = 1.0 / static_cast<double>(batch.size());
    double total = 0;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const int y = labels[s];
        if (y != 0 && y != 1) throw InvalidArgument("CNN labels must be 0 or 1");
        const Activations a = forward(batch[s]);
        total += -std::log(std::max(a.probabilities[static_cast<std::size_t>(y)], 1e-300));
        if (!grad) continue;

        Vector d_out(2);
        d_out << a.probabilities[0] - (y == 0), a.probabilities[1] - (y == 1);
        d_out *= scale;
        grad->output.noalias() += a.hidden * d_out.transpose();
        grad->output_bias += d_out;
        const Vector d_hidden =
            ((params_.output * d_out).array() * (1.0 - a.hidden.array().square())).matrix();
        grad->dense.noalias() += a.pooled * d_hidden.transpose();
        grad->dense_bias += d_hidden;
        const Vector d_pooled = params_.dense * d_hidden;
        for (int j = 0; j < config_.n_filters; ++j) {
            const double dz = d_pooled[j] * (1.0 - a.pooled[j] * a.pooled[j]);
            grad->conv_bias[j] += dz;
            const int t = a.argmax[static_cast<std::size_t>(j)];
            if (t < 0) continue;
            for (int o = 0; o < config_.kernel_size; ++o) {
                const int idx = batch[s][static_cast<std::size_t>(t + o)];
                grad->conv[static_cast<std::size_t>(o)].col(j) += dz * embedding_.row(idx).transpose();
            }
        }
    }
    return total * scale;
}

std::uint64_t CnnModel::embedding_hash() const {
    return fnv1a64_of(std::span<const double>(embedding_.data(), static_cast<std::size_t>(embedding_.size())));
}

TrainResult train_cnn(CnnModel& model, const std::vector<std::vector<int>>& sequences, std::span<const int> labels) {
    const auto& cfg = model.config();
    if (sequences.empty()) throw InvalidArgument("CNN training set is empty");
    if (sequences.size() != labels.size()) throw InvalidArgument("one label per training sequence");
    const auto pos = std::count(labels.begin(), labels.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) {
        throw InvalidArgument("both classes must be present in the CNN training set");
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    CnnParameters m1 = zeros_like(model.parameters()), m2 = zeros_like(model.parameters()), grad;
    Rng rng(derive_seed(cfg.seed, "cnn-shuffle"));
    std::vector<std::size_t> order(sequences.size());
    std::iota(order.begin(), order.end(), 0);
    TrainResult result;
    long step = 0;
    std::vector<std::vector<int>> batch;
    std::vector<int> batch_labels;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.clear();
            batch_labels.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(sequences[order[i]]);
                batch_labels.push_back(labels[order[i]]);
            }
            epoch_loss += model.loss(batch, batch_labels, &grad) * static_cast<double>(end - start);
            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            auto params = blocks(model.parameters());
            auto g = blocks(grad), m = blocks(m1), v = blocks(m2);
            for (std::size_t b = 0; b < params.size(); ++b) {
                for (std::size_t i = 0; i < params[b].size(); ++i) {
                    m[b][i] = beta1 * m[b][i] + (1 - beta1) * g[b][i];
                    v[b][i] = beta2 * v[b][i] + (1 - beta2) * g[b][i] * g[b][i];
                    params[b][i] -= cfg.learning_rate * (m[b][i] / c1) / (std::sqrt(v[b][i] / c2) + eps);
                }
            }
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    return result;
}

double GradientCheck::max() const {
    return std::max({conv, conv_bias, dense, dense_bias, output, output_bias});
}

GradientCheck gradient_check(const CnnModel& model, std::span<const std::vector<int>> batch, std::span<const int> labels,
                             double h) {
    CnnParameters analytic;
    model.loss(batch, labels, &analytic);
    CnnModel probe = model;
    auto params = blocks(probe.parameters());
    auto grads = blocks(analytic);
    const std::size_t k = model.parameters().conv.size();
    std::vector<double> worst(params.size(), 0.0);
    for (std::size_t b = 0; b < params.size(); ++b) {
        for (std::size_t i = 0; i < params[b].size(); ++i) {
            const double saved = params[b][i];
            params[b][i] = saved + h;
            const double up = probe.loss(batch, labels);
            params[b][i] = saved - h;
            const double down = probe.loss(batch, labels);
            params[b][i] = saved;
            const double numeric = (up - down) / (2 * h);
            const double a = grads[b][i];
            const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-6);
            worst[b] = std::max(worst[b], rel);
        }
    }
    GradientCheck out;
    for (std::size_t b = 0; b < k; ++b) out.conv = std::max(out.conv, worst[b]);
    out.conv_bias = worst[k];
    out.dense = worst[k + 1];
    out.dense_bias = worst[k + 2];
    out.output = worst[k + 3];
    out.output_bias = worst[k + 4];
    return out;
}

}  // namespace metacomment::neural
