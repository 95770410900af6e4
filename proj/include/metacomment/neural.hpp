#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "metacomment/embeddings.hpp"
#include "metacomment/textprep.hpp"
#include "metacomment/util/matrix.hpp"

namespace metacomment::neural {

struct CnnConfig {
    int max_len = 1000;
    int n_filters = 128;
    int kernel_size = 5;
    int dense_units = 64;
    int batch_size = 32;
    int epochs = 5;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
};

// Row 0 is padding, row 1 unknown tokens (both zero); vocabulary entry i is row i + 2.
inline constexpr int kPadIndex = 0;
inline constexpr int kOovIndex = 1;

struct CnnParameters {
    // conv[o] is the D x F weight block applied to the token at window offset o.
    std::vector<Matrix> conv;
    Vector conv_bias;
    Matrix dense;  // F x H
    Vector dense_bias;
    Matrix output;  // H x 2
    Vector output_bias;
};

struct Activations {
    int windows = 0;                 // max_len - kernel_size + 1
    std::vector<int> argmax;         // per filter; -1 when the maximum is an all-padding window
    Vector pooled;                   // F
    Vector hidden;                   // H
    std::array<double, 2> probabilities{};
};

class CnnModel {
public:
    CnnModel() = default;
    // Copies the word vectors into a frozen embedding layer and draws the
    // remaining parameters uniformly from [-0.05, 0.05].
    static CnnModel build(const embeddings::WordEmbeddingModel& m, const CnnConfig& cfg);

    const CnnConfig& config() const { return config_; }
    std::size_t embed_dim() const { return static_cast<std::size_t>(embedding_.cols()); }
    const Matrix& embedding() const { return embedding_; }
    const CnnParameters& parameters() const { return params_; }
    CnnParameters& parameters() { return params_; }

    // Token indices, truncated to max_len and post-padded with kPadIndex.
    std::vector<int> encode(const std::vector<std::string>& tokens) const;

    Activations forward(std::span<const int> indices) const;
    std::array<double, 2> predict_proba(std::span<const int> indices) const { return forward(indices).probabilities; }

    // Mean cross-entropy over the batch; `grad`, when given, receives its gradient.
    double loss(std::span<const std::vector<int>> batch, std::span<const int> labels, CnnParameters* grad = nullptr) const;

    std::uint64_t embedding_hash() const;

private:
    friend CnnModel load_cnn(const std::string& path, const embeddings::WordEmbeddingModel& m);

    CnnConfig config_;
    std::unordered_map<std::string, int> index_;
    Matrix embedding_;
    CnnParameters params_;
};

struct TrainResult {
    std::vector<double> epoch_loss;
};

// Adam on mini-batches; the embedding layer never changes.
TrainResult train_cnn(CnnModel& model, const std::vector<std::vector<int>>& sequences, std::span<const int> labels);

struct GradientCheck {
    double conv = 0;
    double conv_bias = 0;
    double dense = 0;
    double dense_bias = 0;
    double output = 0;
    double output_bias = 0;
    double max() const;
};

// Analytic against central differences (h = 1e-5), as max relative error per parameter block.
GradientCheck gradient_check(const CnnModel& model, std::span<const std::vector<int>> batch, std::span<const int> labels,
                             double h = 1e-5);

// Config and trainable weights; the embedding layer is rebuilt from the word
// model on load and checked against the stored hash.
void save_cnn(const CnnModel& model, const std::string& path);
CnnModel load_cnn(const std::string& path, const embeddings::WordEmbeddingModel& m);

}  // namespace metacomment::neural
