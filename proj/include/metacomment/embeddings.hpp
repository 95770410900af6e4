#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "metacomment/textprep.hpp"
#include "metacomment/util/dense.hpp"

namespace metacomment::embeddings {

enum class Method { CBOW, SkipGram };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

struct WordEmbeddingParams {
    int dim = 300;
    int window = 5;
    int min_count = 50;
    int epochs = 5;
    Method method = Method::CBOW;
    int negative_samples = 5;
    std::uint64_t seed = 1;
    double start_learning_rate = 0.025;
    double end_learning_rate = 0.0001;
    // 1 = deterministic. >1 = lock-free concurrent updates; results vary run to run.
    int workers = 1;

    void validate() const;
};

class WordEmbeddingModel {
public:
    WordEmbeddingModel() = default;
    // `output` may be empty for models loaded from a bare vector file.
    WordEmbeddingModel(WordEmbeddingParams params, std::vector<std::string> vocab, std::vector<std::uint64_t> counts,
                       DenseMatrix input, DenseMatrix output);

    const WordEmbeddingParams& params() const { return params_; }
    std::size_t size() const { return vocab_.size(); }
    std::size_t dim() const { return input_.cols(); }
    const std::vector<std::string>& vocab() const { return vocab_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }

    std::optional<std::size_t> find(std::string_view token) const;
    bool contains(std::string_view token) const { return find(token).has_value(); }
    std::span<const double> vector(std::size_t index) const { return input_.row(index); }
    // Throws InvalidArgument naming the token when it is out of vocabulary.
    std::span<const double> vector(std::string_view token) const;

    const DenseMatrix& input() const { return input_; }
    const DenseMatrix& output() const { return output_; }
    bool has_output() const { return output_.rows() == input_.rows() && output_.rows() > 0; }

    std::vector<double> epoch_loss;

private:
    WordEmbeddingParams params_;
    std::vector<std::string> vocab_;
    std::vector<std::uint64_t> counts_;
    std::unordered_map<std::string, std::size_t> index_;
    DenseMatrix input_;
    DenseMatrix output_;
};

WordEmbeddingModel train_word_embeddings(const std::vector<textprep::TokenStream>& corpus,
                                         const WordEmbeddingParams& params);

double cosine_similarity(std::span<const double> u, std::span<const double> v);
inline double cosine_distance(std::span<const double> u, std::span<const double> v) {
    return 1.0 - cosine_similarity(u, v);
}

using Neighbor = std::pair<std::string, double>;

// Query word excluded; sorted by descending similarity, ties by vocabulary order.
std::vector<Neighbor> most_similar(const WordEmbeddingModel& m, std::string_view word, std::size_t n);
std::vector<Neighbor> most_similar(const WordEmbeddingModel& m, std::span<const double> query, std::size_t n,
                                   std::optional<std::size_t> exclude = std::nullopt);

struct InferenceParams {
    int steps = 50;
    double learning_rate = 0.025;
    double end_learning_rate = 0.0001;
    std::uint64_t seed = 1;
};

struct DocEmbeddingParams {
    WordEmbeddingParams word;
    InferenceParams inference;
};

struct DocVector {
    std::vector<double> values;
    // Set when no token was in vocabulary; the vector is then all zeros.
    bool flagged = false;
};

class DocEmbeddingModel {
public:
    DocEmbeddingModel() = default;
    DocEmbeddingModel(WordEmbeddingModel words, InferenceParams inference, std::vector<std::string> doc_ids,
                      DenseMatrix doc_vectors, std::vector<bool> flagged);

    const WordEmbeddingModel& words() const { return words_; }
    const InferenceParams& inference() const { return inference_; }
    std::size_t dim() const { return words_.dim(); }
    std::size_t size() const { return doc_ids_.size(); }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const DenseMatrix& doc_vectors() const { return doc_vectors_; }

    std::optional<std::size_t> find(std::string_view id) const;
    std::span<const double> doc_vector(std::size_t row) const { return doc_vectors_.row(row); }
    bool flagged(std::size_t row) const { return flagged_[row]; }

    // Gradient steps on a fresh document vector with every word and output weight held fixed.
    DocVector infer(const textprep::TokenStream& ts) const;

    // The trained vector when the id is known, otherwise an inferred one.
    DocVector embed(const textprep::TokenStream& ts) const;

private:
    WordEmbeddingModel words_;
    InferenceParams inference_;
    std::vector<std::string> doc_ids_;
    DenseMatrix doc_vectors_;
    std::vector<bool> flagged_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<double> noise_cdf_;
};

// Distributed-memory paragraph vectors: the document vector joins the
// averaged CBOW context. Word vectors are trained jointly.
DocEmbeddingModel train_doc_embeddings(const std::vector<textprep::TokenStream>& corpus,
                                       const DocEmbeddingParams& params);

// Negative-sampling objective of a single prediction, exposed for gradient checks.
// hidden = mean(input rows of `context` [+ doc]); loss = -log s(o_t.h) - sum_n log s(-o_n.h).
// Negatives equal to the target are skipped.
struct NsExample {
    std::vector<std::size_t> context;
    std::size_t target = 0;
    std::vector<std::size_t> negatives;
};

struct NsGradient {
    DenseMatrix input;
    DenseMatrix output;
    std::vector<double> doc;
};

double ns_loss(const DenseMatrix& input, const DenseMatrix& output, const NsExample& ex,
               std::span<const double> doc = {});
double ns_loss_and_gradient(const DenseMatrix& input, const DenseMatrix& output, const NsExample& ex,
                            NsGradient& grad, std::span<const double> doc = {});

// Text model files: "<prefix>.vec" ("V D" then "token x1 .. xD"), "<prefix>.out.vec"
// (negative-sampling weights) and "<prefix>.meta.json" (params, counts, losses).
void save_word_model(const WordEmbeddingModel& m, const std::string& prefix);
// The out/meta companions are optional; a bare .vec file loads as a query-only model.
WordEmbeddingModel load_word_model(const std::string& prefix);
void save_doc_model(const DocEmbeddingModel& m, const std::string& prefix);
DocEmbeddingModel load_doc_model(const std::string& prefix);

void write_vectors(std::ostream& out, const std::vector<std::string>& keys, const DenseMatrix& m);
std::pair<std::vector<std::string>, DenseMatrix> read_vectors(std::istream& in, const std::string& what);

}  // namespace metacomment::embeddings
