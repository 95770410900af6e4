#include <algorithm>

#include "metacomment/embeddings.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"
#include "ns_core.hpp"

namespace metacomment::embeddings {

DocEmbeddingModel::DocEmbeddingModel(WordEmbeddingModel words, InferenceParams inference,
                                     std::vector<std::string> doc_ids, DenseMatrix doc_vectors,
                                     std::vector<bool> flagged)
    : words_(std::move(words)), inference_(inference), doc_ids_(std::move(doc_ids)),
      doc_vectors_(std::move(doc_vectors)), flagged_(std::move(flagged)) {
    if (doc_vectors_.rows() != doc_ids_.size() || flagged_.size() != doc_ids_.size()) {
        throw InvalidArgument("doc model: one vector and flag per document id");
    }
    if (doc_vectors_.rows() > 0 && doc_vectors_.cols() != words_.dim()) {
        throw InvalidArgument("doc model: document and word vectors must share dimension");
    }
    if (inference_.steps < 1 || !(inference_.learning_rate > 0.0) || !(inference_.end_learning_rate > 0.0)) {
        throw InvalidArgument("doc model: inference steps and learning rates must be positive");
    }
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        if (!index_.emplace(doc_ids_[i], i).second) throw InvalidArgument("doc model: duplicate id " + doc_ids_[i]);
    }
    if (!words_.counts().empty()) noise_cdf_ = detail::noise_cdf(words_.counts());
}

std::optional<std::size_t> DocEmbeddingModel::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

DocVector DocEmbeddingModel::infer(const textprep::TokenStream& ts) const {
    const std::size_t dim = words_.dim();
    std::vector<std::size_t> sent;
    for (const auto& t : ts.tokens) {
        if (auto idx = words_.find(t)) sent.push_back(*idx);
    }
    DocVector out{std::vector<double>(dim, 0.0), false};
    if (sent.empty()) {
        out.flagged = true;
        return out;
    }
    if (!words_.has_output() || noise_cdf_.empty()) {
        throw StateError("doc model: inference needs output weights and token counts");
    }
    Rng rng(derive_seed(inference_.seed, "infer"));
    for (double& x : out.values) x = (rng.uniform() - 0.5) / static_cast<double>(dim);

    const auto window = static_cast<std::uint64_t>(words_.params().window);
    const int negatives = words_.params().negative_samples;
    const std::size_t n = sent.size();
    const double total = static_cast<double>(n) * inference_.steps;
    std::vector<double> hidden(dim), grad(dim);
    std::size_t done = 0;
    for (int step = 0; step < inference_.steps; ++step) {
        for (std::size_t pos = 0; pos < n; ++pos, ++done) {
            const double lr = inference_.learning_rate -
                              (inference_.learning_rate - inference_.end_learning_rate) * (static_cast<double>(done) / total);
            const auto reach = static_cast<std::size_t>(window - rng.below(window));
            const std::size_t lo = pos >= reach ? pos - reach : 0;
            const std::size_t hi = std::min(n, pos + reach + 1);
            std::copy(out.values.begin(), out.values.end(), hidden.begin());
            std::size_t count = 1;
            for (std::size_t j = lo; j < hi; ++j) {
                if (j == pos) continue;
                const auto row = words_.input().row(sent[j]);
                for (std::size_t k = 0; k < dim; ++k) hidden[k] += row[k];
                ++count;
            }
            const double inv = 1.0 / static_cast<double>(count);
            for (double& h : hidden) h *= inv;
            std::fill(grad.begin(), grad.end(), 0.0);
            detail::ns_predict<false>(hidden, words_.output(), nullptr, sent[pos], noise_cdf_, negatives, rng, lr, grad);
            for (std::size_t k = 0; k < dim; ++k) out.values[k] -= lr * inv * grad[k];
        }
    }
    return out;
}

DocVector DocEmbeddingModel::embed(const textprep::TokenStream& ts) const {
    if (auto row = find(ts.source_id)) {
        const auto v = doc_vector(*row);
        return DocVector{std::vector<double>(v.begin(), v.end()), flagged(*row)};
    }
    return infer(ts);
}

}  // namespace metacomment::embeddings
