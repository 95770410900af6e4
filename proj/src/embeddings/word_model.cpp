#include <algorithm>
#include <cmath>
#include <numeric>

#include "metacomment/embeddings.hpp"
#include "metacomment/util/error.hpp"

namespace metacomment::embeddings {

std::string_view method_name(Method m) { return m == Method::CBOW ? "cbow" : "skipgram"; }

Method parse_method(std::string_view name) {
    if (name == "cbow" || name == "CBOW") return Method::CBOW;
    if (name == "skipgram" || name == "SkipGram" || name == "skip-gram") return Method::SkipGram;
    throw InvalidArgument("unknown embedding method '" + std::string(name) + "'");
}

void WordEmbeddingParams::validate() const {
    if (dim < 1 || window < 1 || min_count < 1 || epochs < 1 || negative_samples < 1 || workers < 1) {
        throw InvalidArgument("embedding params: dim, window, min_count, epochs, negative_samples and workers must be >= 1");
    }
    if (!(start_learning_rate > 0.0) || !(end_learning_rate > 0.0)) {
        throw InvalidArgument("embedding params: learning rates must be positive");
    }
}

WordEmbeddingModel::WordEmbeddingModel(WordEmbeddingParams params, std::vector<std::string> vocab,
                                       std::vector<std::uint64_t> counts, DenseMatrix input, DenseMatrix output)
    : params_(params), vocab_(std::move(vocab)), counts_(std::move(counts)), input_(std::move(input)),
      output_(std::move(output)) {
    if (input_.rows() != vocab_.size()) throw InvalidArgument("embedding model: one vector row per vocabulary entry");
    if (!counts_.empty() && counts_.size() != vocab_.size()) throw InvalidArgument("embedding model: counts size");
    if (output_.rows() != 0 && (output_.rows() != input_.rows() || output_.cols() != input_.cols())) {
        throw InvalidArgument("embedding model: output weights shape");
    }
    for (double v : input_.data()) {
        if (!std::isfinite(v)) throw InvalidArgument("embedding model: non-finite vector component");
    }
    index_.reserve(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        if (!index_.emplace(vocab_[i], i).second) throw InvalidArgument("embedding model: duplicate token " + vocab_[i]);
    }
    params_.dim = static_cast<int>(input_.cols());
}

std::optional<std::size_t> WordEmbeddingModel::find(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const double> WordEmbeddingModel::vector(std::string_view token) const {
    const auto idx = find(token);
    if (!idx) throw InvalidArgument("word not in vocabulary: '" + std::string(token) + "'");
    return input_.row(*idx);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw InvalidArgument("cosine_similarity: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                              std::to_string(v.size()) + ")");
    }
    double uv = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) return 0.0;
    return std::clamp(uv / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

std::vector<Neighbor> most_similar(const WordEmbeddingModel& m, std::span<const double> query, std::size_t n,
                                   std::optional<std::size_t> exclude) {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (exclude && *exclude == i) continue;
        scored.emplace_back(cosine_similarity(query, m.vector(i)), i);
    }
    const std::size_t take = std::min(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    std::vector<Neighbor> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.emplace_back(m.vocab()[scored[i].second], scored[i].first);
    return out;
}

std::vector<Neighbor> most_similar(const WordEmbeddingModel& m, std::string_view word, std::size_t n) {
    const auto idx = m.find(word);
    if (!idx) throw InvalidArgument("word not in vocabulary: '" + std::string(word) + "'");
    if (n == 0) return {};
    return most_similar(m, m.vector(*idx), n, idx);
}

}  // namespace metacomment::embeddings
