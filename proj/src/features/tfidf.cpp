#include "metacomment/features/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "metacomment/util/error.hpp"

namespace metacomment::features {

TfidfModel TfidfModel::fit(const std::vector<textprep::TokenStream>& corpus, const TfidfOptions& options) {
    if (corpus.empty()) throw InvalidArgument("tfidf_fit: empty corpus");
    std::map<std::string, std::size_t> df;
    for (const auto& ts : corpus) {
        auto grams = textprep::ngrams(ts.tokens, options.n_max);
        std::sort(grams.begin(), grams.end());
        grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
        for (auto& g : grams) ++df[g];
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [gram, n] : df) {
        if (n >= std::max<std::size_t>(1, options.min_df)) kept.emplace_back(gram, n);
    }
    if (options.max_features > 0 && kept.size() > options.max_features) {
        std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        kept.resize(options.max_features);
        std::sort(kept.begin(), kept.end());
    }
    std::vector<std::string> vocabulary;
    std::vector<std::size_t> frequencies;
    for (auto& [gram, count] : kept) {
        vocabulary.push_back(gram);
        frequencies.push_back(count);
    }
    return from_parts(options, corpus.size(), std::move(vocabulary), std::move(frequencies));
}

TfidfModel TfidfModel::from_parts(const TfidfOptions& options, std::size_t n_docs, std::vector<std::string> vocabulary,
                                  std::vector<std::size_t> document_frequency) {
    if (n_docs == 0) throw InvalidArgument("tf-idf model without documents");
    if (vocabulary.size() != document_frequency.size()) throw InvalidArgument("one document frequency per n-gram");
    TfidfModel m;
    m.options_ = options;
    m.n_docs_ = n_docs;
    m.vocabulary_ = std::move(vocabulary);
    m.df_ = std::move(document_frequency);
    const double n = static_cast<double>(n_docs);
    for (std::size_t i = 0; i < m.vocabulary_.size(); ++i) {
        if (m.df_[i] == 0 || m.df_[i] > n_docs) throw InvalidArgument("document frequency out of range");
        if (!m.index_.emplace(m.vocabulary_[i], i).second) throw InvalidArgument("duplicate n-gram in vocabulary");
        m.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(m.df_[i]))) + 1.0);
    }
    return m;
}

SparseRow TfidfModel::transform(const textprep::TokenStream& ts) const {
    if (!fitted()) throw StateError("tfidf_transform called before tfidf_fit");
    std::map<std::size_t, double> counts;
    for (const auto& g : textprep::ngrams(ts.tokens, options_.n_max)) {
        if (auto it = index_.find(g); it != index_.end()) counts[it->second] += 1.0;
    }
    SparseRow row;
    row.reserve(counts.size());
    double norm = 0.0;
    for (const auto& [col, tf] : counts) {
        const double w = tf * idf_[col];
        row.emplace_back(col, w);
        norm += w * w;
    }
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (auto& [col, w] : row) w /= norm;
    }
    return row;
}

}  // namespace metacomment::features
