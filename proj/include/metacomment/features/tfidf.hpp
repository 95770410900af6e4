#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "metacomment/textprep.hpp"

namespace metacomment::features {

struct TfidfOptions {
    int n_max = 2;
    std::size_t min_df = 1;
    // 0 keeps every n-gram; otherwise the most frequent by document frequency.
    std::size_t max_features = 0;
};

using SparseRow = std::vector<std::pair<std::size_t, double>>;

// tf = raw count, idf = ln((1 + N) / (1 + df)) + 1, rows L2-normalised.
// Columns are the n-grams in lexicographic order.
class TfidfModel {
public:
    TfidfModel() = default;
    static TfidfModel fit(const std::vector<textprep::TokenStream>& corpus, const TfidfOptions& options = {});
    // Rebuilds a fitted model from its vocabulary and document frequencies.
    static TfidfModel from_parts(const TfidfOptions& options, std::size_t n_docs, std::vector<std::string> vocabulary,
                                 std::vector<std::size_t> document_frequency);

    bool fitted() const { return n_docs_ > 0; }
    SparseRow transform(const textprep::TokenStream& ts) const;

    const std::vector<std::string>& vocabulary() const { return vocabulary_; }
    std::size_t document_frequency(std::size_t column) const { return df_[column]; }
    double idf(std::size_t column) const { return idf_[column]; }
    std::size_t n_docs() const { return n_docs_; }
    const TfidfOptions& options() const { return options_; }

private:
    TfidfOptions options_;
    std::vector<std::string> vocabulary_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> df_;
    std::vector<double> idf_;
    std::size_t n_docs_ = 0;
};

}  // namespace metacomment::features
