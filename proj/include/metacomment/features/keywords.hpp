#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "metacomment/corpus.hpp"
#include "metacomment/embeddings.hpp"

namespace metacomment::features {

// Lowercase name used in feature names: media, journalist, moderator, meta, non-meta.
std::string class_slug(corpus::Label label);

struct KeywordSet {
    corpus::Label cls = corpus::Label::Media;
    std::vector<std::string> seeds;
    std::vector<std::string> enriched;
    // Seeds that have no embedding; they stay in `enriched`.
    std::vector<std::string> no_embedding;
};

// One token per line, '#' comments; tokens are lowercased.
std::vector<std::string> parse_keyword_list(std::string_view content);
KeywordSet load_keyword_file(const std::string& path, corpus::Label cls);
void save_keyword_file(const KeywordSet& ks, const std::string& path);

// seeds, then neighbours of in-vocabulary seeds (rank <= top_n, similarity >= min_sim)
// by descending similarity, without duplicates.
KeywordSet enrich_keywords(corpus::Label cls, const std::vector<std::string>& seeds,
                           const embeddings::WordEmbeddingModel& m, std::size_t top_n, double min_sim);

// Case-insensitive whole-word alternation over keywords with optional German
// inflection suffixes (s, es, n, en, in, innen), plus optional raw patterns.
class KeywordPattern {
public:
    KeywordPattern() = default;
    // Throws InvalidArgument when an extra pattern does not compile.
    static KeywordPattern compile(const std::vector<std::string>& keywords,
                                  const std::vector<std::string>& extra_patterns = {});

    std::size_t count(std::string_view utf8) const;
    const std::string& source() const { return source_; }

private:
    std::shared_ptr<const void> pattern_;
    std::string source_;
};

// Matches in the title plus matches in the text.
std::size_t count_pattern_matches(const corpus::Comment& c, const KeywordPattern& pattern);
std::size_t count_pattern_matches(const corpus::Comment& c, const KeywordSet& ks);

}  // namespace metacomment::features
