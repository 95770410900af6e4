#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "metacomment/corpus.hpp"

namespace metacomment::textprep {

struct TokenStream {
    std::vector<std::string> tokens;
    std::string source_id;

    friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

class StopWords {
public:
    StopWords() = default;
    explicit StopWords(std::vector<std::string> words);

    // One lowercase token per line; blank lines and lines starting with '#' ignored.
    static StopWords parse(std::string_view content);
    static StopWords load(const std::string& path);
    // The shipped German list.
    static const StopWords& german();

    bool contains(std::string_view token) const { return words_.count(std::string(token)) > 0; }
    std::size_t size() const { return words_.size(); }

private:
    std::unordered_set<std::string> words_;
};

// True for Unicode P* code points and the extra quote/dash marks.
bool is_punctuation(char32_t cp);

// Replaces punctuation by spaces and lowercases (full Unicode case mapping).
std::string normalize(std::string_view utf8);

// Splits on Unicode whitespace.
std::vector<std::string> split_whitespace(std::string_view utf8);

// title + " " + text -> strip punctuation -> lowercase -> split -> drop stop words.
TokenStream preprocess(const corpus::Comment& c, const StopWords* stop_words);
TokenStream preprocess(const corpus::Comment& c, bool remove_stopwords);
TokenStream preprocess_text(std::string_view text, const StopWords* stop_words, std::string source_id = {});

inline constexpr std::string_view kBigramSeparator = "_";

// Unigrams followed by adjacent-token bigrams, each in input order. n_max is 1 or 2.
std::vector<std::string> ngrams(const std::vector<std::string>& tokens, int n_max = 2);

// UTF-8 helpers shared by the feature extractors.
std::u32string to_utf32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);
bool is_upper(char32_t cp);

}  // namespace metacomment::textprep
