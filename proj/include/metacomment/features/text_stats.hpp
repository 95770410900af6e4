#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "metacomment/corpus.hpp"

namespace metacomment::features {

class SentimentLexicon {
public:
    SentimentLexicon() = default;
    // "token<TAB>polarity" per line, polarity in [-1, 1]; '#' comments.
    static SentimentLexicon parse(std::string_view content);
    static SentimentLexicon load(const std::string& path);
    static const SentimentLexicon& german();

    std::optional<double> polarity(std::string_view token) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::unordered_map<std::string, double> entries_;
};

struct TextStats {
    double length = 0;           // characters in title and text
    double avg_word_length = 0;  // characters per whitespace word, edge punctuation stripped
    double capital_letters = 0;
    double sie_count = 0;        // matches of [^\.!?]\s+Sie
    double question_count = 0;   // maximal runs of '?'
    double sentiment = 0;        // mean lexicon polarity over hits
};

std::size_t count_sie(std::string_view utf8);
std::size_t count_questions(std::string_view utf8);

TextStats text_stats(const corpus::Comment& c, const SentimentLexicon& lexicon = SentimentLexicon::german());

}  // namespace metacomment::features
