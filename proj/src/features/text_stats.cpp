#include "metacomment/features/text_stats.hpp"

#include <memory>

#include <unicode/regex.h>

#include "metacomment/textprep.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/numeric_io.hpp"
#include "metacomment/util/strings.hpp"
#include "sentiment_de.inc"

namespace metacomment::features {

SentimentLexicon SentimentLexicon::parse(std::string_view content) {
    SentimentLexicon lex;
    std::size_t line_no = 0;
    for (auto line : split(content, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw DataError("sentiment lexicon line " + std::to_string(line_no) + ": expected token<TAB>polarity");
        }
        const double polarity = parse_real(trim(line.substr(tab + 1)), "sentiment polarity");
        if (!(polarity >= -1.0 && polarity <= 1.0)) {
            throw DataError("sentiment lexicon line " + std::to_string(line_no) + ": polarity outside [-1, 1]");
        }
        const auto tokens = textprep::split_whitespace(textprep::normalize(line.substr(0, tab)));
        if (tokens.size() != 1) {
            throw DataError("sentiment lexicon line " + std::to_string(line_no) + ": entry must be a single token");
        }
        lex.entries_[tokens.front()] = polarity;
    }
    return lex;
}

SentimentLexicon SentimentLexicon::load(const std::string& path) { return parse(read_file(path)); }

const SentimentLexicon& SentimentLexicon::german() {
    static const SentimentLexicon lex = parse(kGermanSentimentLexicon);
    return lex;
}

std::optional<double> SentimentLexicon::polarity(std::string_view token) const {
    const auto it = entries_.find(std::string(token));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::size_t count_sie(std::string_view utf8) {
    static const std::unique_ptr<icu::RegexPattern> pattern = [] {
        UErrorCode status = U_ZERO_ERROR;
        UParseError perr;
        std::unique_ptr<icu::RegexPattern> p(
            icu::RegexPattern::compile(icu::UnicodeString(u"[^\\.!?]\\s+Sie"), 0, perr, status));
        if (U_FAILURE(status)) throw Error("Sie pattern failed to compile");
        return p;
    }();
    if (utf8.empty()) return 0;
    const auto text = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::RegexMatcher> matcher(pattern->matcher(text, status));
    std::size_t n = 0;
    while (matcher->find(status) && U_SUCCESS(status)) ++n;
    return n;
}

std::size_t count_questions(std::string_view utf8) {
    std::size_t runs = 0;
    bool in_run = false;
    for (char c : utf8) {
        if (c == '?' && !in_run) ++runs;
        in_run = c == '?';
    }
    return runs;
}

namespace {

struct WordLengths {
    double total = 0;
    double words = 0;
};

WordLengths word_lengths(std::string_view utf8) {
    WordLengths wl;
    for (const auto& word : textprep::split_whitespace(utf8)) {
        auto cps = textprep::to_utf32(word);
        std::size_t lo = 0, hi = cps.size();
        while (lo < hi && textprep::is_punctuation(cps[lo])) ++lo;
        while (hi > lo && textprep::is_punctuation(cps[hi - 1])) --hi;
        if (hi == lo) continue;
        wl.total += static_cast<double>(hi - lo);
        wl.words += 1.0;
    }
    return wl;
}

}  // namespace

TextStats text_stats(const corpus::Comment& c, const SentimentLexicon& lexicon) {
    TextStats s;
    for (const std::string* part : {&c.title, &c.text}) {
        const auto cps = textprep::to_utf32(*part);
        s.length += static_cast<double>(cps.size());
        for (char32_t cp : cps) s.capital_letters += textprep::is_upper(cp) ? 1.0 : 0.0;
        s.sie_count += static_cast<double>(count_sie(*part));
        s.question_count += static_cast<double>(count_questions(*part));
    }
    const auto title_words = word_lengths(c.title);
    const auto text_words = word_lengths(c.text);
    const double words = title_words.words + text_words.words;
    s.avg_word_length = words > 0 ? (title_words.total + text_words.total) / words : 0.0;

    double sum = 0.0;
    std::size_t hits = 0;
    for (const auto& tok : textprep::preprocess(c, nullptr).tokens) {
        if (auto p = lexicon.polarity(tok)) {
            sum += *p;
            ++hits;
        }
    }
    s.sentiment = hits ? sum / static_cast<double>(hits) : 0.0;
    return s;
}

}  // namespace metacomment::features
