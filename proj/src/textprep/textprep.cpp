#include "metacomment/textprep.hpp"

#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/locid.h>

#include "metacomment/util/error.hpp"
#include "metacomment/util/strings.hpp"
#include "stopwords_de.inc"

namespace metacomment::textprep {

StopWords::StopWords(std::vector<std::string> words) {
    for (auto& w : words) words_.insert(std::move(w));
}

StopWords StopWords::parse(std::string_view content) {
    std::vector<std::string> words;
    for (auto line : split(content, '\n')) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        words.emplace_back(line);
    }
    return StopWords(std::move(words));
}

StopWords StopWords::load(const std::string& path) { return parse(read_file(path)); }

const StopWords& StopWords::german() {
    static const StopWords list = parse(kGermanStopWords);
    return list;
}

bool is_punctuation(char32_t cp) {
    switch (cp) {
        case U'«': case U'»': case U'„': case U'“': case U'”': case U'‚': case U'‘': case U'’':
        case U'–': case U'—': case U'…':
            return true;
        default:
            break;
    }
    return u_ispunct(static_cast<UChar32>(cp));
}

bool is_upper(char32_t cp) { return u_isUUppercase(static_cast<UChar32>(cp)); }

std::u32string to_utf32(std::string_view utf8) {
    const auto us = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    std::u32string out;
    out.reserve(static_cast<std::size_t>(us.length()));
    for (int32_t i = 0; i < us.length();) {
        const UChar32 cp = us.char32At(i);
        out.push_back(static_cast<char32_t>(cp));
        i += U16_LENGTH(cp);
    }
    return out;
}

std::string to_utf8(std::u32string_view text) {
    icu::UnicodeString us;
    for (char32_t cp : text) us.append(static_cast<UChar32>(cp));
    std::string out;
    us.toUTF8String(out);
    return out;
}

std::string normalize(std::string_view utf8) {
    auto us = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    icu::UnicodeString stripped;
    for (int32_t i = 0; i < us.length();) {
        const UChar32 cp = us.char32At(i);
        stripped.append(is_punctuation(static_cast<char32_t>(cp)) ? UChar32{' '} : cp);
        i += U16_LENGTH(cp);
    }
    stripped.toLower(icu::Locale::getRoot());
    std::string out;
    stripped.toUTF8String(out);
    return out;
}

std::vector<std::string> split_whitespace(std::string_view utf8) {
    std::vector<std::string> tokens;
    const auto text = to_utf32(utf8);
    std::u32string current;
    for (char32_t cp : text) {
        if (u_isUWhiteSpace(static_cast<UChar32>(cp))) {
            if (!current.empty()) tokens.push_back(to_utf8(current));
            current.clear();
        } else {
            current.push_back(cp);
        }
    }
    if (!current.empty()) tokens.push_back(to_utf8(current));
    return tokens;
}

TokenStream preprocess_text(std::string_view text, const StopWords* stop_words, std::string source_id) {
    TokenStream ts;
    ts.source_id = std::move(source_id);
    for (auto& tok : split_whitespace(normalize(text))) {
        if (stop_words && stop_words->contains(tok)) continue;
        ts.tokens.push_back(std::move(tok));
    }
    return ts;
}

TokenStream preprocess(const corpus::Comment& c, const StopWords* stop_words) {
    std::string joined;
    joined.reserve(c.title.size() + 1 + c.text.size());
    joined += c.title;
    joined += ' ';
    joined += c.text;
    return preprocess_text(joined, stop_words, c.id);
}

TokenStream preprocess(const corpus::Comment& c, bool remove_stopwords) {
    return preprocess(c, remove_stopwords ? &StopWords::german() : nullptr);
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, int n_max) {
    if (n_max != 1 && n_max != 2) throw InvalidArgument("ngrams: n_max must be 1 or 2");
    std::vector<std::string> out(tokens.begin(), tokens.end());
    if (n_max == 2) {
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
            out.push_back(tokens[i] + std::string(kBigramSeparator) + tokens[i + 1]);
        }
    }
    return out;
}

}  // namespace metacomment::textprep
