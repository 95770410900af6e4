#include "metacomment/features/keywords.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <unicode/locid.h>
#include <unicode/regex.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "metacomment/util/error.hpp"
#include "metacomment/util/strings.hpp"

namespace metacomment::features {

using corpus::Label;

std::string class_slug(Label label) {
    switch (label) {
        case Label::Media: return "media";
        case Label::Journalist: return "journalist";
        case Label::Moderator: return "moderator";
        case Label::Meta: return "meta";
        case Label::NonMeta: return "non-meta";
    }
    return "?";
}

namespace {

std::string lowercase(std::string_view utf8) {
    auto us = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    us.toLower(icu::Locale::getRoot());
    std::string out;
    us.toUTF8String(out);
    return out;
}

// Escapes every non-alphanumeric code point; runs of whitespace become \s+.
std::string keyword_regex(std::string_view keyword) {
    const auto us = icu::UnicodeString::fromUTF8(icu::StringPiece(keyword.data(), static_cast<int32_t>(keyword.size())));
    icu::UnicodeString out;
    bool in_space = false;
    for (int32_t i = 0; i < us.length();) {
        const UChar32 cp = us.char32At(i);
        i += U16_LENGTH(cp);
        if (u_isUWhiteSpace(cp)) {
            if (!in_space) out.append(icu::UnicodeString(u"\\s+"));
            in_space = true;
            continue;
        }
        in_space = false;
        if (!u_isalnum(cp)) out.append(UChar32{'\\'});
        out.append(cp);
    }
    std::string s;
    out.toUTF8String(s);
    return s;
}

}  // namespace

std::vector<std::string> parse_keyword_list(std::string_view content) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (auto line : split(content, '\n')) {
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto token = lowercase(line);
        if (seen.insert(token).second) out.push_back(std::move(token));
    }
    return out;
}

KeywordSet load_keyword_file(const std::string& path, Label cls) {
    KeywordSet ks;
    ks.cls = cls;
    ks.seeds = parse_keyword_list(read_file(path));
    ks.enriched = ks.seeds;
    return ks;
}

void save_keyword_file(const KeywordSet& ks, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << "# " << class_slug(ks.cls) << " keywords: " << ks.seeds.size() << " seeds, "
        << ks.enriched.size() - ks.seeds.size() << " from embedding neighbours\n";
    for (const auto& t : ks.enriched) out << t << '\n';
}

KeywordSet enrich_keywords(Label cls, const std::vector<std::string>& seeds, const embeddings::WordEmbeddingModel& m,
                           std::size_t top_n, double min_sim) {
    if (min_sim < 0.0 || min_sim > 1.0) throw InvalidArgument("enrich_keywords: min_sim must lie in [0, 1]");
    KeywordSet ks;
    ks.cls = cls;
    std::unordered_set<std::string> present;
    for (const auto& s : seeds) {
        auto token = lowercase(s);
        if (present.insert(token).second) ks.seeds.push_back(std::move(token));
    }
    ks.enriched = ks.seeds;
    std::vector<embeddings::Neighbor> candidates;
    for (const auto& seed : ks.seeds) {
        if (!m.contains(seed)) {
            ks.no_embedding.push_back(seed);
            continue;
        }
        if (top_n == 0) continue;
        for (auto& nb : embeddings::most_similar(m, seed, top_n)) {
            if (nb.second >= min_sim) candidates.push_back(std::move(nb));
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (auto& [token, sim] : candidates) {
        if (present.insert(token).second) ks.enriched.push_back(token);
    }
    return ks;
}

KeywordPattern KeywordPattern::compile(const std::vector<std::string>& keywords,
                                       const std::vector<std::string>& extra_patterns) {
    std::vector<std::string> words(keywords.begin(), keywords.end());
    std::erase_if(words, [](const std::string& w) { return trim(w).empty(); });
    // Longest first so a keyword never shadows a longer one sharing its prefix.
    std::stable_sort(words.begin(), words.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
    std::vector<std::string> alternatives;
    if (!words.empty()) {
        std::string alt;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) alt += '|';
            alt += keyword_regex(words[i]);
        }
        alternatives.push_back("(?<![\\p{L}\\p{N}_])(?:" + alt + ")(?:innen|in|en|es|n|s)?(?![\\p{L}\\p{N}_])");
    }
    for (const auto& extra : extra_patterns) {
        UErrorCode status = U_ZERO_ERROR;
        UParseError perr;
        std::unique_ptr<icu::RegexPattern> probe(icu::RegexPattern::compile(
            icu::UnicodeString::fromUTF8(extra), UREGEX_CASE_INSENSITIVE, perr, status));
        if (U_FAILURE(status)) {
            throw InvalidArgument("invalid pattern '" + extra + "': " + u_errorName(status) + " at offset " +
                                  std::to_string(perr.offset));
        }
        alternatives.push_back("(?:" + extra + ")");
    }
    KeywordPattern kp;
    if (alternatives.empty()) return kp;
    for (std::size_t i = 0; i < alternatives.size(); ++i) {
        if (i) kp.source_ += '|';
        kp.source_ += alternatives[i];
    }
    UErrorCode status = U_ZERO_ERROR;
    UParseError perr;
    std::shared_ptr<icu::RegexPattern> compiled(
        icu::RegexPattern::compile(icu::UnicodeString::fromUTF8(kp.source_), UREGEX_CASE_INSENSITIVE, perr, status));
    if (U_FAILURE(status)) throw InvalidArgument("keyword pattern does not compile: " + std::string(u_errorName(status)));
    kp.pattern_ = std::move(compiled);
    return kp;
}

std::size_t KeywordPattern::count(std::string_view utf8) const {
    if (!pattern_ || utf8.empty()) return 0;
    const auto* pattern = static_cast<const icu::RegexPattern*>(pattern_.get());
    const auto text = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::RegexMatcher> matcher(pattern->matcher(text, status));
    if (U_FAILURE(status)) throw Error("regex matcher: " + std::string(u_errorName(status)));
    std::size_t n = 0;
    while (matcher->find(status) && U_SUCCESS(status)) ++n;
    return n;
}

std::size_t count_pattern_matches(const corpus::Comment& c, const KeywordPattern& pattern) {
    return pattern.count(c.title) + pattern.count(c.text);
}

std::size_t count_pattern_matches(const corpus::Comment& c, const KeywordSet& ks) {
    return count_pattern_matches(c, KeywordPattern::compile(ks.enriched));
}

}  // namespace metacomment::features
