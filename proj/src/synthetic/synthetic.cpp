#include "metacomment/synthetic.hpp"

#include <algorithm>

#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"

namespace metacomment::synthetic {

namespace {

using corpus::Label;

const std::array<std::vector<std::string>, 3> kKeywords = {{
    {"Redaktion", "Medien", "Berichterstattung", "Zeitung", "Magazin", "Presse", "Spiegel", "Medienhaus"},
    {"Autor", "Artikel", "Journalist", "Redakteur", "Reporter", "Kolumnist", "Verfasser", "Schreiberling"},
    {"Moderator", "Zensur", "Moderation", "Admin", "Sysop", "Forenregeln", "Löschung", "Netiquette"},
}};

const std::vector<std::string> kTopics = {
    "Regierung", "Steuer",   "Wahl",     "Partei",   "Minister", "Euro",    "Markt",   "Bank",
    "Klima",     "Energie",  "Schule",   "Bahn",     "Mieten",   "Rente",   "Gesetz",  "Grenze",
    "Kanzlerin", "Haushalt", "Export",   "Industrie", "Umwelt",  "Verkehr", "Arbeit",  "Löhne",
    "Inflation", "Europa",   "Amerika",  "China",    "Gipfel",   "Verband", "Krise",   "Reform",
};

const std::vector<std::string> kVerbs = {"kritisiert", "fordert", "plant", "verliert", "gewinnt", "erklärt",
                                         "verhandelt", "blockiert", "unterstützt", "ignoriert"};

const std::vector<std::string> kMetaOpeners = {
    "Was soll das, liebe {K}?",
    "Die {K} hat hier wieder einmal schlampig gearbeitet.",
    "Warum wird die {K} nie kritisch hinterfragt?",
    "Mit Verlaub, diese {K} ist einfach peinlich.",
    "Sie als {K} sollten das eigentlich besser wissen.",
    "Danke an die {K} für diese klare Darstellung.",
    "Schon wieder so ein Text, liebe {K}.",
};

const std::vector<std::string> kTopicSentences = {
    "Die {T} {V} die {T} seit Jahren.",
    "Ohne eine echte {T} wird die {T} nicht besser.",
    "Am Ende zahlt der Bürger für {T} und {T}.",
    "Ich glaube nicht, dass die {T} die {T} lösen kann.",
    "Wer die {T} kennt, weiß was mit der {T} passiert.",
    "Die Debatte um {T} und {T} ist längst überfällig.",
    "Interessant ist vor allem, wie die {T} {V}.",
};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[static_cast<std::size_t>(rng.below(v.size()))];
}

std::vector<std::string> half(const std::vector<std::string>& v, int dialect) {
    if (dialect == 0) return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2)};
    return {v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end()};
}

std::string fill(std::string tmpl, Rng& rng, const std::vector<std::string>& topics, const std::string& keyword) {
    for (;;) {
        auto pos = tmpl.find('{');
        if (pos == std::string::npos) break;
        const char slot = tmpl[pos + 1];
        std::string value = slot == 'K' ? keyword : slot == 'T' ? pick(rng, topics) : pick(rng, kVerbs);
        tmpl.replace(pos, 3, value);
    }
    return tmpl;
}

}  // namespace

std::array<std::vector<std::string>, 3> keywords(int dialect) {
    std::array<std::vector<std::string>, 3> out;
    for (std::size_t i = 0; i < 3; ++i) out[i] = half(kKeywords[i], dialect);
    return out;
}

std::vector<std::string> topic_words(int dialect) { return half(kTopics, dialect); }

corpus::LabeledDataset generate(const Options& o) {
    if (o.dialect != 0 && o.dialect != 1) throw InvalidArgument("dialect must be 0 or 1");
    if (!(o.meta_share >= 0 && o.meta_share <= 1) || !(o.multi_share >= 0 && o.multi_share <= 1)) {
        throw InvalidArgument("shares must lie in [0, 1]");
    }
    Rng rng(derive_seed(o.seed, "synthetic-corpus"));
    const auto kw = keywords(o.dialect);
    const auto topics = topic_words(o.dialect);
    static const std::vector<std::string> departments = {"politik", "wirtschaft", "panorama", "kultur",
                                                         "wissenschaft", "netzwelt", "sport"};
    std::vector<corpus::Entry> entries;
    entries.reserve(o.n_comments);
    for (std::size_t i = 0; i < o.n_comments; ++i) {
        corpus::Entry e;
        auto& c = e.comment;
        c.id = o.id_prefix + "-" + std::to_string(i + 1);
        const bool meta = rng.uniform() < o.meta_share;
        std::vector<std::string> sentences;
        const int n_topic = 1 + static_cast<int>(rng.below(3));
        for (int s = 0; s < n_topic; ++s) sentences.push_back(fill(pick(rng, kTopicSentences), rng, topics, ""));
        if (meta) {
            e.labels.insert(Label::Meta);
            std::vector<std::size_t> classes = {static_cast<std::size_t>(rng.below(3))};
            if (rng.uniform() < o.multi_share) classes.push_back((classes[0] + 1 + rng.below(2)) % 3);
            for (auto cls : classes) {
                e.labels.insert(corpus::kAddressees[cls]);
                auto sentence = fill(pick(rng, kMetaOpeners), rng, topics, pick(rng, kw[cls]));
                const auto at = static_cast<std::size_t>(rng.below(sentences.size() + 1));
                sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(at), std::move(sentence));
            }
        } else {
            e.labels.insert(Label::NonMeta);
        }
        for (std::size_t s = 0; s < sentences.size(); ++s) c.text += (s ? " " : "") + sentences[s];
        c.title = rng.uniform() < 0.5 ? pick(rng, topics) + " und " + pick(rng, topics) : "";
        c.timestamp = corpus::Timestamp{2018, 1 + static_cast<int>(rng.below(12)), 1 + static_cast<int>(rng.below(28)),
                                        static_cast<int>(rng.below(24)), static_cast<int>(rng.below(60))};
        if (o.metadata) {
            c.username = "user" + std::to_string(rng.below(500));
            c.department = pick(rng, departments);
            c.position = static_cast<std::int64_t>(1 + rng.below(400));
            c.has_quote = rng.uniform() < 0.2;
            c.forum_id = "forum-" + std::to_string(rng.below(50));
        }
        entries.push_back(std::move(e));
    }
    return corpus::LabeledDataset(std::move(entries), o.source_tag);
}

}  // namespace metacomment::synthetic
