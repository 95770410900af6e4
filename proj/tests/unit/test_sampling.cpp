#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "metacomment/sampling.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"
#include "metacomment/util/strings.hpp"

using namespace metacomment;
using namespace metacomment::sampling;
using corpus::Label;
using corpus::LabelSet;

namespace {

features::KeywordSet keywords(Label cls, std::vector<std::string> tokens) {
    features::KeywordSet ks;
    ks.cls = cls;
    ks.seeds = tokens;
    ks.enriched = std::move(tokens);
    return ks;
}

corpus::LabeledDataset unlabeled(const std::vector<std::string>& texts) {
    std::vector<corpus::Entry> entries;
    for (std::size_t i = 0; i < texts.size(); ++i) entries.push_back(testing::make_entry("c" + std::to_string(i), texts[i], {}));
    return corpus::LabeledDataset(entries, "fx");
}

std::vector<std::string> ids(const AnnotationBatch& b) {
    std::vector<std::string> out;
    for (const auto& item : b.items) out.push_back(item.comment.id);
    return out;
}

embeddings::WordEmbeddingModel random_words(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < n; ++i) vocab.push_back("w" + std::to_string(i));
    DenseMatrix input(n, dim);
    for (double& x : input.data()) x = rng.uniform(-1, 1);
    embeddings::WordEmbeddingParams p;
    p.dim = static_cast<int>(dim);
    return {p, vocab, std::vector<std::uint64_t>(n, 1), input, DenseMatrix()};
}

// Documents c0, c1, ... with explicit vectors.
embeddings::DocEmbeddingModel doc_model(const embeddings::WordEmbeddingModel& words,
                                        const std::vector<std::vector<double>>& docs) {
    std::vector<std::string> doc_ids;
    DenseMatrix dv(docs.size(), words.dim());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        doc_ids.push_back("c" + std::to_string(i));
        for (std::size_t k = 0; k < words.dim(); ++k) dv(i, k) = docs[i][k];
    }
    return {words, {}, doc_ids, dv, std::vector<bool>(docs.size(), false)};
}

std::vector<double> average(const embeddings::WordEmbeddingModel& m, const std::vector<std::string>& words) {
    std::vector<double> c(m.dim(), 0.0);
    for (const auto& w : words) {
        const auto v = m.vector(w);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += v[k] / static_cast<double>(words.size());
    }
    return c;
}

}  // namespace

TEST_CASE("pattern sampling") {
    const auto ds = unlabeled({"Der Sysop schläft", "Wetter heute", "Moderator bitte", "Zensur!", "nichts", "Zensur 2"});
    const auto mod = keywords(Label::Moderator, {"moderator", "zensur", "sysop"});
    CHECK(sample_by_pattern(ds, mod, 0).items.empty());
    const auto all = sample_by_pattern(ds, mod, 10);
    CHECK(ids(all) == std::vector<std::string>{"c0", "c2", "c3", "c5"});
    CHECK(ids(sample_by_pattern(ds, mod, 2)) == std::vector<std::string>{"c0", "c2"});
    for (const auto& item : all.items) {
        CHECK(item.provenance == Provenance::Pattern);
        CHECK_FALSE(item.score.has_value());
    }
    const auto three = unlabeled({"Autor a", "b", "Autorin c", "d", "Autoren e"});
    CHECK(sample_by_pattern(three, keywords(Label::Journalist, {"autor"}), 10).items.size() == 3);
}

TEST_CASE("similarity sampling: planted comment, oversized n, errors") {
    Rng rng(3);
    std::vector<std::vector<double>> docs(30, std::vector<double>(6));
    for (auto& d : docs) {
        for (auto& x : d) x = rng.uniform(-1, 1);
    }
    const auto words = random_words(10, 6, 4);
    const auto ks = keywords(Label::Media, {"w1", "w4", "unbekannt"});
    docs[17] = average(words, {"w1", "w4"});
    const auto dm = doc_model(words, docs);
    std::vector<std::string> texts(30, "text");
    const auto ds = unlabeled(texts);

    const auto top = sample_by_similarity(ds, ks, words, dm, 5);
    REQUIRE(top.items.size() == 5);
    CHECK(top.items[0].comment.id == "c17");
    CHECK(*top.items[0].score == doctest::Approx(1.0).epsilon(1e-12));

    const auto whole = sample_by_similarity(ds, ks, words, dm, 1000);
    CHECK(whole.items.size() == 30);
    for (std::size_t i = 1; i < whole.items.size(); ++i) CHECK(*whole.items[i - 1].score >= *whole.items[i].score);
    const auto whole_ids = ids(whole);
    CHECK(std::set<std::string>(whole_ids.begin(), whole_ids.end()).size() == 30);

    CHECK_THROWS_AS(sample_by_similarity(ds, keywords(Label::Media, {"qq"}), words, dm, 5), InvalidArgument);
}

TEST_CASE("similarity sampling ranks an on-topic cluster first for at least 95 of 100 seeds") {
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const std::size_t dim = 16, n = 200, cluster = 20;
        std::vector<std::vector<double>> docs(n, std::vector<double>(dim));
        const auto words = random_words(30, dim, seed);
        const auto centre = average(words, {"w2", "w3", "w5"});
        std::vector<std::size_t> members(n);
        for (std::size_t i = 0; i < n; ++i) members[i] = i;
        rng.shuffle(std::span<std::size_t>(members));
        members.resize(cluster);
        const std::set<std::size_t> on_topic(members.begin(), members.end());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < dim; ++k) {
                docs[i][k] = on_topic.count(i) ? centre[k] + 0.15 * rng.normal() : rng.normal();
            }
        }
        const auto dm = doc_model(words, docs);
        const auto ds = unlabeled(std::vector<std::string>(n, "x"));
        const auto batch = sample_by_similarity(ds, keywords(Label::Journalist, {"w2", "w3", "w5"}), words, dm, cluster);
        bool all = true;
        for (const auto& item : batch.items) all &= on_topic.count(std::stoul(item.comment.id.substr(1))) == 1;
        wins += all ? 1 : 0;
    }
    CHECK(wins >= 95);
}

TEST_CASE("random sampling is seeded and duplicate-free") {
    const auto ds = unlabeled(std::vector<std::string>(50, "x"));
    const auto a = sample_random(ds, 20, 7);
    CHECK(ids(a) == ids(sample_random(ds, 20, 7)));
    CHECK(ids(a) != ids(sample_random(ds, 20, 8)));
    const auto a_ids = ids(a);
    CHECK(std::set<std::string>(a_ids.begin(), a_ids.end()).size() == 20);
    CHECK(sample_random(ds, 80, 1).items.size() == 50);
}

TEST_CASE("merging batches: pattern provenance wins") {
    const auto ds = unlabeled({"a", "b", "c"});
    AnnotationBatch sim{"s", {{ds[0].comment, Provenance::Similarity, 0.9}, {ds[1].comment, Provenance::Similarity, 0.5}}};
    AnnotationBatch pat{"p", {{ds[1].comment, Provenance::Pattern, {}}, {ds[2].comment, Provenance::Pattern, {}}}};
    const auto m = merge_batches({sim, pat}, "all");
    CHECK(ids(m) == std::vector<std::string>{"c0", "c1", "c2"});
    CHECK(m.items[1].provenance == Provenance::Pattern);
    CHECK(m.batch_id == "all");
}

TEST_CASE("batch CSV round-trip") {
    const auto ds = unlabeled({"Text, mit Komma", "Zeile\nzwei", "\"zitiert\""});
    const AnnotationBatch b{"b1", {{ds[0].comment, Provenance::Pattern, {}}, {ds[1].comment, Provenance::Similarity, 0.25},
                                    {ds[2].comment, Provenance::Random, {}}}};
    std::ostringstream out;
    write_batch_csv(b, out);
    const auto text = out.str();
    CHECK(text.rfind("# labels: Meta;Media;Journalist;Moderator;NonMeta", 0) == 0);
    CHECK(read_batch_csv(text).empty());  // nothing coded yet

    const auto rows = parse_csv(text.substr(text.find('\n') + 1));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"batch_id", "comment_id", "title", "text", "provenance", "score", "label"});
    CHECK(rows[2][3] == "Zeile\nzwei");
    CHECK(rows[2][5] == "0.25");

    const std::string coded =
        "batch_id,comment_id,title,text,provenance,score,label\n"
        "b1,c0,,x,pattern,,Meta;Media\n"
        "b1,c1,,y,similarity,0.25,NonMeta\n"
        "b1,c2,,z,random,,\n";
    const auto back = read_batch_csv(coded);
    REQUIRE(back.size() == 2);
    CHECK(back[0].labels == LabelSet{Label::Meta, Label::Media});
    CHECK_THROWS_AS(read_batch_csv("batch_id,comment_id,label\nb,c0,Spam\n"), DataError);
    CHECK_THROWS_AS(read_batch_csv("batch_id,comment_id,label\nb,c0,NonMeta;Media\n"), DataError);
    CHECK_THROWS_AS(read_batch_csv("batch_id,label\n"), DataError);
}

TEST_CASE("merging annotations") {
    const auto ds = unlabeled({"a", "b", "c", "d", "e"});
    const LabelSet non{Label::NonMeta}, meta{Label::Meta}, media{Label::Meta, Label::Media},
        mod{Label::Meta, Label::Moderator};
    // three coders; hand tally: c0 Meta (2 of 3), c1 NonMeta (3 of 3), c2 flagged (all differ),
    // c3 Meta+Media (2 of 3), c4 NonMeta (2 of 3)
    const std::vector<CodedComment> coded = {
        {"c0", meta}, {"c1", non}, {"c2", meta},  {"c3", media}, {"c4", non},
        {"c0", meta}, {"c1", non}, {"c2", media}, {"c3", mod},   {"c4", meta},
        {"c0", non},  {"c1", non}, {"c2", mod},   {"c3", media}, {"c4", non},
    };
    const auto r = merge_annotations(ds, coded, MergePolicy::Majority);
    CHECK(r.flagged == std::vector<std::string>{"c2"});
    CHECK(r.merged.size() == 4);
    CHECK(r.dataset.count(Label::Meta) == 2);
    CHECK(r.dataset.count(Label::NonMeta) == 2);
    CHECK(r.dataset.count(Label::Media) == 1);
    CHECK(r.dataset.count(Label::Moderator) == 0);
    CHECK(r.dataset[2].labels.empty());
    CHECK(r.dataset[3].labels == media);

    const auto strict = merge_annotations(ds, coded, MergePolicy::Strict);
    CHECK(strict.merged == std::vector<std::string>{"c1"});
    CHECK(strict.flagged.size() == 4);

    CHECK_THROWS_AS(merge_annotations(ds, {{"zz", meta}}, MergePolicy::Majority), DataError);
    CHECK(parse_merge_policy("strict") == MergePolicy::Strict);
    CHECK_THROWS_AS(parse_merge_policy("vote"), InvalidArgument);
}
