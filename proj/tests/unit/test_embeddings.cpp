#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "metacomment/embeddings.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/hash.hpp"
#include "metacomment/util/random.hpp"
#include "metacomment/util/strings.hpp"

using namespace metacomment;
using namespace metacomment::embeddings;

namespace {

WordEmbeddingParams toy_params(std::uint64_t seed) {
    WordEmbeddingParams p;
    p.dim = 10;
    p.window = 2;
    p.min_count = 1;
    p.epochs = 15;
    p.seed = seed;
    return p;
}

double rel_error(double a, double n) { return std::abs(a - n) / std::max(std::abs(a) + std::abs(n), 1e-6); }

DenseMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    DenseMatrix m(r, c);
    for (double& x : m.data()) x = rng.uniform(-0.5, 0.5);
    return m;
}

}  // namespace

TEST_CASE("cosine similarity and distance") {
    const std::vector<double> u = {1, 0}, v = {0, 1}, w = {0.5, 0.5}, z = {0, 0};
    CHECK(cosine_distance(u, u) == doctest::Approx(0.0));
    CHECK(cosine_distance(u, v) == doctest::Approx(1.0));
    CHECK(cosine_distance(u, w) == doctest::Approx(1.0 - std::sqrt(2.0) / 2.0).epsilon(1e-12));
    CHECK(cosine_similarity(u, z) == 0.0);
    CHECK(cosine_similarity(z, z) == 0.0);
    CHECK_THROWS_AS(cosine_similarity(u, std::vector<double>{1, 2, 3}), InvalidArgument);
}

TEST_CASE("property: cosine is symmetric, scale invariant and bounded") {
    Rng rng(2);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> a(6), b(6);
        for (auto& x : a) x = rng.uniform(-3, 3);
        for (auto& x : b) x = rng.uniform(-3, 3);
        const double s = cosine_similarity(a, b);
        REQUIRE(s >= -1.0);
        REQUIRE(s <= 1.0);
        REQUIRE(std::abs(s - cosine_similarity(b, a)) < 1e-15);
        auto a2 = a;
        for (auto& x : a2) x *= 7.5;
        REQUIRE(std::abs(s - cosine_similarity(a2, b)) < 1e-12);
    }
}

TEST_CASE("training needs a non-empty vocabulary") {
    std::vector<textprep::TokenStream> corpus(3, textprep::TokenStream{{"immer", "das", "gleiche"}, ""});
    auto p = toy_params(1);
    p.min_count = 10;
    CHECK_THROWS_AS(train_word_embeddings(corpus, p), InvalidArgument);
    CHECK_THROWS_AS(train_word_embeddings({}, toy_params(1)), InvalidArgument);
    p = toy_params(1);
    p.dim = 0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("vocabulary respects min_count and self-similarity is 1") {
    const auto corpus = testing::synonym_corpus(3);
    auto p = toy_params(3);
    p.min_count = 30;
    const auto m = train_word_embeddings(corpus, p);
    for (std::size_t i = 0; i < m.size(); ++i) {
        REQUIRE(m.counts()[i] >= 30);
        REQUIRE(cosine_similarity(m.vector(i), m.vector(i)) == doctest::Approx(1.0).epsilon(1e-6));
        for (const double x : m.vector(i)) REQUIRE(std::isfinite(x));
    }
    CHECK(m.epoch_loss.size() == static_cast<std::size_t>(p.epochs));
    CHECK(m.epoch_loss.back() < m.epoch_loss.front());
}

TEST_CASE("planted synonyms are the closest pair for at least 95 of 100 seeds") {
    int wins = 0, first = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const auto m = train_word_embeddings(testing::synonym_corpus(seed), toy_params(seed));
        const auto k = *m.find("kaffee"), t = *m.find("tee");
        const double planted = cosine_similarity(m.vector(k), m.vector(t));
        bool best = true;
        for (std::size_t i = 0; i < m.size() && best; ++i) {
            for (std::size_t j = i + 1; j < m.size(); ++j) {
                if ((i == std::min(k, t) && j == std::max(k, t))) continue;
                if (cosine_similarity(m.vector(i), m.vector(j)) >= planted) {
                    best = false;
                    break;
                }
            }
        }
        wins += best ? 1 : 0;
        first += most_similar(m, "kaffee", 1).front().first == "tee" ? 1 : 0;
    }
    CHECK(wins >= 95);
    CHECK(first >= 95);
}

TEST_CASE("most_similar contract") {
    const auto m = train_word_embeddings(testing::synonym_corpus(8), toy_params(8));
    CHECK(most_similar(m, "kaffee", 0).empty());
    const auto all = most_similar(m, "kaffee", 1000);
    CHECK(all.size() == m.size() - 1);
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(all[i].first != "kaffee");
        if (i) CHECK(all[i - 1].second >= all[i].second);
    }
    try {
        most_similar(m, "espresso", 3);
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("espresso") != std::string::npos);
    }
}

TEST_CASE("single worker training is deterministic and saved models are byte-identical") {
    testing::TempDir dir;
    const auto corpus = testing::synonym_corpus(5, 200);
    const auto a = train_word_embeddings(corpus, toy_params(5));
    const auto b = train_word_embeddings(corpus, toy_params(5));
    CHECK(a.input() == b.input());
    CHECK(a.output() == b.output());
    save_word_model(a, dir.file("a"));
    save_word_model(b, dir.file("b"));
    for (const char* s : {".vec", ".out.vec", ".meta.json"}) {
        CHECK(read_file(dir.file(std::string("a") + s)) == read_file(dir.file(std::string("b") + s)));
    }
    const auto loaded = load_word_model(dir.file("a"));
    CHECK(loaded.vocab() == a.vocab());
    CHECK(loaded.input() == a.input());
    CHECK(loaded.output() == a.output());
    CHECK(loaded.params().dim == 10);
    CHECK(loaded.epoch_loss == a.epoch_loss);
}

TEST_CASE("a bare vector file loads as a query-only model") {
    testing::TempDir dir;
    dir.write("bare.vec", "3 2\nauto 1 0\nwagen 0.9 0.1\nhaus 0 1\n");
    const auto m = load_word_model(dir.file("bare"));
    CHECK(m.size() == 3);
    CHECK_FALSE(m.has_output());
    CHECK(most_similar(m, "auto", 1).front().first == "wagen");
    dir.write("broken.vec", "2 2\nauto 1 0\n");
    CHECK_THROWS_AS(load_word_model(dir.file("broken")), DataError);
}

TEST_CASE("multi-worker training runs and yields finite vectors") {
    auto p = toy_params(4);
    p.workers = 3;
    const auto m = train_word_embeddings(testing::synonym_corpus(4), p);
    for (const double x : m.input().data()) REQUIRE(std::isfinite(x));
}

TEST_CASE("negative-sampling gradient matches central differences") {
    Rng rng(17);
    const double h = 1e-5;
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t V = 12, D = 5;
        auto input = random_matrix(V, D, rng);
        auto output = random_matrix(V, D, rng);
        std::vector<double> doc(D);
        for (auto& x : doc) x = rng.uniform(-0.5, 0.5);
        NsExample ex;
        ex.context = {rng.below(V), rng.below(V), rng.below(V)};
        ex.target = rng.below(V);
        for (int n = 0; n < 5; ++n) ex.negatives.push_back(rng.below(V));
        const bool with_doc = trial % 2 == 1;
        const std::span<const double> d = with_doc ? std::span<const double>(doc) : std::span<const double>();
        NsGradient g;
        ns_loss_and_gradient(input, output, ex, g, d);
        for (std::size_t r = 0; r < V; ++r) {
            for (std::size_t k = 0; k < D; ++k) {
                const double saved_in = input(r, k);
                input(r, k) = saved_in + h;
                const double up = ns_loss(input, output, ex, d);
                input(r, k) = saved_in - h;
                const double down = ns_loss(input, output, ex, d);
                input(r, k) = saved_in;
                worst = std::max(worst, rel_error(g.input(r, k), (up - down) / (2 * h)));

                const double saved_out = output(r, k);
                output(r, k) = saved_out + h;
                const double up2 = ns_loss(input, output, ex, d);
                output(r, k) = saved_out - h;
                const double down2 = ns_loss(input, output, ex, d);
                output(r, k) = saved_out;
                worst = std::max(worst, rel_error(g.output(r, k), (up2 - down2) / (2 * h)));
            }
        }
        if (with_doc) {
            for (std::size_t k = 0; k < D; ++k) {
                const double saved = doc[k];
                doc[k] = saved + h;
                const double up = ns_loss(input, output, ex, doc);
                doc[k] = saved - h;
                const double down = ns_loss(input, output, ex, doc);
                doc[k] = saved;
                worst = std::max(worst, rel_error(g.doc[k], (up - down) / (2 * h)));
            }
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("document model: shape, flagged empty documents, identical documents") {
    auto corpus = testing::synonym_corpus(6, 300);
    corpus.push_back({{}, "empty"});
    corpus.push_back({{"ich", "trinke", "heissen", "kaffee", "morgens", "warm"}, "twin-a"});
    corpus.push_back({{"ich", "trinke", "heissen", "kaffee", "morgens", "warm"}, "twin-b"});
    DocEmbeddingParams p{toy_params(6), {}};
    p.word.epochs = 10;
    const auto dm = train_doc_embeddings(corpus, p);
    CHECK(dm.size() == corpus.size());
    CHECK(dm.dim() == 10);
    const auto e = *dm.find("empty");
    CHECK(dm.flagged(e));
    for (const double x : dm.doc_vector(e)) CHECK(x == 0.0);

    const auto a = dm.doc_vector(*dm.find("twin-a"));
    const auto b = dm.doc_vector(*dm.find("twin-b"));
    double mean = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < 300; i += 3) {
        for (std::size_t j = i + 1; j < 300; j += 7) {
            mean += cosine_similarity(dm.doc_vector(i), dm.doc_vector(j));
            ++pairs;
        }
    }
    mean /= static_cast<double>(pairs);
    CHECK(cosine_similarity(a, b) > mean);
}

TEST_CASE("inference: deterministic, frozen words, close to the trained vector") {
    const auto& world = testing::synthetic_world();
    const auto& dm = *world.docs;
    const auto words_before = dm.words().input();
    const auto out_before = dm.words().output();
    int close = 0;
    const std::size_t n = 50;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ts = textprep::preprocess(world.ds[i].comment, true);
        textprep::TokenStream unseen = ts;
        unseen.source_id.clear();
        const auto v1 = dm.infer(unseen);
        const auto v2 = dm.infer(unseen);
        REQUIRE(v1.values == v2.values);
        REQUIRE(v1.values.size() == dm.dim());
        if (cosine_similarity(v1.values, dm.doc_vector(*dm.find(ts.source_id))) > 0.5) ++close;
        // embed() returns the trained vector for a known id
        const auto known = dm.embed(ts);
        const auto row = dm.doc_vector(*dm.find(ts.source_id));
        REQUIRE(std::equal(known.values.begin(), known.values.end(), row.begin(), row.end()));
    }
    CHECK(close >= 45);
    CHECK(dm.words().input() == words_before);
    CHECK(dm.words().output() == out_before);

    const auto oov = dm.infer({{"qqq", "zzz"}, ""});
    CHECK(oov.flagged);
    for (const double x : oov.values) CHECK(x == 0.0);
}

TEST_CASE("document model save/load round-trip") {
    testing::TempDir dir;
    const auto& dm = *testing::synthetic_world().docs;
    save_doc_model(dm, dir.file("docs"));
    const auto back = load_doc_model(dir.file("docs"));
    CHECK(back.doc_ids() == dm.doc_ids());
    CHECK(back.doc_vectors() == dm.doc_vectors());
    CHECK(back.words().input() == dm.words().input());
    CHECK(back.inference().steps == dm.inference().steps);
    const textprep::TokenStream ts{{"redaktion", "steuer", "klima"}, ""};
    CHECK(back.infer(ts).values == dm.infer(ts).values);
    save_doc_model(back, dir.file("again"));
    CHECK(read_file(dir.file("docs.docs.vec")) == read_file(dir.file("again.docs.vec")));
}

TEST_CASE("skip-gram training also learns the planted pair") {
    auto p = toy_params(12);
    p.method = Method::SkipGram;
    const auto m = train_word_embeddings(testing::synonym_corpus(12), p);
    CHECK(most_similar(m, "kaffee", 1).front().first == "tee");
    CHECK(parse_method("skipgram") == Method::SkipGram);
    CHECK(parse_method(method_name(Method::CBOW)) == Method::CBOW);
}
