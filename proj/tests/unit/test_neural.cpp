#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "metacomment/neural.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"

using namespace metacomment;
using namespace metacomment::neural;

namespace {

embeddings::WordEmbeddingModel random_words(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::string> vocab;
    for (std::size_t i = 0; i < n; ++i) vocab.push_back("w" + std::to_string(i));
    DenseMatrix input(n, dim);
    for (double& x : input.data()) x = rng.uniform(-1.0, 1.0);
    embeddings::WordEmbeddingParams p;
    p.dim = static_cast<int>(dim);
    return {p, vocab, std::vector<std::uint64_t>(n, 1), input, DenseMatrix()};
}

CnnConfig micro_config() {
    CnnConfig c;
    c.max_len = 12;
    c.n_filters = 4;
    c.kernel_size = 3;
    c.dense_units = 5;
    c.batch_size = 4;
    c.epochs = 1;
    c.seed = 3;
    return c;
}

// Sequences of noise words w10..w39 with a class marker (w0..w4 or w5..w9) at a random position.
void two_clusters(const CnnModel& model, std::size_t n, std::uint64_t seed, std::vector<std::vector<int>>& seqs,
                  std::vector<int>& labels) {
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(i % 2);
        std::vector<std::string> tokens;
        const auto len = 5 + rng.below(10);
        for (std::uint64_t t = 0; t < len; ++t) tokens.push_back("w" + std::to_string(10 + rng.below(30)));
        tokens[rng.below(len)] = "w" + std::to_string(rng.below(5) + (y ? 5 : 0));
        seqs.push_back(model.encode(tokens));
        labels.push_back(y);
    }
}

}  // namespace

TEST_CASE("build copies the word vectors and reserves pad and OOV rows") {
    const auto words = random_words(20, 6, 1);
    const auto model = CnnModel::build(words, micro_config());
    REQUIRE(model.embedding().rows() == 22);
    for (Eigen::Index k = 0; k < 6; ++k) {
        CHECK(model.embedding()(kPadIndex, k) == 0.0);
        CHECK(model.embedding()(kOovIndex, k) == 0.0);
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
        for (std::size_t k = 0; k < 6; ++k) {
            REQUIRE(model.embedding()(static_cast<Eigen::Index>(i + 2), static_cast<Eigen::Index>(k)) ==
                    words.vector(i)[k]);
        }
    }
    const auto enc = model.encode({"w3", "unbekannt"});
    REQUIRE(enc.size() == 12);
    CHECK(enc[0] == 5);
    CHECK(enc[1] == kOovIndex);
    CHECK(enc[2] == kPadIndex);
    std::vector<std::string> long_text(40, "w0");
    CHECK(model.encode(long_text).size() == 12);
}

TEST_CASE("initialisation is seeded and bounded") {
    const auto words = random_words(10, 4, 2);
    const auto a = CnnModel::build(words, micro_config());
    const auto b = CnnModel::build(words, micro_config());
    auto other = micro_config();
    other.seed = 4;
    const auto c = CnnModel::build(words, other);
    CHECK(a.parameters().dense == b.parameters().dense);
    CHECK(a.parameters().conv[1] == b.parameters().conv[1]);
    CHECK(a.parameters().dense != c.parameters().dense);
    CHECK(a.parameters().dense.cwiseAbs().maxCoeff() <= 0.05);
    CHECK(a.parameters().output.cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("config validation") {
    auto cfg = micro_config();
    cfg.kernel_size = 13;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    CHECK_THROWS_AS(CnnModel::build(random_words(5, 3, 1), cfg), InvalidArgument);
    cfg = micro_config();
    cfg.n_filters = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    CHECK_THROWS_AS(CnnModel::build(embeddings::WordEmbeddingModel{}, micro_config()), InvalidArgument);
}

TEST_CASE("shape chain at full size") {
    const auto words = random_words(50, 300, 3);
    CnnConfig cfg;
    cfg.seed = 1;
    const auto model = CnnModel::build(words, cfg);
    const auto act = model.forward(model.encode({"w1", "w2", "w3", "w4", "w5", "w6"}));
    CHECK(act.windows == 996);
    CHECK(act.pooled.size() == 128);
    CHECK(act.hidden.size() == 64);
    CHECK(act.argmax.size() == 128);
    CHECK(model.parameters().conv.size() == 5);
    CHECK(model.parameters().conv[0].rows() == 300);
    CHECK(model.parameters().conv[0].cols() == 128);
    CHECK(act.probabilities[0] + act.probabilities[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("all-padding input gives a constant output") {
    const auto model = CnnModel::build(random_words(10, 4, 4), micro_config());
    const std::vector<int> pad(12, kPadIndex);
    const auto a = model.predict_proba(pad);
    CHECK(a == model.predict_proba(pad));
    CHECK(model.predict_proba(model.encode({})) == a);
    CHECK_THROWS_AS(model.forward(std::vector<int>(5, 0)), InvalidArgument);
    CHECK_THROWS_AS(model.forward(std::vector<int>(12, 99)), InvalidArgument);
}

TEST_CASE("property: softmax sums to one and stays in (0, 1)") {
    const auto model = CnnModel::build(random_words(30, 5, 5), micro_config());
    Rng rng(6);
    for (int i = 0; i < 300; ++i) {
        std::vector<int> seq(12);
        for (int& s : seq) s = static_cast<int>(rng.below(32));
        const auto p = model.predict_proba(seq);
        REQUIRE(std::abs(p[0] + p[1] - 1.0) <= 1e-9);
        REQUIRE(p[0] > 0.0);
        REQUIRE(p[0] < 1.0);
    }
}

TEST_CASE("property: permuting the padded tail changes nothing") {
    const auto model = CnnModel::build(random_words(30, 5, 7), micro_config());
    Rng rng(8);
    for (int i = 0; i < 100; ++i) {
        std::vector<std::string> tokens;
        for (int t = 0; t < 5; ++t) tokens.push_back("w" + std::to_string(rng.below(30)));
        const auto seq = model.encode(tokens);
        auto permuted = seq;
        rng.shuffle(std::span<int>(permuted).subspan(5));
        REQUIRE(model.predict_proba(permuted) == model.predict_proba(seq));
    }
}

TEST_CASE("analytic gradients match central differences for every block") {
    const auto words = random_words(15, 6, 9);
    auto model = CnnModel::build(words, micro_config());
    // larger weights so tanh is not in its linear regime
    Rng rng(10);
    auto& p = model.parameters();
    for (auto& m : p.conv) m = m.unaryExpr([&](double) { return rng.uniform(-0.5, 0.5); });
    p.dense = p.dense.unaryExpr([&](double) { return rng.uniform(-0.5, 0.5); });
    p.output = p.output.unaryExpr([&](double) { return rng.uniform(-0.5, 0.5); });
    std::vector<std::vector<int>> batch;
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) {
        std::vector<std::string> tokens;
        for (int t = 0; t < 4 + i; ++t) tokens.push_back("w" + std::to_string(rng.below(15)));
        batch.push_back(model.encode(tokens));
        labels.push_back(i % 2);
    }
    const auto before = model.embedding_hash();
    const auto g = gradient_check(model, batch, labels);
    CHECK(g.conv < 1e-4);
    CHECK(g.conv_bias < 1e-4);
    CHECK(g.dense < 1e-4);
    CHECK(g.dense_bias < 1e-4);
    CHECK(g.output < 1e-4);
    CHECK(g.output_bias < 1e-4);
    CHECK(model.embedding_hash() == before);
}

TEST_CASE("training: frozen embedding, two clusters, falling loss") {
    const auto words = random_words(40, 8, 11);
    CnnConfig cfg;
    cfg.max_len = 20;
    cfg.n_filters = 16;
    cfg.kernel_size = 3;
    cfg.dense_units = 8;
    cfg.batch_size = 32;
    cfg.epochs = 5;
    cfg.seed = 12;
    auto model = CnnModel::build(words, cfg);
    std::vector<std::vector<int>> seqs;
    std::vector<int> labels;
    two_clusters(model, 3000, 13, seqs, labels);

    const auto hash = model.embedding_hash();
    const Matrix embedding = model.embedding();
    const auto result = train_cnn(model, seqs, labels);
    CHECK(model.embedding_hash() == hash);
    CHECK(model.embedding() == embedding);
    REQUIRE(result.epoch_loss.size() == 5);
    for (std::size_t e = 1; e < result.epoch_loss.size(); ++e) {
        CHECK(result.epoch_loss[e] <= result.epoch_loss[e - 1] * 1.05);
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const auto p = model.predict_proba(seqs[i]);
        correct += (p[1] >= p[0] ? 1 : 0) == labels[i];
    }
    CHECK(static_cast<double>(correct) / static_cast<double>(seqs.size()) >= 0.95);

    auto again = CnnModel::build(words, cfg);
    train_cnn(again, seqs, labels);
    CHECK(again.parameters().dense == model.parameters().dense);
    CHECK(again.parameters().conv[2] == model.parameters().conv[2]);

    CHECK_THROWS_AS(train_cnn(again, {}, std::vector<int>{}), InvalidArgument);
    CHECK_THROWS_AS(train_cnn(again, {seqs[0], seqs[2]}, std::vector<int>{0, 0}), InvalidArgument);
}

TEST_CASE("save and load") {
    const auto words = random_words(12, 4, 14);
    auto model = CnnModel::build(words, micro_config());
    testing::TempDir dir;
    save_cnn(model, dir.file("cnn.json"));
    const auto back = load_cnn(dir.file("cnn.json"), words);
    const auto seq = model.encode({"w1", "w7", "w3"});
    CHECK(back.predict_proba(seq) == model.predict_proba(seq));
    CHECK(back.embedding_hash() == model.embedding_hash());
    CHECK_THROWS_AS(load_cnn(dir.file("cnn.json"), random_words(12, 4, 15)), DataError);
    CHECK_THROWS_AS(load_cnn(dir.file("missing.json"), words), DataError);
}
