#include "fixtures.hpp"

#include <atomic>
#include <fstream>

#include <unistd.h>

#include "metacomment/synthetic.hpp"
#include "metacomment/util/random.hpp"

namespace metacomment::testing {

namespace fs = std::filesystem;

corpus::Comment make_comment(std::string id, std::string title, std::string text) {
    corpus::Comment c;
    c.id = std::move(id);
    c.title = std::move(title);
    c.text = std::move(text);
    c.timestamp = {2018, 3, 5, 9, 30};
    return c;
}

corpus::Entry make_entry(std::string id, std::string text, corpus::LabelSet labels, std::string title) {
    return {make_comment(std::move(id), std::move(title), std::move(text)), labels};
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("metacomment-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string TempDir::write(const std::string& name, const std::string& content) const {
    const auto p = file(name);
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
}

embeddings::WordEmbeddingParams small_embedding_params(int dim) {
    embeddings::WordEmbeddingParams p;
    p.dim = dim;
    p.min_count = 2;
    p.epochs = 20;
    p.seed = 11;
    return p;
}

const SyntheticWorld& synthetic_world() {
    static const SyntheticWorld world = [] {
        synthetic::Options opt;
        opt.n_comments = 400;
        opt.seed = 5;
        SyntheticWorld w;
        w.ds = synthetic::generate(opt);
        std::vector<textprep::TokenStream> corpus;
        for (const auto& e : w.ds.entries()) corpus.push_back(textprep::preprocess(e.comment, true));
        embeddings::DocEmbeddingParams p{small_embedding_params(), {}};
        auto docs = std::make_shared<embeddings::DocEmbeddingModel>(embeddings::train_doc_embeddings(corpus, p));
        w.words = std::make_shared<embeddings::WordEmbeddingModel>(docs->words());
        w.docs = std::move(docs);
        return w;
    }();
    return world;
}

std::vector<textprep::TokenStream> synonym_corpus(std::uint64_t seed, std::size_t n_sentences) {
    // Filler words sit on a ring, so every filler has its own neighbourhood.
    // "kaffee" and "tee" are the only words that share all their contexts.
    const std::size_t ring = 24;
    const std::vector<std::string> frame = {"heute", "trinke", "ich", "heissen", "morgens", "gern"};
    Rng rng(seed);
    std::vector<textprep::TokenStream> out;
    for (std::size_t i = 0; i < n_sentences; ++i) {
        textprep::TokenStream ts;
        ts.source_id = "s" + std::to_string(i);
        if (rng.below(3) == 0) {
            ts.tokens = {frame[0], frame[1], frame[2], rng.below(2) ? "kaffee" : "tee", frame[3], frame[4], frame[5]};
        } else {
            const auto start = rng.below(ring);
            for (std::size_t k = 0; k < 7; ++k) ts.tokens.push_back("w" + std::to_string((start + k) % ring));
        }
        out.push_back(std::move(ts));
    }
    return out;
}

}  // namespace metacomment::testing
