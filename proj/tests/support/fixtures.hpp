#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "metacomment/corpus.hpp"
#include "metacomment/embeddings.hpp"
#include "metacomment/textprep.hpp"

namespace metacomment::testing {

corpus::Comment make_comment(std::string id, std::string title, std::string text);
corpus::Entry make_entry(std::string id, std::string text, corpus::LabelSet labels, std::string title = "");

// Removed with its contents on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string write(const std::string& name, const std::string& content) const;

private:
    std::filesystem::path path_;
};

// Synthetic corpus plus a small document model trained on it; built once per process.
struct SyntheticWorld {
    corpus::LabeledDataset ds;
    std::shared_ptr<const embeddings::DocEmbeddingModel> docs;
    std::shared_ptr<const embeddings::WordEmbeddingModel> words;
};
const SyntheticWorld& synthetic_world();

embeddings::WordEmbeddingParams small_embedding_params(int dim = 24);

// Sentences in which "kaffee" and "tee" share every context.
std::vector<textprep::TokenStream> synonym_corpus(std::uint64_t seed, std::size_t n_sentences = 400);

}  // namespace metacomment::testing
