#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "metacomment/corpus.hpp"

namespace metacomment::synthetic {

struct Options {
    std::size_t n_comments = 2000;
    double meta_share = 0.5;
    // Share of meta comments that address two classes.
    double multi_share = 0.15;
    std::uint64_t seed = 1;
    std::string id_prefix = "syn";
    std::string source_tag = "synthetic";
    // 0 and 1 draw keywords and topic words from disjoint halves of the vocabularies.
    int dialect = 0;
    bool metadata = true;
};

// Template comments in German. Meta comments mention keywords of their
// addressee classes; non-meta comments use topic words only.
corpus::LabeledDataset generate(const Options& options);

// Keyword vocabulary per addressee (Media, Journalist, Moderator) for a dialect.
std::array<std::vector<std::string>, 3> keywords(int dialect = 0);

// Every template word, for building keyword files or embeddings in tests.
std::vector<std::string> topic_words(int dialect = 0);

}  // namespace metacomment::synthetic
