#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metacomment/classifiers.hpp"
#include "metacomment/embeddings.hpp"
#include "metacomment/eval.hpp"
#include "metacomment/features/extractor.hpp"
#include "metacomment/neural.hpp"

namespace metacomment::cli {

// Everything a run depends on. Empty paths select the built-in data files.
struct RunConfig {
    std::uint64_t seed = 1;
    int jobs = 1;

    bool remove_stopwords = true;
    std::string stopwords;

    embeddings::WordEmbeddingParams embedding;
    embeddings::InferenceParams inference;
    // Model prefixes as written by train-embeddings.
    std::string word_model;
    std::string doc_model;

    // Media, Journalist, Moderator.
    std::array<std::string, 3> keyword_files;
    std::array<std::vector<std::string>, 3> extra_patterns;
    std::size_t enrich_top_n = 10;
    double enrich_min_sim = 0.5;

    std::string feature_groups = "regex,keywords,tfidf,text,semantic,metadata";
    features::TfidfOptions tfidf;
    std::string departments;
    std::string sentiment_lexicon;

    classifiers::Kind classifier = classifiers::Kind::LinearSvm;
    classifiers::ParamMap classifier_params = {{"C", 0.5}};
    std::optional<std::size_t> k_features;

    std::vector<eval::ClassifierGrid> grid = {{classifiers::Kind::LinearSvm, {{"C", {0.5, 1.0}}}}};
    std::vector<std::optional<std::size_t>> grid_k_features = {10, 50, std::nullopt};
    int grid_folds = 3;

    int folds = 10;
    double beta = 0.5;
    double threshold = 0.8;
    int calibration_folds = 3;

    neural::CnnConfig cnn;
};

// Strict: unknown keys and wrongly typed values are errors.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& config);

// Keyword files named in the config, or the built-in lists.
std::array<features::KeywordSet, 3> load_keywords(const RunConfig& config);
// Loads the document model only when a semantic feature group is enabled.
std::shared_ptr<const features::CompiledResources> build_resources(const RunConfig& config);

// Exit code 0 on success, 1 on runtime failure, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metacomment::cli
