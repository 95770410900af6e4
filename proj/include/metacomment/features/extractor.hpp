#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metacomment/corpus.hpp"
#include "metacomment/embeddings.hpp"
#include "metacomment/features/keywords.hpp"
#include "metacomment/features/registry.hpp"
#include "metacomment/features/semantic.hpp"
#include "metacomment/features/text_stats.hpp"
#include "metacomment/features/tfidf.hpp"
#include "metacomment/textprep.hpp"

namespace metacomment::features {

struct FeatureConfig {
    bool regex = true;
    bool keywords = true;
    bool tfidf = true;
    bool text = true;
    bool semantic = true;
    bool semantic_dims = false;
    bool metadata = true;

    static FeatureConfig none() { return {false, false, false, false, false, false, false}; }
    static FeatureConfig all() { return {}; }
    // Comma-separated group names, e.g. "regex,text"; "all" and "none" accepted.
    static FeatureConfig parse(std::string_view groups);
    std::string to_string() const;
};

// Everything assembly needs that is not fitted on the training rows.
struct FeatureResources {
    // Media, Journalist, Moderator, in that order.
    std::array<KeywordSet, 3> keywords;
    std::array<std::vector<std::string>, 3> extra_patterns;
    textprep::StopWords stopwords = textprep::StopWords::german();
    SentimentLexicon lexicon = SentimentLexicon::german();
    std::shared_ptr<const embeddings::DocEmbeddingModel> doc_model;
    // Stop words are removed before embedding lookups (the embedding corpus is preprocessed the same way).
    bool embed_remove_stopwords = true;
    std::vector<std::string> departments;
    TfidfOptions tfidf;
};

// Shared, immutable resources with the keyword patterns compiled once.
class CompiledResources {
public:
    explicit CompiledResources(FeatureResources resources);
    const FeatureResources& get() const { return resources_; }
    const KeywordPattern& pattern(std::size_t addressee) const { return patterns_[addressee]; }
    // Document vector W(c) for a comment.
    embeddings::DocVector embed(const corpus::Comment& c) const;

private:
    FeatureResources resources_;
    std::array<KeywordPattern, 3> patterns_;
};

class FeatureExtractor {
public:
    FeatureExtractor(std::shared_ptr<const CompiledResources> resources, FeatureConfig config);

    // Fits tf-idf and class vectors on the given rows only.
    void fit(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows);

    bool fitted() const { return registry_ != nullptr; }
    const FeatureConfig& config() const { return config_; }
    std::shared_ptr<const FeatureRegistry> registry() const;
    // Ids of every comment the fitted transformers saw.
    const std::vector<std::string>& seen_ids() const { return seen_ids_; }
    const std::vector<ClassVector>& class_vectors() const { return class_vectors_; }
    const TfidfModel& tfidf() const { return tfidf_; }

    // Fitted state (registry, tf-idf vocabulary, class vectors) as JSON text.
    std::string save_state() const;
    static FeatureExtractor restore(std::shared_ptr<const CompiledResources> resources, FeatureConfig config,
                                    std::string_view state);

    FeatureVector assemble(const corpus::Comment& c) const;
    FeatureMatrix assemble(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows) const;

private:
    void build_registry();

    std::shared_ptr<const CompiledResources> resources_;
    FeatureConfig config_;
    TfidfModel tfidf_;
    std::vector<ClassVector> class_vectors_;
    std::vector<std::string> keyword_tokens_;
    std::shared_ptr<const FeatureRegistry> registry_;
    std::vector<std::string> seen_ids_;
    std::size_t doc_dim_ = 0;
};

// Column names the metadata group emits for a department list.
std::vector<std::string> metadata_feature_names(const std::vector<std::string>& departments);
// (name, value) pairs of the metadata group; absent metadata yields nothing.
std::vector<std::pair<std::string, double>> metadata_features(const corpus::Comment& c,
                                                              const std::vector<std::string>& departments);

}  // namespace metacomment::features
