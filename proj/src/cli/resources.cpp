#include "metacomment/cli.hpp"
#include "metacomment/features/keywords.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/strings.hpp"

#include "builtin_data.inc"

namespace metacomment::cli {

namespace {

std::string_view builtin_keywords(std::size_t i) {
    switch (i) {
        case 0: return kBuiltinMediaKeywords;
        case 1: return kBuiltinJournalistKeywords;
        default: return kBuiltinModeratorKeywords;
    }
}

}  // namespace

std::array<features::KeywordSet, 3> load_keywords(const RunConfig& config) {
    std::array<features::KeywordSet, 3> sets;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto cls = corpus::kAddressees[i];
        if (config.keyword_files[i].empty()) {
            sets[i].cls = cls;
            sets[i].seeds = features::parse_keyword_list(builtin_keywords(i));
            sets[i].enriched = sets[i].seeds;
        } else {
            sets[i] = features::load_keyword_file(config.keyword_files[i], cls);
        }
    }
    return sets;
}

std::shared_ptr<const features::CompiledResources> build_resources(const RunConfig& config) {
    features::FeatureResources res;
    res.keywords = load_keywords(config);
    res.extra_patterns = config.extra_patterns;
    if (!config.stopwords.empty()) res.stopwords = textprep::StopWords::load(config.stopwords);
    if (!config.sentiment_lexicon.empty()) res.lexicon = features::SentimentLexicon::load(config.sentiment_lexicon);
    res.embed_remove_stopwords = config.remove_stopwords;
    res.departments = features::parse_keyword_list(config.departments.empty() ? std::string(kBuiltinDepartments)
                                                                              : read_file(config.departments));
    res.tfidf = config.tfidf;
    const auto groups = features::FeatureConfig::parse(config.feature_groups);
    if (groups.semantic || groups.semantic_dims) {
        if (config.doc_model.empty()) {
            throw InvalidArgument("the semantic feature groups need 'embeddings.doc_model' (see train-embeddings --doc)");
        }
        res.doc_model = std::make_shared<const embeddings::DocEmbeddingModel>(embeddings::load_doc_model(config.doc_model));
    }
    return std::make_shared<const features::CompiledResources>(std::move(res));
}

}  // namespace metacomment::cli
