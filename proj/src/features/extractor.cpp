#include "metacomment/features/extractor.hpp"

#include <algorithm>
#include <unordered_set>

#include <json.hpp>

#include "metacomment/util/error.hpp"
#include "metacomment/util/strings.hpp"

namespace metacomment::features {

using corpus::Label;

namespace {

constexpr std::array<std::string_view, 7> kGroupNames = {"regex",    "keywords",      "tfidf",   "text",
                                                         "semantic", "semantic_dims", "metadata"};
constexpr std::array<std::string_view, 7> kDays = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
constexpr std::array<std::string_view, 6> kTextNames = {"text_length",        "text_avgwordlength",
                                                        "text_capitalletters", "text_num_sie",
                                                        "text_num_questions", "text_sentiment"};

bool* group_flag(FeatureConfig& cfg, std::string_view name) {
    if (name == "regex") return &cfg.regex;
    if (name == "keywords") return &cfg.keywords;
    if (name == "tfidf") return &cfg.tfidf;
    if (name == "text") return &cfg.text;
    if (name == "semantic") return &cfg.semantic;
    if (name == "semantic_dims") return &cfg.semantic_dims;
    if (name == "metadata") return &cfg.metadata;
    return nullptr;
}

bool group_flag(const FeatureConfig& cfg, std::string_view name) {
    return *group_flag(const_cast<FeatureConfig&>(cfg), name);
}

}  // namespace

FeatureConfig FeatureConfig::parse(std::string_view groups) {
    const auto trimmed = trim(groups);
    if (trimmed == "all") return all();
    FeatureConfig cfg = none();
    if (trimmed == "none" || trimmed.empty()) return cfg;
    for (auto part : split(trimmed, ',')) {
        part = trim(part);
        bool* flag = group_flag(cfg, part);
        if (!flag) throw InvalidArgument("unknown feature group '" + std::string(part) + "'");
        *flag = true;
    }
    return cfg;
}

std::string FeatureConfig::to_string() const {
    std::vector<std::string> on;
    for (auto g : kGroupNames) {
        if (group_flag(*this, g)) on.emplace_back(g);
    }
    return on.empty() ? "none" : join(on, ",");
}

CompiledResources::CompiledResources(FeatureResources resources) : resources_(std::move(resources)) {
    for (std::size_t i = 0; i < 3; ++i) {
        if (resources_.keywords[i].cls != corpus::kAddressees[i]) {
            throw InvalidArgument("keyword sets must be given for media, journalist, moderator in that order");
        }
        patterns_[i] = KeywordPattern::compile(resources_.keywords[i].enriched, resources_.extra_patterns[i]);
    }
}

embeddings::DocVector CompiledResources::embed(const corpus::Comment& c) const {
    if (!resources_.doc_model) throw StateError("semantic features need a document embedding model");
    auto ts = textprep::preprocess(c, resources_.embed_remove_stopwords ? &resources_.stopwords : nullptr);
    return resources_.doc_model->embed(ts);
}

std::vector<std::string> metadata_feature_names(const std::vector<std::string>& departments) {
    std::vector<std::string> names;
    for (const auto& d : departments) names.push_back("department_" + d);
    names.emplace_back("department_other");
    names.emplace_back("metadata_position");
    names.emplace_back("metadata_quote");
    for (auto d : kDays) names.push_back("time_dow_" + std::string(d));
    for (int h = 0; h < 24; ++h) names.push_back("time_hour_" + std::to_string(h));
    return names;
}

std::vector<std::pair<std::string, double>> metadata_features(const corpus::Comment& c,
                                                              const std::vector<std::string>& departments) {
    std::vector<std::pair<std::string, double>> out;
    if (c.department) {
        const auto dept = to_lower_ascii(trim(*c.department));
        const bool known = std::find(departments.begin(), departments.end(), dept) != departments.end();
        out.emplace_back(known ? "department_" + dept : "department_other", 1.0);
    }
    if (c.position) out.emplace_back("metadata_position", static_cast<double>(*c.position));
    if (c.has_quote) out.emplace_back("metadata_quote", *c.has_quote ? 1.0 : 0.0);
    out.emplace_back("time_dow_" + std::string(kDays[static_cast<std::size_t>(c.timestamp.day_of_week())]), 1.0);
    out.emplace_back("time_hour_" + std::to_string(c.timestamp.hour), 1.0);
    return out;
}

FeatureExtractor::FeatureExtractor(std::shared_ptr<const CompiledResources> resources, FeatureConfig config)
    : resources_(std::move(resources)), config_(config) {
    if (!resources_) throw InvalidArgument("feature extractor without resources");
    const auto& res = resources_->get();
    if (config_.keywords) {
        std::unordered_set<std::string> seen;
        for (const auto& ks : res.keywords) {
            for (const auto& k : ks.enriched) {
                if (seen.insert(k).second) keyword_tokens_.push_back(k);
            }
        }
    }
    if ((config_.semantic || config_.semantic_dims)) {
        if (!res.doc_model) throw InvalidArgument("semantic feature groups need a document embedding model");
        doc_dim_ = res.doc_model->dim();
    }
    if (!config_.tfidf && !config_.semantic) build_registry();
}

void FeatureExtractor::fit(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows) {
    const auto& res = resources_->get();
    seen_ids_.clear();
    for (auto r : rows) seen_ids_.push_back(ds[r].comment.id);

    if (config_.tfidf) {
        std::vector<textprep::TokenStream> corpus;
        corpus.reserve(rows.size());
        for (auto r : rows) corpus.push_back(textprep::preprocess(ds[r].comment, &res.stopwords));
        tfidf_ = TfidfModel::fit(corpus, res.tfidf);
    }
    if (config_.semantic) {
        std::vector<std::vector<double>> vectors;
        std::vector<corpus::LabelSet> labels;
        for (auto r : rows) {
            vectors.push_back(resources_->embed(ds[r].comment).values);
            labels.push_back(ds[r].labels);
        }
        class_vectors_ = features::class_vectors(vectors, labels);
    }
    build_registry();
}

void FeatureExtractor::build_registry() {
    const auto& res = resources_->get();
    std::vector<std::string> names;
    if (config_.regex) {
        for (auto cls : corpus::kAddressees) names.push_back("regex_" + class_slug(cls) + "_matches");
    }
    for (const auto& k : keyword_tokens_) names.push_back("keyword_" + k);
    if (config_.tfidf) {
        for (const auto& g : tfidf_.vocabulary()) names.push_back("tfidf_" + g);
    }
    if (config_.text) names.insert(names.end(), kTextNames.begin(), kTextNames.end());
    if (config_.semantic) {
        for (auto cls : kSemanticClasses) names.push_back("semantic_dist_" + class_slug(cls));
        for (auto cls : kSemanticClasses) names.push_back("semantic_min_dist_" + class_slug(cls));
    }
    if (config_.semantic_dims) {
        for (std::size_t i = 0; i < doc_dim_; ++i) names.push_back("semantic_sem_" + std::to_string(i));
    }
    if (config_.metadata) {
        auto meta = metadata_feature_names(res.departments);
        names.insert(names.end(), meta.begin(), meta.end());
    }
    registry_ = std::make_shared<const FeatureRegistry>(std::move(names));
}

std::shared_ptr<const FeatureRegistry> FeatureExtractor::registry() const {
    if (!registry_) throw StateError("feature extractor not fitted");
    return registry_;
}

std::string FeatureExtractor::save_state() const {
    using json = nlohmann::ordered_json;
    json j;
    j["format"] = "metacomment-features";
    j["version"] = 1;
    j["groups"] = config_.to_string();
    j["registry"] = registry()->names();
    j["registry_version"] = registry_->version();
    if (config_.tfidf) {
        std::vector<std::size_t> df;
        for (std::size_t i = 0; i < tfidf_.vocabulary().size(); ++i) df.push_back(tfidf_.document_frequency(i));
        j["tfidf"] = {{"n_max", tfidf_.options().n_max},
                      {"min_df", tfidf_.options().min_df},
                      {"max_features", tfidf_.options().max_features},
                      {"n_docs", tfidf_.n_docs()},
                      {"vocabulary", tfidf_.vocabulary()},
                      {"document_frequency", df}};
    }
    if (config_.semantic) {
        json cvs = json::array();
        for (const auto& cv : class_vectors_) {
            cvs.push_back({{"class", corpus::label_name(cv.cls)}, {"members", cv.members}, {"vector", cv.vector}});
        }
        j["class_vectors"] = cvs;
    }
    return j.dump() + "\n";
}

FeatureExtractor FeatureExtractor::restore(std::shared_ptr<const CompiledResources> resources, FeatureConfig config,
                                           std::string_view state) {
    using json = nlohmann::ordered_json;
    FeatureExtractor ex(std::move(resources), config);
    try {
        const json j = json::parse(state);
        if (j.at("format") != "metacomment-features" || j.at("version") != 1) {
            throw DataError("not a feature extractor state");
        }
        if (j.at("groups").get<std::string>() != config.to_string()) {
            throw DataError("feature groups differ: state has " + j.at("groups").get<std::string>());
        }
        if (config.tfidf) {
            const auto& t = j.at("tfidf");
            TfidfOptions opt;
            opt.n_max = t.at("n_max").get<int>();
            opt.min_df = t.at("min_df").get<std::size_t>();
            opt.max_features = t.at("max_features").get<std::size_t>();
            ex.tfidf_ = TfidfModel::from_parts(opt, t.at("n_docs").get<std::size_t>(),
                                               t.at("vocabulary").get<std::vector<std::string>>(),
                                               t.at("document_frequency").get<std::vector<std::size_t>>());
        }
        if (config.semantic) {
            ex.class_vectors_.clear();
            for (const auto& cv : j.at("class_vectors")) {
                const auto label = corpus::parse_label(cv.at("class").get<std::string>());
                if (!label) throw DataError("unknown class in class vectors");
                ex.class_vectors_.push_back(
                    ClassVector{*label, cv.at("vector").get<std::vector<double>>(), cv.at("members").get<std::size_t>()});
            }
            if (ex.class_vectors_.size() != kSemanticClasses.size()) throw DataError("class vector count mismatch");
            for (std::size_t i = 0; i < kSemanticClasses.size(); ++i) {
                if (ex.class_vectors_[i].cls != kSemanticClasses[i] || ex.class_vectors_[i].vector.size() != ex.doc_dim_) {
                    throw DataError("class vectors do not match the document embedding model");
                }
            }
        }
        ex.build_registry();
        if (ex.registry_->names() != j.at("registry").get<std::vector<std::string>>()) {
            throw DataError("feature registry differs from the saved one (keywords or departments changed?)");
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed feature extractor state: ") + e.what());
    }
    return ex;
}

FeatureVector FeatureExtractor::assemble(const corpus::Comment& c) const {
    if (!registry_) throw StateError("assemble called before the tf-idf/semantic groups were fitted");
    const auto& res = resources_->get();
    const auto& reg = *registry_;
    FeatureVectorBuilder b(reg);
    std::size_t col = 0;

    if (config_.regex) {
        for (std::size_t i = 0; i < 3; ++i) {
            b.set(col++, static_cast<double>(count_pattern_matches(c, resources_->pattern(i))));
        }
    }
    if (config_.keywords) {
        std::unordered_map<std::string, std::size_t> counts;
        for (const auto& t : textprep::preprocess(c, nullptr).tokens) ++counts[t];
        for (const auto& k : keyword_tokens_) {
            const auto it = counts.find(k);
            b.set(col++, it == counts.end() ? 0.0 : static_cast<double>(it->second));
        }
    }
    if (config_.tfidf) {
        for (const auto& [j, v] : tfidf_.transform(textprep::preprocess(c, &res.stopwords))) b.set(col + j, v);
        col += tfidf_.vocabulary().size();
    }
    if (config_.text) {
        const auto s = text_stats(c, res.lexicon);
        for (double v : {s.length, s.avg_word_length, s.capital_letters, s.sie_count, s.question_count, s.sentiment}) {
            b.set(col++, v);
        }
    }
    std::vector<double> doc;
    if (config_.semantic || config_.semantic_dims) doc = resources_->embed(c).values;
    if (config_.semantic) {
        const auto d = semantic_distances(doc, class_vectors_);
        for (double v : d.distance) b.set(col++, v);
        for (std::size_t i = 0; i < kSemanticClasses.size(); ++i) b.set(col++, i == d.nearest ? 1.0 : 0.0);
    }
    if (config_.semantic_dims) {
        for (std::size_t i = 0; i < doc_dim_; ++i) b.set(col++, doc[i]);
    }
    if (config_.metadata) {
        for (const auto& [name, v] : metadata_features(c, res.departments)) b.set(*reg.find(name), v);
    }
    return b.finish();
}

FeatureMatrix FeatureExtractor::assemble(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows) const {
    FeatureMatrix m{registry(), {}};
    m.rows.reserve(rows.size());
    for (auto r : rows) m.rows.push_back(assemble(ds[r].comment));
    return m;
}

}  // namespace metacomment::features
