#include <set>

#include <json.hpp>

#include "metacomment/cli.hpp"
#include "metacomment/features/keywords.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/strings.hpp"

namespace metacomment::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<const char*, 3> kClassKeys = {"media", "journalist", "moderator"};

// Reads known keys of one JSON object and rejects the rest.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw DataError("config: '" + display() + "' must be an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw DataError("config: '" + path_ + key + "' has the wrong type");
        }
    }

    const json* raw(const char* key) {
        if (!j_.contains(key)) return nullptr;
        used_.insert(key);
        return &j_.at(key);
    }

    std::optional<Section> child(const char* key) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        return Section(*v, path_ + key + ".");
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) throw DataError("config: unknown key '" + path_ + key + "'");
        }
    }

    const std::string& path() const { return path_; }

private:
    std::string display() const { return path_.empty() ? "(root)" : path_.substr(0, path_.size() - 1); }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::optional<std::size_t> k_value(const json& v, const std::string& where) {
    if (v.is_null() || (v.is_string() && v.get<std::string>() == "all")) return std::nullopt;
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    throw DataError("config: '" + where + "' must be a positive integer or \"all\"");
}

json k_json(const std::optional<std::size_t>& k) { return k ? json(*k) : json("all"); }

}  // namespace

RunConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("config: not valid JSON: ") + e.what());
    }
    RunConfig c;
    Section top(root, "");
    top.get("seed", c.seed);
    top.get("jobs", c.jobs);
    if (auto s = top.child("preprocessing")) {
        s->get("remove_stopwords", c.remove_stopwords);
        s->get("stopwords", c.stopwords);
        s->finish();
    }
    if (auto s = top.child("embeddings")) {
        s->get("dim", c.embedding.dim);
        s->get("window", c.embedding.window);
        s->get("min_count", c.embedding.min_count);
        s->get("epochs", c.embedding.epochs);
        std::string method(embeddings::method_name(c.embedding.method));
        s->get("method", method);
        c.embedding.method = embeddings::parse_method(method);
        s->get("negative_samples", c.embedding.negative_samples);
        s->get("start_learning_rate", c.embedding.start_learning_rate);
        s->get("end_learning_rate", c.embedding.end_learning_rate);
        s->get("word_model", c.word_model);
        s->get("doc_model", c.doc_model);
        if (auto inf = s->child("inference")) {
            inf->get("steps", c.inference.steps);
            inf->get("learning_rate", c.inference.learning_rate);
            inf->get("end_learning_rate", c.inference.end_learning_rate);
            inf->finish();
        }
        s->finish();
    }
    if (auto s = top.child("keywords")) {
        if (auto files = s->child("files")) {
            for (std::size_t i = 0; i < 3; ++i) files->get(kClassKeys[i], c.keyword_files[i]);
            files->finish();
        }
        if (auto extra = s->child("extra_patterns")) {
            for (std::size_t i = 0; i < 3; ++i) extra->get(kClassKeys[i], c.extra_patterns[i]);
            extra->finish();
        }
        s->get("top_n", c.enrich_top_n);
        s->get("min_sim", c.enrich_min_sim);
        s->finish();
    }
    if (auto s = top.child("features")) {
        s->get("groups", c.feature_groups);
        features::FeatureConfig::parse(c.feature_groups);
        if (auto t = s->child("tfidf")) {
            t->get("n_max", c.tfidf.n_max);
            t->get("min_df", c.tfidf.min_df);
            t->get("max_features", c.tfidf.max_features);
            t->finish();
        }
        s->get("departments", c.departments);
        s->get("sentiment_lexicon", c.sentiment_lexicon);
        s->finish();
    }
    if (auto s = top.child("classifier")) {
        std::string kind(classifiers::kind_name(c.classifier));
        s->get("kind", kind);
        c.classifier = classifiers::parse_kind(kind);
        if (s->raw("params")) {
            c.classifier_params.clear();
            if (auto p = s->child("params")) {
                for (const auto& [k, v] : root.at("classifier").at("params").items()) {
                    double value = 0;
                    p->get(k.c_str(), value);
                    c.classifier_params[k] = value;
                }
            }
        } else if (c.classifier != classifiers::Kind::LinearSvm) {
            c.classifier_params.clear();
        }
        if (const json* k = s->raw("k_features")) c.k_features = k_value(*k, "classifier.k_features");
        s->finish();
        classifiers::make_hyperparams(c.classifier, c.classifier_params);
    }
    if (auto s = top.child("grid")) {
        if (const json* list = s->raw("classifiers")) {
            if (!list->is_array() || list->empty()) throw DataError("config: 'grid.classifiers' must be a non-empty array");
            c.grid.clear();
            for (std::size_t i = 0; i < list->size(); ++i) {
                Section g((*list)[i], "grid.classifiers[" + std::to_string(i) + "].");
                std::string kind = "linear_svm";
                g.get("kind", kind);
                eval::ClassifierGrid cg{classifiers::parse_kind(kind), {}};
                g.get("values", cg.values);
                g.finish();
                c.grid.push_back(std::move(cg));
            }
        }
        if (const json* ks = s->raw("k_features")) {
            if (!ks->is_array() || ks->empty()) throw DataError("config: 'grid.k_features' must be a non-empty array");
            c.grid_k_features.clear();
            for (const auto& v : *ks) c.grid_k_features.push_back(k_value(v, "grid.k_features"));
        }
        s->get("folds", c.grid_folds);
        s->finish();
    }
    if (auto s = top.child("evaluation")) {
        s->get("folds", c.folds);
        s->get("beta", c.beta);
        s->get("threshold", c.threshold);
        s->get("calibration_folds", c.calibration_folds);
        s->finish();
    }
    if (auto s = top.child("cnn")) {
        s->get("max_len", c.cnn.max_len);
        s->get("n_filters", c.cnn.n_filters);
        s->get("kernel_size", c.cnn.kernel_size);
        s->get("dense_units", c.cnn.dense_units);
        s->get("batch_size", c.cnn.batch_size);
        s->get("epochs", c.cnn.epochs);
        s->get("learning_rate", c.cnn.learning_rate);
        s->finish();
    }
    top.finish();

    if (c.jobs < 1) throw DataError("config: 'jobs' must be >= 1");
    if (c.folds < 2 || c.grid_folds < 2) throw DataError("config: fold counts must be >= 2");
    if (!(c.beta > 0)) throw DataError("config: 'evaluation.beta' must be positive");
    if (!(c.threshold >= 0 && c.threshold <= 1)) throw DataError("config: 'evaluation.threshold' must lie in [0, 1]");
    if (!(c.enrich_min_sim >= 0 && c.enrich_min_sim <= 1)) throw DataError("config: 'keywords.min_sim' must lie in [0, 1]");
    c.embedding.validate();
    c.cnn.validate();
    eval::enumerate_grid(eval::GridSpec{{}, c.grid, c.grid_k_features, c.beta});
    return c;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string config_to_json(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["preprocessing"] = {{"remove_stopwords", c.remove_stopwords}, {"stopwords", c.stopwords}};
    j["embeddings"] = {{"dim", c.embedding.dim},
                       {"window", c.embedding.window},
                       {"min_count", c.embedding.min_count},
                       {"epochs", c.embedding.epochs},
                       {"method", embeddings::method_name(c.embedding.method)},
                       {"negative_samples", c.embedding.negative_samples},
                       {"start_learning_rate", c.embedding.start_learning_rate},
                       {"end_learning_rate", c.embedding.end_learning_rate},
                       {"word_model", c.word_model},
                       {"doc_model", c.doc_model},
                       {"inference",
                        {{"steps", c.inference.steps},
                         {"learning_rate", c.inference.learning_rate},
                         {"end_learning_rate", c.inference.end_learning_rate}}}};
    json files, extra;
    for (std::size_t i = 0; i < 3; ++i) {
        files[kClassKeys[i]] = c.keyword_files[i];
        extra[kClassKeys[i]] = c.extra_patterns[i];
    }
    j["keywords"] = {{"files", files}, {"extra_patterns", extra}, {"top_n", c.enrich_top_n}, {"min_sim", c.enrich_min_sim}};
    j["features"] = {{"groups", c.feature_groups},
                     {"tfidf", {{"n_max", c.tfidf.n_max}, {"min_df", c.tfidf.min_df}, {"max_features", c.tfidf.max_features}}},
                     {"departments", c.departments},
                     {"sentiment_lexicon", c.sentiment_lexicon}};
    j["classifier"] = {{"kind", classifiers::kind_name(c.classifier)},
                       {"params", c.classifier_params},
                       {"k_features", c.k_features ? json(*c.k_features) : json(nullptr)}};
    json grid = json::array();
    for (const auto& g : c.grid) grid.push_back({{"kind", classifiers::kind_name(g.kind)}, {"values", g.values}});
    json ks = json::array();
    for (const auto& k : c.grid_k_features) ks.push_back(k_json(k));
    j["grid"] = {{"classifiers", grid}, {"k_features", ks}, {"folds", c.grid_folds}};
    j["evaluation"] = {{"folds", c.folds}, {"beta", c.beta}, {"threshold", c.threshold},
                       {"calibration_folds", c.calibration_folds}};
    j["cnn"] = {{"max_len", c.cnn.max_len},         {"n_filters", c.cnn.n_filters}, {"kernel_size", c.cnn.kernel_size},
                {"dense_units", c.cnn.dense_units}, {"batch_size", c.cnn.batch_size}, {"epochs", c.cnn.epochs},
                {"learning_rate", c.cnn.learning_rate}};
    return j.dump(2) + "\n";
}

}  // namespace metacomment::cli
