#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "metacomment/cli.hpp"
#include "metacomment/features/anova.hpp"
#include "metacomment/sampling.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/hash.hpp"
#include "metacomment/util/numeric_io.hpp"
#include "metacomment/util/random.hpp"
#include "metacomment/util/strings.hpp"

#ifndef METACOMMENT_VERSION
#define METACOMMENT_VERSION "dev"
#endif

namespace metacomment::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using corpus::Label;

constexpr std::array<Label, 4> kTargets = {Label::Meta, Label::Media, Label::Journalist, Label::Moderator};
constexpr std::array<const char*, 4> kModelFiles = {"meta", "media", "journalist", "moderator"};

// Raised for bad flag values found after parsing; reported like a parse error.
class UsageError : public Error {
public:
    using Error::Error;
};

struct Common {
    std::string config_path;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string out = "out";
};

// One command invocation: resolved config, output directory and the manifest record.
class Run {
public:
    Run(std::string command, std::vector<std::string> args, RunConfig config, fs::path out)
        : command_(std::move(command)), args_(std::move(args)), config_(std::move(config)), out_(std::move(out)) {
        fs::create_directories(out_);
    }

    const RunConfig& config() const { return config_; }
    RunConfig& config() { return config_; }
    std::uint64_t seed() const { return config_.seed; }

    void input(const std::string& path) {
        for (const auto& in : inputs_) {
            if (in["path"] == path) return;
        }
        inputs_.push_back(json{{"path", path}, {"fnv1a64", hash_file(path)}});
    }

    // Every existing file of a model prefix.
    void input_prefix(const std::string& prefix) {
        for (const char* suffix : {".vec", ".out.vec", ".meta.json", ".docs.vec", ".docs.meta.json"}) {
            if (fs::exists(prefix + suffix)) input(prefix + suffix);
        }
    }

    void derived_seed(const std::string& purpose, std::uint64_t value) { seeds_[purpose] = value; }

    std::string output(const std::string& name) {
        const fs::path p = out_ / name;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) outputs_.push_back(name);
        return p.string();
    }

    void write(const std::string& name, const std::string& content) {
        const auto path = output(name);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw DataError("cannot write " + path);
        f << content;
        if (!f) throw DataError("write failed: " + path);
    }

    corpus::LabeledDataset dataset(const std::string& path) {
        input(path);
        return corpus::load_dataset(path);
    }

    void finish() {
        write("config.json", config_to_json(config_));
        json manifest;
        manifest["tool"] = "metacomment";
        manifest["version"] = METACOMMENT_VERSION;
        manifest["command"] = command_;
        manifest["arguments"] = args_;
        manifest["seed"] = config_.seed;
        manifest["derived_seeds"] = seeds_;
        manifest["config"] = json::parse(config_to_json(config_));
        manifest["inputs"] = inputs_;
        auto outputs = outputs_;
        outputs.push_back("manifest.json");
        manifest["outputs"] = outputs;
        write("manifest.json", manifest.dump(2) + "\n");
    }

private:
    std::string command_;
    std::vector<std::string> args_;
    RunConfig config_;
    fs::path out_;
    json inputs_ = json::array();
    json seeds_ = json::object();
    std::vector<std::string> outputs_;
};

json metrics_json(const eval::Metrics& m) {
    return json{{"precision", m.precision}, {"recall", m.recall}, {"f_beta", m.f_beta}, {"beta", m.beta},
                {"tp", m.tp},           {"fp", m.fp},         {"fn", m.fn},         {"tn", m.tn}};
}

std::vector<Label> parse_targets(const std::string& text) {
    if (text == "all") return {kTargets.begin(), kTargets.end()};
    const auto label = corpus::parse_label(text);
    if (!label || *label == Label::NonMeta) {
        throw UsageError("--target must be Meta, Media, Journalist, Moderator or all, not '" + text + "'");
    }
    return {*label};
}

std::size_t addressee_index(const std::string& slug) {
    for (std::size_t i = 0; i < 3; ++i) {
        if (features::class_slug(corpus::kAddressees[i]) == slug ||
            corpus::label_name(corpus::kAddressees[i]) == slug) {
            return i;
        }
    }
    throw UsageError("unknown addressee class '" + slug + "' (media, journalist, moderator)");
}

const textprep::StopWords* stopwords_for(const RunConfig& c, textprep::StopWords& storage) {
    if (!c.remove_stopwords) return nullptr;
    if (c.stopwords.empty()) return &textprep::StopWords::german();
    storage = textprep::StopWords::load(c.stopwords);
    return &storage;
}

void record_resource_inputs(Run& run) {
    const auto& c = run.config();
    for (const auto& f : c.keyword_files) {
        if (!f.empty()) run.input(f);
    }
    for (const auto* f : {&c.stopwords, &c.departments, &c.sentiment_lexicon}) {
        if (!f->empty()) run.input(*f);
    }
    const auto groups = features::FeatureConfig::parse(c.feature_groups);
    if ((groups.semantic || groups.semantic_dims) && !c.doc_model.empty()) run.input_prefix(c.doc_model);
}

std::shared_ptr<const features::CompiledResources> resources_for(Run& run) {
    record_resource_inputs(run);
    return build_resources(run.config());
}

std::shared_ptr<const embeddings::WordEmbeddingModel> word_model_for(Run& run) {
    const auto& prefix = run.config().word_model;
    if (prefix.empty()) throw InvalidArgument("the CNN needs 'embeddings.word_model' (see train-embeddings)");
    run.input_prefix(prefix);
    return std::make_shared<const embeddings::WordEmbeddingModel>(embeddings::load_word_model(prefix));
}

classifiers::Hyperparams classifier_params(const RunConfig& c) {
    return classifiers::make_hyperparams(c.classifier, c.classifier_params);
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// --- subcommands -----------------------------------------------------------

void cmd_ingest(Run& run, const std::string& input, const std::string& source_tag, std::ostream& out) {
    auto ds = run.dataset(input);
    if (!source_tag.empty()) ds = corpus::LabeledDataset(ds.entries(), source_tag);
    std::ostringstream jsonl;
    corpus::save_dataset(ds, jsonl);
    run.write("dataset.jsonl", jsonl.str());
    const auto report = corpus::dataset_stats(ds);
    run.write("stats.json", corpus::stats_to_json(report));
    out << "ingested " << ds.size() << " comments from " << input << '\n';
}

void cmd_stats(Run& run, const std::vector<std::string>& data, std::ostream& out) {
    std::string text;
    json all = json::object();
    for (const auto& path : data) {
        const auto ds = run.dataset(path);
        const auto report = corpus::dataset_stats(ds);
        text += corpus::stats_to_text(report, ds.source_tag());
        text += '\n';
        all[ds.source_tag()] = json::parse(corpus::stats_to_json(report));
    }
    run.write("stats.txt", text);
    run.write("stats.json", all.dump(2) + "\n");
    out << text;
}

void cmd_train_embeddings(Run& run, const std::vector<std::string>& data, bool doc, std::ostream& out) {
    const auto& c = run.config();
    textprep::StopWords storage;
    const auto* sw = stopwords_for(c, storage);
    if (!c.stopwords.empty()) run.input(c.stopwords);
    std::vector<textprep::TokenStream> corpus;
    for (const auto& path : data) {
        const auto ds = run.dataset(path);
        for (const auto& e : ds.entries()) corpus.push_back(textprep::preprocess(e.comment, sw));
    }
    auto params = c.embedding;
    params.seed = derive_seed(run.seed(), "embeddings");
    params.workers = c.jobs;
    run.derived_seed("embeddings", params.seed);
    std::vector<double> losses;
    if (doc) {
        embeddings::DocEmbeddingParams dp{params, c.inference};
        dp.inference.seed = derive_seed(run.seed(), "inference");
        run.derived_seed("inference", dp.inference.seed);
        const auto model = embeddings::train_doc_embeddings(corpus, dp);
        embeddings::save_doc_model(model, run.output("docs"));
        for (const char* s : {".vec", ".out.vec", ".meta.json", ".docs.vec", ".docs.meta.json"}) run.output(std::string("docs") + s);
        losses = model.words().epoch_loss;
        out << "document model: " << model.size() << " documents, " << model.words().size() << " words, dim "
            << model.dim() << '\n';
    } else {
        const auto model = embeddings::train_word_embeddings(corpus, params);
        embeddings::save_word_model(model, run.output("words"));
        for (const char* s : {".vec", ".out.vec", ".meta.json"}) run.output(std::string("words") + s);
        losses = model.epoch_loss;
        out << "word model: " << model.size() << " words, dim " << model.dim() << '\n';
    }
    for (std::size_t e = 0; e < losses.size(); ++e) out << "epoch " << e + 1 << " loss " << format_real(losses[e]) << '\n';
}

void cmd_neighbors(Run& run, std::string model_prefix, const std::vector<std::string>& words, std::size_t top,
                   std::ostream& out) {
    if (model_prefix.empty()) model_prefix = run.config().word_model;
    if (model_prefix.empty()) throw UsageError("neighbors needs --model or 'embeddings.word_model'");
    run.input_prefix(model_prefix);
    const auto m = embeddings::load_word_model(model_prefix);
    std::string tsv = "word\trank\tneighbor\tsimilarity\n";
    for (const auto& w : words) {
        const auto token = textprep::normalize(w);
        const auto nn = embeddings::most_similar(m, trim(token), top);
        for (std::size_t r = 0; r < nn.size(); ++r) {
            tsv += std::string(trim(token)) + '\t' + std::to_string(r + 1) + '\t' + nn[r].first + '\t' +
                   format_real(nn[r].second) + '\n';
        }
    }
    run.write("neighbors.tsv", tsv);
    out << tsv;
}

void cmd_enrich(Run& run, std::string model_prefix, std::ostream& out) {
    const auto& c = run.config();
    if (model_prefix.empty()) model_prefix = c.word_model;
    if (model_prefix.empty()) throw UsageError("enrich-keywords needs --model or 'embeddings.word_model'");
    run.input_prefix(model_prefix);
    for (const auto& f : c.keyword_files) {
        if (!f.empty()) run.input(f);
    }
    const auto m = embeddings::load_word_model(model_prefix);
    const auto seeds = load_keywords(c);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto ks = features::enrich_keywords(corpus::kAddressees[i], seeds[i].seeds, m, c.enrich_top_n, c.enrich_min_sim);
        const auto slug = features::class_slug(ks.cls);
        features::save_keyword_file(ks, run.output("keywords/" + slug + ".txt"));
        out << slug << ": " << ks.seeds.size() << " seeds, " << ks.enriched.size() - ks.seeds.size() << " added";
        if (!ks.no_embedding.empty()) out << ", no embedding for: " << join(ks.no_embedding, " ");
        out << '\n';
    }
}

std::vector<std::size_t> all_rows(const corpus::LabeledDataset& ds) {
    std::vector<std::size_t> rows(ds.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return rows;
}

std::vector<std::size_t> require_labeled(const corpus::LabeledDataset& ds) {
    auto rows = eval::labeled_rows(ds);
    if (rows.empty()) throw DataError("dataset '" + ds.source_tag() + "' has no labeled comments");
    return rows;
}

void cmd_features(Run& run, const std::string& data, std::ostream& out) {
    const auto ds = run.dataset(data);
    const auto resources = resources_for(run);
    features::FeatureExtractor ex(resources, features::FeatureConfig::parse(run.config().feature_groups));
    auto fit_rows = eval::labeled_rows(ds);
    if (fit_rows.empty()) fit_rows = all_rows(ds);
    ex.fit(ds, fit_rows);
    const auto fm = ex.assemble(ds, all_rows(ds));
    features::write_triplets(fm, run.output("features.txt"), run.output("features.names"));
    run.write("extractor.json", ex.save_state());
    out << fm.rows.size() << " rows x " << fm.registry->size() << " features\n";
}

void cmd_train(Run& run, const std::string& data, std::ostream& out) {
    const auto& c = run.config();
    const auto ds = run.dataset(data);
    const auto rows = require_labeled(ds);
    const auto resources = resources_for(run);
    eval::TwoStepSpec spec;
    spec.features = features::FeatureConfig::parse(c.feature_groups);
    spec.meta = classifier_params(c);
    spec.addressee = spec.meta;
    spec.k_features = c.k_features;
    spec.calibration_folds = c.calibration_folds;
    const auto trained = eval::train_two_step(resources, spec, ds, rows, run.seed());
    run.write("extractor.json", trained.extractor->save_state());
    classifiers::save_model(trained.models.meta, run.output("models/meta.model.json"));
    for (std::size_t i = 0; i < 3; ++i) {
        classifiers::save_model(trained.models.addressees[i],
                                run.output(std::string("models/") + kModelFiles[i + 1] + ".model.json"));
    }
    out << "trained " << classifiers::kind_name(c.classifier) << " models on " << rows.size() << " comments, "
        << trained.extractor->registry()->size() << " features\n";
}

void cmd_classify(Run& run, const std::string& model_dir, const std::string& data, std::optional<double> threshold,
                  std::ostream& out) {
    const fs::path dir(model_dir);
    const auto config_path = (dir / "config.json").string();
    run.input(config_path);
    // The models only make sense with the resources they were trained with.
    const auto seed = run.config().seed;
    run.config() = load_config(config_path);
    run.config().seed = seed;
    if (threshold) run.config().threshold = *threshold;
    const auto& c = run.config();
    if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) throw UsageError("--threshold must lie in [0, 1]");

    const auto resources = resources_for(run);
    const auto state_path = (dir / "extractor.json").string();
    run.input(state_path);
    const auto ex = features::FeatureExtractor::restore(resources, features::FeatureConfig::parse(c.feature_groups),
                                                        read_file(state_path));
    auto load = [&](const char* name) {
        const auto path = (dir / "models" / (std::string(name) + ".model.json")).string();
        run.input(path);
        auto m = classifiers::load_model(path);
        classifiers::check_registry(m, *ex.registry());
        return m;
    };
    eval::TwoStepModels models{load(kModelFiles[0]), {load(kModelFiles[1]), load(kModelFiles[2]), load(kModelFiles[3])}};

    const auto ds = run.dataset(data);
    std::string jsonl;
    std::size_t n_meta = 0;
    for (const auto& e : ds.entries()) {
        const auto r = eval::two_step_classify(models, ex.assemble(e.comment), c.threshold);
        json row;
        row["id"] = e.comment.id;
        row["meta"] = r.meta;
        json labels = json::array();
        for (const auto l : r.labels.labels()) labels.push_back(corpus::label_name(l));
        row["labels"] = labels;
        row["meta_decision"] = r.meta_decision;
        json conf = json::object();
        for (std::size_t i = 0; i < 3; ++i) conf[std::string(corpus::label_name(corpus::kAddressees[i]))] = r.confidence[i];
        row["confidence"] = conf;
        jsonl += row.dump() + '\n';
        n_meta += r.meta ? 1 : 0;
    }
    run.write("predictions.jsonl", jsonl);
    out << ds.size() << " comments classified, " << n_meta << " meta\n";
}

void cmd_grid_search(Run& run, const std::string& data, const std::string& target_name, std::ostream& out) {
    const auto& c = run.config();
    const auto targets = parse_targets(target_name);
    if (targets.size() != 1) throw UsageError("grid-search takes a single --target");
    const auto ds = run.dataset(data);
    const auto rows = require_labeled(ds);
    const auto resources = resources_for(run);
    eval::GridSpec grid;
    grid.features = features::FeatureConfig::parse(c.feature_groups);
    grid.classifiers = c.grid;
    grid.k_features = c.grid_k_features;
    grid.beta = c.beta;
    const auto result = eval::grid_search(grid, resources, ds, rows, targets[0], c.grid_folds, run.seed());
    std::ostringstream csv;
    eval::write_grid_csv(result, csv);
    run.write("grid.csv", csv.str());
    const auto& best = result.configs[result.best];
    json b;
    b["target"] = corpus::label_name(targets[0]);
    b["config"] = best.label();
    b["kind"] = classifiers::kind_name(best.kind);
    b["params"] = best.params;
    b["k_features"] = best.k_features ? json(*best.k_features) : json("all");
    b["mean"] = metrics_json(result.results[result.best].mean);
    b["pooled"] = metrics_json(result.results[result.best].pooled);
    run.write("best.json", b.dump(2) + "\n");
    for (std::size_t i = 0; i < result.configs.size(); ++i) {
        out << result.configs[i].label() << "  F" << format_real(c.beta) << " " << fixed3(result.results[i].mean.f_beta)
            << (i == result.best ? "  *" : "") << '\n';
    }
}

eval::PipelineFactory make_factory(Run& run, const std::string& pipeline, std::string& label) {
    const auto& c = run.config();
    if (pipeline == "traditional") {
        eval::TraditionalSpec spec{features::FeatureConfig::parse(c.feature_groups), classifier_params(c), c.k_features};
        label = std::string(classifiers::kind_name(c.classifier));
        return eval::traditional_factory(resources_for(run), spec);
    }
    if (pipeline == "cnn") {
        label = "cnn";
        return eval::cnn_factory(word_model_for(run), c.cnn);
    }
    throw UsageError("--pipeline must be traditional or cnn, not '" + pipeline + "'");
}

void cmd_evaluate(Run& run, const std::string& data, const std::string& target_name, const std::string& pipeline,
                  std::ostream& out) {
    const auto& c = run.config();
    const auto targets = parse_targets(target_name);
    const auto ds = run.dataset(data);
    const auto rows = require_labeled(ds);
    std::string label;
    const auto factory = make_factory(run, pipeline, label);
    json summary;
    summary["command"] = "evaluate";
    summary["label"] = label;
    summary["pipeline"] = pipeline;
    summary["dataset"] = ds.source_tag();
    summary["folds"] = c.folds;
    summary["beta"] = c.beta;
    json means = json::object(), pooled = json::object();
    for (const auto target : targets) {
        const auto cv = eval::cross_validate(factory, ds, rows, target, c.folds, run.seed(), c.beta);
        std::ostringstream csv;
        eval::write_cv_csv(cv, csv);
        run.write("cv_" + features::class_slug(target) + ".csv", csv.str());
        const std::string name(corpus::label_name(target));
        means[name] = metrics_json(cv.mean);
        pooled[name] = metrics_json(cv.pooled);
        out << name << "  P " << fixed3(cv.mean.precision) << "  R " << fixed3(cv.mean.recall) << "  F"
            << format_real(c.beta) << " " << fixed3(cv.mean.f_beta) << '\n';
    }
    summary["targets"] = means;
    summary["pooled"] = pooled;
    run.write("metrics.json", summary.dump(2) + "\n");
}

void cmd_cross_eval(Run& run, const std::string& train_path, const std::string& test_path,
                    const std::string& target_name, const std::string& pipeline, std::ostream& out) {
    const auto& c = run.config();
    const auto targets = parse_targets(target_name);
    const auto train = run.dataset(train_path);
    const auto test = run.dataset(test_path);
    std::string label;
    const auto factory = make_factory(run, pipeline, label);
    const auto result = eval::cross_dataset_eval(train, test, factory, targets, run.seed(), c.beta);
    std::string csv = "target,precision,recall,f_beta,tp,fp,fn,tn\n";
    json per = json::object();
    for (const auto target : targets) {
        const auto& m = result.at(target);
        const std::string name(corpus::label_name(target));
        csv += name + ',' + format_real(m.precision) + ',' + format_real(m.recall) + ',' + format_real(m.f_beta) + ',' +
               std::to_string(m.tp) + ',' + std::to_string(m.fp) + ',' + std::to_string(m.fn) + ',' +
               std::to_string(m.tn) + '\n';
        per[name] = metrics_json(m);
        out << name << "  P " << fixed3(m.precision) << "  R " << fixed3(m.recall) << "  F" << format_real(c.beta) << " "
            << fixed3(m.f_beta) << '\n';
    }
    run.write("cross_eval.csv", csv);
    json summary;
    summary["command"] = "cross-eval";
    summary["label"] = label + " " + train.source_tag() + "->" + test.source_tag();
    summary["pipeline"] = pipeline;
    summary["train"] = train.source_tag();
    summary["test"] = test.source_tag();
    summary["beta"] = c.beta;
    summary["targets"] = per;
    run.write("metrics.json", summary.dump(2) + "\n");
}

void cmd_rank_features(Run& run, const std::string& data, std::size_t top, std::ostream& out, std::ostream& err) {
    const auto ds = run.dataset(data);
    const auto rows = require_labeled(ds);
    const auto resources = resources_for(run);
    features::FeatureExtractor ex(resources, features::FeatureConfig::parse(run.config().feature_groups));
    ex.fit(ds, rows);
    const auto fm = ex.assemble(ds, rows);
    std::string tsv = "class\trank\tfeature\tF\n";
    for (const auto target : kTargets) {
        const auto y = eval::binary_labels(ds, rows, target);
        const std::string name(corpus::label_name(target));
        std::vector<std::pair<std::string, double>> scores;
        try {
            scores = features::anova_f_scores(fm, y);
        } catch (const InvalidArgument& e) {
            err << "warning: skipping " << name << ": " << e.what() << '\n';
            continue;
        }
        std::vector<double> f(scores.size());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = scores[i].second;
        const auto best = features::select_k_best(f, std::min(top, f.size()));
        for (std::size_t r = 0; r < best.size(); ++r) {
            tsv += name + '\t' + std::to_string(r + 1) + '\t' + scores[best[r]].first + '\t' +
                   format_real(scores[best[r]].second) + '\n';
        }
    }
    run.write("ranking.tsv", tsv);
    out << tsv;
}

struct SampleArgs {
    std::string data;
    std::string mode = "pattern";
    std::vector<std::string> classes = {"media", "journalist", "moderator"};
    std::size_t n = 100;
    std::string batch_id;
    std::vector<std::string> coded;
    std::string policy = "majority";
};

void cmd_sample(Run& run, const SampleArgs& a, std::ostream& out) {
    const auto& c = run.config();
    const auto ds = run.dataset(a.data);
    if (a.mode == "merge") {
        if (a.coded.empty()) throw UsageError("sample --mode merge needs --coded files");
        std::vector<sampling::CodedComment> coded;
        for (const auto& path : a.coded) {
            run.input(path);
            auto part = sampling::read_batch_csv(read_file(path), path);
            coded.insert(coded.end(), part.begin(), part.end());
        }
        const auto result = sampling::merge_annotations(ds, coded, sampling::parse_merge_policy(a.policy));
        std::ostringstream jsonl;
        corpus::save_dataset(result.dataset, jsonl);
        run.write("dataset.jsonl", jsonl.str());
        run.write("merged.txt", result.merged.empty() ? std::string() : join(result.merged, "\n") + "\n");
        run.write("flagged.txt", result.flagged.empty() ? std::string() : join(result.flagged, "\n") + "\n");
        out << result.merged.size() << " comments labeled, " << result.flagged.size() << " flagged\n";
        return;
    }

    sampling::AnnotationBatch batch;
    const std::string batch_id = a.batch_id.empty() ? a.mode : a.batch_id;
    if (a.mode == "random") {
        const auto seed = derive_seed(run.seed(), "sample");
        run.derived_seed("sample", seed);
        batch = sampling::sample_random(ds, a.n, seed, batch_id);
    } else if (a.mode == "pattern" || a.mode == "similarity") {
        for (const auto& f : c.keyword_files) {
            if (!f.empty()) run.input(f);
        }
        const auto keywords = load_keywords(c);
        std::shared_ptr<embeddings::DocEmbeddingModel> dm;
        textprep::StopWords storage;
        const textprep::StopWords* sw = nullptr;
        if (a.mode == "similarity") {
            if (c.doc_model.empty()) throw UsageError("similarity sampling needs 'embeddings.doc_model'");
            run.input_prefix(c.doc_model);
            dm = std::make_shared<embeddings::DocEmbeddingModel>(embeddings::load_doc_model(c.doc_model));
            sw = stopwords_for(c, storage);
        }
        std::vector<sampling::AnnotationBatch> parts;
        for (const auto& cls : a.classes) {
            const auto& ks = keywords[addressee_index(cls)];
            parts.push_back(a.mode == "pattern" ? sampling::sample_by_pattern(ds, ks, a.n, batch_id)
                                                : sampling::sample_by_similarity(ds, ks, dm->words(), *dm, a.n, sw, batch_id));
        }
        batch = sampling::merge_batches(parts, batch_id);
    } else {
        throw UsageError("--mode must be pattern, similarity, random or merge, not '" + a.mode + "'");
    }
    std::ostringstream csv;
    sampling::write_batch_csv(batch, csv);
    run.write("batch.csv", csv.str());
    out << batch.items.size() << " comments in batch " << batch.batch_id << '\n';
}

void cmd_report(Run& run, const std::vector<std::string>& files, std::ostream& out) {
    std::vector<std::pair<std::string, json>> columns;
    for (const auto& path : files) {
        run.input(path);
        json j;
        try {
            j = json::parse(read_file(path));
        } catch (const json::exception& e) {
            throw DataError(path + ": " + e.what());
        }
        if (!j.contains("targets") || !j["targets"].is_object()) throw DataError(path + ": no 'targets' object");
        const std::string label = j.contains("label") && j["label"].is_string() ? j["label"].get<std::string>() : path;
        columns.emplace_back(label, j["targets"]);
    }
    constexpr int kCell = 22;
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    auto finish_line = [](std::string line) {
        while (!line.empty() && line.back() == ' ') line.pop_back();
        return line + '\n';
    };
    std::string header = pad("Class", 12), sub = pad("", 12);
    for (const auto& [label, t] : columns) {
        header += "| " + pad(label, kCell);
        sub += "| " + pad("P      R      F", kCell);
    }
    std::string text = finish_line(header) + finish_line(sub);
    for (const auto target : kTargets) {
        const std::string name(corpus::label_name(target));
        std::string line = pad(name, 12);
        bool any = false;
        for (const auto& [label, t] : columns) {
            std::string cell = "-";
            if (t.contains(name)) {
                const auto& m = t[name];
                cell = fixed3(m.value("precision", 0.0)) + "  " + fixed3(m.value("recall", 0.0)) + "  " +
                       fixed3(m.value("f_beta", 0.0));
                any = true;
            }
            line += "| " + pad(cell, kCell);
        }
        if (any) text += finish_line(line);
    }
    run.write("report.txt", text);
    out << text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Meta-comment classification of news comments", "metacomment"};
    app.require_subcommand(1);
    app.set_version_flag("--version", METACOMMENT_VERSION);

    Common common;

    auto add = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", common.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "Master seed (overrides the config)");
        sub->add_option("--jobs", common.jobs, "Worker threads for embedding training")->check(CLI::PositiveNumber);
        sub->add_option("--out", common.out, "Output directory")->capture_default_str();
        return sub;
    };

    std::string input, source_tag, data, model, target = "Meta", pipeline = "traditional", model_dir, train, test;
    std::vector<std::string> data_list, words, metrics;
    std::size_t top = 10;
    bool doc = false;
    double threshold = 0.8;
    SampleArgs sample;
    std::optional<double> threshold_override;

    auto* ingest = add("ingest", "Validate a comments-jsonl file and write it back normalised");
    ingest->add_option("--input", input, "comments-jsonl file")->required()->check(CLI::ExistingFile);
    ingest->add_option("--source-tag", source_tag, "Dataset tag (default: file stem)");

    auto* stats = add("stats", "Corpus statistics");
    stats->add_option("--data", data_list, "comments-jsonl files")->required()->check(CLI::ExistingFile);

    auto* temb = add("train-embeddings", "Train word or document embeddings");
    temb->add_option("--data", data_list, "comments-jsonl files")->required()->check(CLI::ExistingFile);
    temb->add_flag("--doc", doc, "Train paragraph vectors instead of word vectors");

    auto* nb = add("neighbors", "Nearest words in an embedding space");
    nb->add_option("--model", model, "Word model prefix (default: embeddings.word_model)");
    nb->add_option("--word", words, "Query words")->required();
    nb->add_option("--top", top, "Neighbours per word")->capture_default_str();

    auto* enrich = add("enrich-keywords", "Extend the keyword lists with embedding neighbours");
    enrich->add_option("--model", model, "Word model prefix (default: embeddings.word_model)");

    auto* feats = add("features", "Extract the feature matrix");
    feats->add_option("--data", data, "comments-jsonl file")->required()->check(CLI::ExistingFile);

    auto* tr = add("train", "Train the two-step classifier");
    tr->add_option("--data", data, "Labeled comments-jsonl file")->required()->check(CLI::ExistingFile);

    auto* gs = add("grid-search", "Cross-validated grid search");
    gs->add_option("--data", data, "Labeled comments-jsonl file")->required()->check(CLI::ExistingFile);
    gs->add_option("--target", target, "Meta, Media, Journalist or Moderator")->capture_default_str();

    auto* ev = add("evaluate", "Stratified k-fold cross-validation");
    ev->add_option("--data", data, "Labeled comments-jsonl file")->required()->check(CLI::ExistingFile);
    ev->add_option("--target", target, "Meta, Media, Journalist, Moderator or all")->capture_default_str();
    ev->add_option("--pipeline", pipeline, "traditional or cnn")->capture_default_str();

    auto* ce = add("cross-eval", "Train on one dataset, test on another");
    ce->add_option("--train", train, "Training comments-jsonl file")->required()->check(CLI::ExistingFile);
    ce->add_option("--test", test, "Test comments-jsonl file")->required()->check(CLI::ExistingFile);
    ce->add_option("--target", target, "Meta, Media, Journalist, Moderator or all")->capture_default_str();
    ce->add_option("--pipeline", pipeline, "traditional or cnn")->capture_default_str();

    auto* cl = add("classify", "Apply a trained two-step classifier");
    cl->add_option("--model-dir", model_dir, "Output directory of 'train'")->required()->check(CLI::ExistingDirectory);
    cl->add_option("--data", data, "comments-jsonl file")->required()->check(CLI::ExistingFile);
    auto* thr = cl->add_option("--threshold", threshold, "Addressee confidence threshold (default: config, 0.8)");

    auto* rk = add("rank-features", "Top features by ANOVA F-value per class");
    rk->add_option("--data", data, "Labeled comments-jsonl file")->required()->check(CLI::ExistingFile);
    rk->add_option("--top", top, "Features per class")->capture_default_str();

    auto* sm = add("sample", "Draw annotation batches or merge coded batches");
    sm->add_option("--data", sample.data, "comments-jsonl file")->required()->check(CLI::ExistingFile);
    sm->add_option("--mode", sample.mode, "pattern, similarity, random or merge")->capture_default_str();
    sm->add_option("--class", sample.classes, "Addressee classes for pattern/similarity sampling");
    sm->add_option("--n", sample.n, "Comments per class (or in total for random)")->capture_default_str();
    sm->add_option("--batch-id", sample.batch_id, "Batch identifier (default: the mode)");
    sm->add_option("--coded", sample.coded, "Coded batch CSV files (merge)")->check(CLI::ExistingFile);
    sm->add_option("--policy", sample.policy, "majority or strict (merge)")->capture_default_str();

    auto* rp = add("report", "Metrics summary table");
    rp->add_option("--metrics", metrics, "metrics.json files from evaluate or cross-eval")->required()->check(CLI::ExistingFile);

    std::vector<std::string> argv_storage = {"metacomment"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    if (thr->count()) threshold_override = threshold;

    auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    RunConfig config;
    try {
        if (!common.config_path.empty()) config = load_config(common.config_path);
        if (sub->get_option("--seed")->count()) config.seed = common.seed;
        if (sub->get_option("--jobs")->count()) config.jobs = common.jobs;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        Run run(command, args, std::move(config), common.out);
        if (!common.config_path.empty()) run.input(common.config_path);
        if (sub == ingest) cmd_ingest(run, input, source_tag, out);
        else if (sub == stats) cmd_stats(run, data_list, out);
        else if (sub == temb) cmd_train_embeddings(run, data_list, doc, out);
        else if (sub == nb) cmd_neighbors(run, model, words, top, out);
        else if (sub == enrich) cmd_enrich(run, model, out);
        else if (sub == feats) cmd_features(run, data, out);
        else if (sub == tr) cmd_train(run, data, out);
        else if (sub == gs) cmd_grid_search(run, data, target, out);
        else if (sub == ev) cmd_evaluate(run, data, target, pipeline, out);
        else if (sub == ce) cmd_cross_eval(run, train, test, target, pipeline, out);
        else if (sub == cl) cmd_classify(run, model_dir, data, threshold_override, out);
        else if (sub == rk) cmd_rank_features(run, data, top, out, err);
        else if (sub == sm) cmd_sample(run, sample, out);
        else if (sub == rp) cmd_report(run, metrics, out);
        run.finish();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace metacomment::cli
