#include <algorithm>
#include <set>

#include "metacomment/eval.hpp"
#include "metacomment/features/anova.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/numeric_io.hpp"
#include "metacomment/util/random.hpp"
#include "metacomment/util/strings.hpp"

namespace metacomment::eval {

std::string GridConfig::label() const {
    std::string s(classifiers::kind_name(kind));
    s += " k=" + (k_features ? std::to_string(*k_features) : std::string("all"));
    for (const auto& [name, v] : params) s += " " + name + "=" + format_real(v);
    return s;
}

std::vector<GridConfig> enumerate_grid(const GridSpec& grid) {
    if (grid.classifiers.empty() || grid.k_features.empty()) throw InvalidArgument("grid is empty");
    std::vector<GridConfig> out;
    for (const auto& cg : grid.classifiers) {
        std::vector<std::pair<std::string, std::vector<double>>> axes(cg.values.begin(), cg.values.end());
        for (const auto& [name, values] : axes) {
            if (values.empty()) throw InvalidArgument("grid parameter '" + name + "' has no values");
        }
        for (const auto& k : grid.k_features) {
            std::vector<std::size_t> pos(axes.size(), 0);
            bool more = true;
            while (more) {
                GridConfig c{cg.kind, {}, k};
                for (std::size_t a = 0; a < axes.size(); ++a) c.params[axes[a].first] = axes[a].second[pos[a]];
                classifiers::make_hyperparams(c.kind, c.params);
                out.push_back(std::move(c));
                more = false;
                for (std::size_t a = axes.size(); a-- > 0;) {
                    if (++pos[a] < axes[a].second.size()) {
                        more = true;
                        break;
                    }
                    pos[a] = 0;
                }
            }
        }
    }
    return out;
}

GridResult grid_search(const GridSpec& grid, std::shared_ptr<const features::CompiledResources> resources,
                       const corpus::LabeledDataset& ds, std::span<const std::size_t> rows, corpus::Label target,
                       int k, std::uint64_t seed) {
    GridResult result;
    result.configs = enumerate_grid(grid);
    const auto y = binary_labels(ds, rows, target);
    const auto folds = stratified_k_fold(y, k, seed);
    std::vector<std::vector<Metrics>> per_config(result.configs.size());
    std::vector<std::vector<FoldResult>> fold_results(result.configs.size());

    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_rows, test_rows;
        std::vector<int> train_y, test_y;
        for (auto i : folds[f].train) {
            train_rows.push_back(rows[i]);
            train_y.push_back(y[i]);
        }
        for (auto i : folds[f].test) {
            test_rows.push_back(rows[i]);
            test_y.push_back(y[i]);
        }
        features::FeatureExtractor extractor(resources, grid.features);
        extractor.fit(ds, train_rows);
        const std::string version = extractor.registry()->version();
        const Matrix x_train = extractor.assemble(ds, train_rows).to_dense();
        const Matrix x_test = extractor.assemble(ds, test_rows).to_dense();
        const auto scores = features::anova_f_scores(x_train, train_y);
        const std::uint64_t fold_seed = derive_seed(seed, static_cast<std::uint64_t>(f));

        for (std::size_t c = 0; c < result.configs.size(); ++c) {
            const auto& cfg = result.configs[c];
            std::vector<std::size_t> columns;
            if (cfg.k_features) columns = features::select_k_best(scores, std::min(*cfg.k_features, scores.size()));
            try {
                const auto params =
                    classifiers::with_seed(classifiers::make_hyperparams(cfg.kind, cfg.params), fold_seed);
                const auto model = classifiers::train(params, x_train, train_y, version, std::move(columns));
                const auto pred = model.predict(x_test);
                const auto m = compute_metrics(test_y, pred, grid.beta);
                per_config[c].push_back(m);
                fold_results[c].push_back(FoldResult{m, test_rows});
            } catch (const std::exception& e) {
                throw Error("grid configuration '" + cfg.label() + "', fold " + std::to_string(f) + ": " + e.what());
            }
        }
    }
    for (std::size_t c = 0; c < result.configs.size(); ++c) {
        CvResult r;
        r.seed = seed;
        r.folds = std::move(fold_results[c]);
        r.mean = mean_metrics(per_config[c]);
        r.pooled = metrics_from_counts(r.mean.tp, r.mean.fp, r.mean.fn, r.mean.tn, grid.beta);
        result.results.push_back(std::move(r));
        if (result.results[c].mean.f_beta > result.results[result.best].mean.f_beta) result.best = c;
    }
    return result;
}

namespace {

void metrics_cells(std::vector<std::string>& row, const Metrics& m) {
    row.push_back(format_real(m.precision));
    row.push_back(format_real(m.recall));
    row.push_back(format_real(m.f_beta));
    for (auto n : {m.tp, m.fp, m.fn, m.tn}) row.push_back(std::to_string(n));
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_escape(cells[i]);
    out << '\n';
}

}  // namespace

void write_grid_csv(const GridResult& result, std::ostream& out) {
    std::set<std::string> names;
    for (const auto& c : result.configs) {
        for (const auto& [name, v] : c.params) names.insert(name);
    }
    std::vector<std::string> header = {"config", "classifier", "k_features"};
    header.insert(header.end(), names.begin(), names.end());
    for (const char* h : {"fold", "precision", "recall", "f_beta", "tp", "fp", "fn", "tn"}) header.emplace_back(h);
    write_row(out, header);
    for (std::size_t c = 0; c < result.configs.size(); ++c) {
        const auto& cfg = result.configs[c];
        std::vector<std::string> prefix = {std::to_string(c), std::string(classifiers::kind_name(cfg.kind)),
                                           cfg.k_features ? std::to_string(*cfg.k_features) : "all"};
        for (const auto& n : names) {
            const auto it = cfg.params.find(n);
            prefix.push_back(it == cfg.params.end() ? "" : format_real(it->second));
        }
        const auto& r = result.results[c];
        for (std::size_t f = 0; f < r.folds.size(); ++f) {
            auto row = prefix;
            row.push_back(std::to_string(f));
            metrics_cells(row, r.folds[f].metrics);
            write_row(out, row);
        }
        for (const auto& [tag, m] : {std::pair<const char*, const Metrics*>{"mean", &r.mean}, {"pooled", &r.pooled}}) {
            auto row = prefix;
            row.emplace_back(tag);
            metrics_cells(row, *m);
            write_row(out, row);
        }
    }
}

void write_cv_csv(const CvResult& result, std::ostream& out) {
    write_row(out, {"fold", "precision", "recall", "f_beta", "tp", "fp", "fn", "tn"});
    for (std::size_t f = 0; f < result.folds.size(); ++f) {
        std::vector<std::string> row = {std::to_string(f)};
        metrics_cells(row, result.folds[f].metrics);
        write_row(out, row);
    }
    for (const auto& [tag, m] : {std::pair<const char*, const Metrics*>{"mean", &result.mean}, {"pooled", &result.pooled}}) {
        std::vector<std::string> row = {tag};
        metrics_cells(row, *m);
        write_row(out, row);
    }
}

}  // namespace metacomment::eval
