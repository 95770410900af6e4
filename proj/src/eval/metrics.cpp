#include <algorithm>

#include "metacomment/eval.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"

namespace metacomment::eval {

double f_beta(double precision, double recall, double beta) {
    if (!(beta > 0)) throw InvalidArgument("beta must be positive");
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    return denom > 0 ? (1 + b2) * precision * recall / denom : 0.0;
}

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn, double beta) {
    Metrics m;
    m.beta = beta;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f_beta = f_beta(m.precision, m.recall, beta);
    return m;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> predicted, double beta) {
    if (truth.size() != predicted.size()) throw InvalidArgument("compute_metrics: length mismatch");
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i]) {
            (truth[i] ? tp : fp)++;
        } else {
            (truth[i] ? fn : tn)++;
        }
    }
    return metrics_from_counts(tp, fp, fn, tn, beta);
}

Metrics mean_metrics(std::span<const Metrics> folds) {
    if (folds.empty()) throw InvalidArgument("mean_metrics: no folds");
    Metrics m;
    m.beta = folds.front().beta;
    for (const auto& f : folds) {
        m.precision += f.precision;
        m.recall += f.recall;
        m.f_beta += f.f_beta;
        m.tp += f.tp;
        m.fp += f.fp;
        m.fn += f.fn;
        m.tn += f.tn;
    }
    const double n = static_cast<double>(folds.size());
    m.precision /= n;
    m.recall /= n;
    m.f_beta /= n;
    return m;
}

std::vector<Fold> stratified_k_fold(std::span<const int> y, int k, std::uint64_t seed) {
    if (k < 2) throw InvalidArgument("stratified_k_fold: k must be at least 2");
    std::array<std::vector<std::size_t>, 2> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) throw InvalidArgument("stratified_k_fold: labels must be 0 or 1");
        members[static_cast<std::size_t>(y[i])].push_back(i);
    }
    for (int cls = 0; cls < 2; ++cls) {
        if (members[cls].size() < static_cast<std::size_t>(k)) {
            throw InvalidArgument("stratified_k_fold: class " + std::to_string(cls) + " has " +
                                  std::to_string(members[cls].size()) + " members, fewer than k = " +
                                  std::to_string(k));
        }
    }
    std::vector<int> fold_of(y.size());
    std::size_t position = 0;
    for (int cls = 0; cls < 2; ++cls) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
        rng.shuffle(std::span<std::size_t>(members[cls]));
        for (auto i : members[cls]) fold_of[i] = static_cast<int>(position++ % static_cast<std::size_t>(k));
    }
    std::vector<Fold> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (int f = 0; f < k; ++f) (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
    }
    return folds;
}

std::vector<std::size_t> labeled_rows(const corpus::LabeledDataset& ds) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!ds[i].labels.empty()) rows.push_back(i);
    }
    return rows;
}

std::vector<int> binary_labels(const corpus::LabeledDataset& ds, std::span<const std::size_t> rows,
                               corpus::Label target) {
    std::vector<int> y;
    y.reserve(rows.size());
    for (auto r : rows) y.push_back(ds[r].labels.contains(target) ? 1 : 0);
    return y;
}

}  // namespace metacomment::eval
