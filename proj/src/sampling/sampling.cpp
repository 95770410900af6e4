#include "metacomment/sampling.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "metacomment/util/error.hpp"
#include "metacomment/util/numeric_io.hpp"
#include "metacomment/util/random.hpp"
#include "metacomment/util/strings.hpp"

namespace metacomment::sampling {

namespace {

constexpr std::array<std::string_view, 3> kProvenanceNames = {"pattern", "similarity", "random"};
constexpr std::array<std::string_view, 7> kColumns = {"batch_id", "comment_id", "title", "text",
                                                      "provenance", "score",    "label"};

}  // namespace

std::string_view provenance_name(Provenance p) { return kProvenanceNames[static_cast<std::size_t>(p)]; }

Provenance parse_provenance(std::string_view name) {
    for (std::size_t i = 0; i < kProvenanceNames.size(); ++i) {
        if (kProvenanceNames[i] == name) return static_cast<Provenance>(i);
    }
    throw DataError("unknown provenance '" + std::string(name) + "'");
}

AnnotationBatch sample_by_pattern(const corpus::LabeledDataset& ds, const features::KeywordSet& ks, std::size_t n,
                                  std::string batch_id) {
    AnnotationBatch batch{std::move(batch_id), {}};
    if (n == 0) return batch;
    const auto pattern = features::KeywordPattern::compile(ks.enriched);
    for (const auto& e : ds.entries()) {
        if (features::count_pattern_matches(e.comment, pattern) == 0) continue;
        batch.items.push_back(BatchItem{e.comment, Provenance::Pattern, std::nullopt});
        if (batch.items.size() == n) break;
    }
    return batch;
}

AnnotationBatch sample_by_similarity(const corpus::LabeledDataset& ds, const features::KeywordSet& ks,
                                     const embeddings::WordEmbeddingModel& m,
                                     const embeddings::DocEmbeddingModel& dm, std::size_t n,
                                     const textprep::StopWords* stopwords, std::string batch_id) {
    std::vector<double> centre(m.dim(), 0.0);
    std::size_t used = 0;
    for (const auto& k : ks.enriched) {
        const auto idx = m.find(k);
        if (!idx) continue;
        const auto v = m.vector(*idx);
        for (std::size_t d = 0; d < v.size(); ++d) centre[d] += v[d];
        ++used;
    }
    if (used == 0) {
        throw InvalidArgument("none of the " + std::string(corpus::label_name(ks.cls)) +
                              " keywords has a word vector");
    }
    for (double& x : centre) x /= static_cast<double>(used);

    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto ts = textprep::preprocess(ds[i].comment, stopwords);
        const auto w = dm.embed(ts);
        scored.emplace_back(embeddings::cosine_similarity(w.values, centre), i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    AnnotationBatch batch{std::move(batch_id), {}};
    for (std::size_t r = 0; r < std::min(n, scored.size()); ++r) {
        batch.items.push_back(BatchItem{ds[scored[r].second].comment, Provenance::Similarity, scored[r].first});
    }
    return batch;
}

AnnotationBatch sample_random(const corpus::LabeledDataset& ds, std::size_t n, std::uint64_t seed,
                              std::string batch_id) {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "random-sample"));
    const std::size_t take = std::min(n, order.size());
    for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(order.size() - i));
        std::swap(order[i], order[j]);
    }
    AnnotationBatch batch{std::move(batch_id), {}};
    for (std::size_t i = 0; i < take; ++i) batch.items.push_back(BatchItem{ds[order[i]].comment, Provenance::Random, {}});
    return batch;
}

AnnotationBatch merge_batches(const std::vector<AnnotationBatch>& batches, std::string batch_id) {
    AnnotationBatch out{std::move(batch_id), {}};
    std::unordered_map<std::string, std::size_t> position;
    for (const auto& b : batches) {
        for (const auto& item : b.items) {
            const auto [it, inserted] = position.emplace(item.comment.id, out.items.size());
            if (inserted) {
                out.items.push_back(item);
            } else if (item.provenance == Provenance::Pattern && out.items[it->second].provenance != Provenance::Pattern) {
                out.items[it->second] = item;
            }
        }
    }
    return out;
}

void write_batch_csv(const AnnotationBatch& batch, std::ostream& out) {
    std::vector<std::string> names;
    for (auto l : corpus::kAllLabels) names.emplace_back(corpus::label_name(l));
    out << "# labels: " << join(names, ";") << " (several labels separated by ';')\n";
    for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& item : batch.items) {
        out << csv_escape(batch.batch_id) << ',' << csv_escape(item.comment.id) << ',' << csv_escape(item.comment.title)
            << ',' << csv_escape(item.comment.text) << ',' << provenance_name(item.provenance) << ','
            << (item.score ? format_real(*item.score) : "") << ",\n";
    }
}

std::vector<CodedComment> read_batch_csv(std::string_view text, const std::string& source) {
    while (!text.empty() && text.front() == '#') {
        const auto nl = text.find('\n');
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    }
    const auto rows = parse_csv(text);
    if (rows.empty()) throw DataError(source + ": missing CSV header");
    const auto& header = rows.front();
    auto column = [&](std::string_view name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError(source + ": missing column '" + std::string(name) + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto id_col = column("comment_id");
    const auto label_col = column("label");
    std::vector<CodedComment> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = source + " record " + std::to_string(r);
        if (row.size() != header.size()) throw DataError(where + ": expected " + std::to_string(header.size()) + " fields");
        const auto label_text = trim(row[label_col]);
        if (label_text.empty()) continue;
        CodedComment c{row[id_col], {}};
        for (auto part : split(label_text, ';')) {
            part = trim(part);
            const auto l = corpus::parse_label(part);
            if (!l) throw DataError(where + ": unknown label '" + std::string(part) + "'");
            c.labels.insert(*l);
        }
        if (auto v = c.labels.violation(); !v.empty()) throw DataError(where + ": " + v);
        out.push_back(std::move(c));
    }
    return out;
}

MergePolicy parse_merge_policy(std::string_view name) {
    if (name == "majority") return MergePolicy::Majority;
    if (name == "strict") return MergePolicy::Strict;
    throw InvalidArgument("unknown merge policy '" + std::string(name) + "' (expected majority or strict)");
}

MergeResult merge_annotations(const corpus::LabeledDataset& ds, const std::vector<CodedComment>& coded,
                              MergePolicy policy) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<corpus::LabelSet>> votes;
    for (const auto& c : coded) {
        if (!ds.find(c.id)) throw DataError("annotation for unknown comment id '" + c.id + "'");
        auto& v = votes[c.id];
        if (v.empty()) order.push_back(c.id);
        v.push_back(c.labels);
    }
    MergeResult result;
    std::vector<std::pair<std::size_t, corpus::LabelSet>> updates;
    for (const auto& id : order) {
        const auto& v = votes[id];
        std::optional<corpus::LabelSet> decided;
        if (policy == MergePolicy::Strict) {
            if (std::all_of(v.begin(), v.end(), [&](const auto& s) { return s == v.front(); })) decided = v.front();
        } else {
            for (const auto& candidate : v) {
                if (std::count(v.begin(), v.end(), candidate) >= 2) {
                    decided = candidate;
                    break;
                }
            }
        }
        if (decided) {
            updates.emplace_back(*ds.find(id), *decided);
            result.merged.push_back(id);
        } else {
            result.flagged.push_back(id);
        }
    }
    result.dataset = ds.with_labels(updates);
    return result;
}

}  // namespace metacomment::sampling
