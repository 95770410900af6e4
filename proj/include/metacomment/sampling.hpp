#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metacomment/corpus.hpp"
#include "metacomment/embeddings.hpp"
#include "metacomment/features/keywords.hpp"
#include "metacomment/textprep.hpp"

namespace metacomment::sampling {

enum class Provenance { Pattern, Similarity, Random };

std::string_view provenance_name(Provenance p);
Provenance parse_provenance(std::string_view name);

struct BatchItem {
    corpus::Comment comment;
    Provenance provenance = Provenance::Pattern;
    std::optional<double> score;
};

struct AnnotationBatch {
    std::string batch_id;
    std::vector<BatchItem> items;
};

// The first n comments, in dataset order, that match the keyword pattern.
AnnotationBatch sample_by_pattern(const corpus::LabeledDataset& ds, const features::KeywordSet& ks, std::size_t n,
                                  std::string batch_id = "pattern");

// Average of the in-vocabulary keyword vectors, then the n comments whose
// document vectors are most cosine-similar to it (ties in dataset order).
// Throws InvalidArgument when no keyword has a vector.
AnnotationBatch sample_by_similarity(const corpus::LabeledDataset& ds, const features::KeywordSet& ks,
                                     const embeddings::WordEmbeddingModel& m,
                                     const embeddings::DocEmbeddingModel& dm, std::size_t n = 100,
                                     const textprep::StopWords* stopwords = &textprep::StopWords::german(),
                                     std::string batch_id = "similarity");

// n comments drawn without replacement, in draw order.
AnnotationBatch sample_random(const corpus::LabeledDataset& ds, std::size_t n, std::uint64_t seed,
                              std::string batch_id = "random");

// Concatenates batches, dropping repeated ids. A pattern item replaces an
// earlier item with another provenance in place.
AnnotationBatch merge_batches(const std::vector<AnnotationBatch>& batches, std::string batch_id);

// CSV with a "# labels: ..." header line listing the valid label names.
void write_batch_csv(const AnnotationBatch& batch, std::ostream& out);

struct CodedComment {
    std::string id;
    corpus::LabelSet labels;
};

// Reads a returned batch; rows with an empty label column are skipped.
// Labels are separated by ';'.
std::vector<CodedComment> read_batch_csv(std::string_view text, const std::string& source = "batch");

enum class MergePolicy { Majority, Strict };
MergePolicy parse_merge_policy(std::string_view name);  // "majority" or "strict"

struct MergeResult {
    corpus::LabeledDataset dataset;
    std::vector<std::string> merged;   // ids whose labels were set
    std::vector<std::string> flagged;  // ids left unresolved
};

// `coded` holds one entry per (coder, comment). Majority needs two identical
// label sets; strict needs every entry for the id to agree.
MergeResult merge_annotations(const corpus::LabeledDataset& ds, const std::vector<CodedComment>& coded,
                              MergePolicy policy);

}  // namespace metacomment::sampling
