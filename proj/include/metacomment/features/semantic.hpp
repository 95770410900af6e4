#pragma once

#include <array>
#include <span>
#include <vector>

#include "metacomment/corpus.hpp"

namespace metacomment::features {

// Fixed class order; also the argmin tie-break order.
inline constexpr std::array<corpus::Label, 5> kSemanticClasses = {
    corpus::Label::Media, corpus::Label::Journalist, corpus::Label::Moderator, corpus::Label::Meta,
    corpus::Label::NonMeta};

struct ClassVector {
    corpus::Label cls;
    std::vector<double> vector;  // mean of the members' document vectors
    std::size_t members = 0;
};

// One class vector per entry of kSemanticClasses. Throws naming the class
// when it has no member.
std::vector<ClassVector> class_vectors(std::span<const std::vector<double>> doc_vectors,
                                       std::span<const corpus::LabelSet> labels);

struct SemanticDistances {
    std::array<double, 5> distance{};  // cosine distance per class, kSemanticClasses order
    std::size_t nearest = 0;           // index of the minimal distance
};

SemanticDistances semantic_distances(std::span<const double> doc_vector, const std::vector<ClassVector>& cvs);

}  // namespace metacomment::features
