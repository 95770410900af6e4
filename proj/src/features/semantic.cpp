#include "metacomment/features/semantic.hpp"

#include "metacomment/embeddings.hpp"
#include "metacomment/util/error.hpp"

namespace metacomment::features {

std::vector<ClassVector> class_vectors(std::span<const std::vector<double>> doc_vectors,
                                       std::span<const corpus::LabelSet> labels) {
    if (doc_vectors.size() != labels.size()) throw InvalidArgument("class_vectors: one label set per document vector");
    std::vector<ClassVector> out;
    for (corpus::Label cls : kSemanticClasses) {
        ClassVector cv{cls, {}, 0};
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (!labels[i].contains(cls)) continue;
            const auto& v = doc_vectors[i];
            if (cv.vector.empty()) cv.vector.assign(v.size(), 0.0);
            if (v.size() != cv.vector.size()) throw InvalidArgument("class_vectors: dimension mismatch");
            for (std::size_t k = 0; k < v.size(); ++k) cv.vector[k] += v[k];
            ++cv.members;
        }
        if (cv.members == 0) {
            throw InvalidArgument("class_vectors: class " + std::string(corpus::label_name(cls)) + " has no member");
        }
        for (double& x : cv.vector) x /= static_cast<double>(cv.members);
        out.push_back(std::move(cv));
    }
    return out;
}

SemanticDistances semantic_distances(std::span<const double> doc_vector, const std::vector<ClassVector>& cvs) {
    if (cvs.size() != kSemanticClasses.size()) throw InvalidArgument("semantic features need one vector per class");
    SemanticDistances out;
    for (std::size_t i = 0; i < cvs.size(); ++i) {
        out.distance[i] = embeddings::cosine_distance(doc_vector, cvs[i].vector);
        if (out.distance[i] < out.distance[out.nearest]) out.nearest = i;
    }
    return out;
}

}  // namespace metacomment::features
