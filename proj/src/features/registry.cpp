#include "metacomment/features/registry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "metacomment/util/error.hpp"
#include "metacomment/util/hash.hpp"
#include "metacomment/util/numeric_io.hpp"

namespace metacomment::features {

FeatureRegistry::FeatureRegistry(std::vector<std::string> names) : names_(std::move(names)) {
    std::uint64_t h = kFnvOffset;
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (!index_.emplace(names_[i], i).second) throw InvalidArgument("duplicate feature name '" + names_[i] + "'");
        h = fnv1a64(names_[i], h);
        h = fnv1a64(std::string_view("\n"), h);
    }
    version_ = to_hex(h);
}

std::optional<std::size_t> FeatureRegistry::find(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

double FeatureVector::value(std::size_t column) const {
    const auto it = std::lower_bound(entries.begin(), entries.end(), column,
                                     [](const auto& e, std::size_t c) { return e.first < c; });
    return it != entries.end() && it->first == column ? it->second : 0.0;
}

std::map<std::string, double> FeatureVector::named(const FeatureRegistry& registry) const {
    if (registry.version() != registry_version) throw StateError("feature vector belongs to another registry");
    std::map<std::string, double> out;
    for (const auto& [col, v] : entries) out[registry.name(col)] = v;
    return out;
}

Matrix FeatureMatrix::to_dense() const {
    if (!registry) throw StateError("feature matrix without registry");
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(registry->size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].registry_version != registry->version()) throw StateError("feature row from another registry");
        for (const auto& [c, v] : rows[r].entries) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
    return x;
}

void write_triplets(const FeatureMatrix& m, const std::string& matrix_path, const std::string& names_path) {
    std::ofstream out(matrix_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + matrix_path);
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        for (const auto& [c, v] : m.rows[r].entries) out << r << ' ' << c << ' ' << format_real(v) << '\n';
    }
    std::ofstream names(names_path, std::ios::binary);
    if (!names) throw DataError("cannot write " + names_path);
    for (const auto& n : m.registry->names()) names << n << '\n';
}

void FeatureVectorBuilder::set(std::size_t column, double value) {
    if (column >= registry_.size()) throw InvalidArgument("feature column out of range");
    if (!std::isfinite(value)) throw InvalidArgument("non-finite value for feature " + registry_.name(column));
    if (value != 0.0) entries_.emplace_back(column, value);
}

FeatureVector FeatureVectorBuilder::finish() {
    std::sort(entries_.begin(), entries_.end());
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].first == entries_[i - 1].first) {
            throw InvalidArgument("feature " + registry_.name(entries_[i].first) + " set twice");
        }
    }
    return FeatureVector{std::move(entries_), registry_.version()};
}

}  // namespace metacomment::features
