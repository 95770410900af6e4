#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "metacomment/util/matrix.hpp"

namespace metacomment::features {

// Frozen, ordered list of feature names. The version is a hash of the names.
class FeatureRegistry {
public:
    FeatureRegistry() = default;
    explicit FeatureRegistry(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(std::size_t column) const { return names_[column]; }
    std::optional<std::size_t> find(std::string_view name) const;
    const std::string& version() const { return version_; }

    friend bool operator==(const FeatureRegistry& a, const FeatureRegistry& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
    std::string version_;
};

// Sparse feature values keyed by registry column; zeros are omitted.
struct FeatureVector {
    std::vector<std::pair<std::size_t, double>> entries;
    std::string registry_version;

    double value(std::size_t column) const;
    std::map<std::string, double> named(const FeatureRegistry& registry) const;
};

struct FeatureMatrix {
    std::shared_ptr<const FeatureRegistry> registry;
    std::vector<FeatureVector> rows;

    Matrix to_dense() const;
};

// Sparse triplets "row col value" plus a sidecar with one feature name per line.
void write_triplets(const FeatureMatrix& m, const std::string& matrix_path, const std::string& names_path);

// Builds a vector, dropping zeros and rejecting non-finite values.
class FeatureVectorBuilder {
public:
    explicit FeatureVectorBuilder(const FeatureRegistry& registry) : registry_(registry) {}
    void set(std::size_t column, double value);
    FeatureVector finish();

private:
    const FeatureRegistry& registry_;
    std::vector<std::pair<std::size_t, double>> entries_;
};

}  // namespace metacomment::features
