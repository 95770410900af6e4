#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metacomment/classifiers.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/strings.hpp"

namespace metacomment::classifiers {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormat = "metacomment-model";
constexpr int kFormatVersion = 1;

json tree_to_json(const Tree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
    return nodes;
}

Tree tree_from_json(const json& j) {
    Tree t;
    for (const auto& n : j) {
        t.nodes.push_back(TreeNode{n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                                   n.at(4).get<double>()});
    }
    const int size = static_cast<int>(t.nodes.size());
    if (size == 0) throw DataError("model: empty tree");
    for (const auto& n : t.nodes) {
        if (n.feature >= 0 && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
            throw DataError("model: tree node points outside the tree");
        }
    }
    return t;
}

json body_to_json(const ModelBody& body) {
    return std::visit(
        [](const auto& b) -> json {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                return {{"w", b.w}, {"b", b.b}, {"iterations", b.iterations}, {"converged", b.converged}};
            } else if constexpr (std::is_same_v<T, Tree>) {
                return {{"nodes", tree_to_json(b)}};
            } else if constexpr (std::is_same_v<T, Forest>) {
                json trees = json::array();
                for (const auto& t : b.trees) trees.push_back(tree_to_json(t));
                return {{"trees", trees}};
            } else if constexpr (std::is_same_v<T, Boost>) {
                json stumps = json::array();
                for (const auto& t : b.stumps) stumps.push_back(tree_to_json(t));
                return {{"stumps", stumps}, {"alphas", b.alphas}};
            } else {
                json points = json::array();
                for (Eigen::Index r = 0; r < b.points.rows(); ++r) {
                    points.push_back(std::vector<double>(b.points.row(r).data(), b.points.row(r).data() + b.points.cols()));
                }
                return {{"k", b.k}, {"labels", b.labels}, {"points", points}};
            }
        },
        body);
}

ModelBody body_from_json(Kind kind, const json& j) {
    switch (kind) {
        case Kind::LinearSvm: {
            LinearModel m;
            m.w = j.at("w").get<std::vector<double>>();
            m.b = j.at("b").get<double>();
            m.iterations = j.at("iterations").get<std::size_t>();
            m.converged = j.at("converged").get<bool>();
            return m;
        }
        case Kind::DecisionTree: return tree_from_json(j.at("nodes"));
        case Kind::RandomForest: {
            Forest f;
            for (const auto& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
            if (f.trees.empty()) throw DataError("model: forest without trees");
            return f;
        }
        case Kind::AdaBoost: {
            Boost b;
            for (const auto& t : j.at("stumps")) b.stumps.push_back(tree_from_json(t));
            b.alphas = j.at("alphas").get<std::vector<double>>();
            if (b.stumps.empty() || b.alphas.size() != b.stumps.size()) throw DataError("model: malformed ensemble");
            return b;
        }
        case Kind::Knn: {
            KnnModel m;
            m.k = j.at("k").get<int>();
            m.labels = j.at("labels").get<std::vector<int>>();
            const auto& pts = j.at("points");
            const auto cols = pts.empty() ? 0 : pts.front().size();
            m.points.resize(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(cols));
            for (std::size_t r = 0; r < pts.size(); ++r) {
                const auto row = pts[r].get<std::vector<double>>();
                if (row.size() != cols) throw DataError("model: ragged k-NN points");
                for (std::size_t c = 0; c < cols; ++c) m.points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
            }
            if (m.labels.size() != pts.size()) throw DataError("model: k-NN labels do not match points");
            return m;
        }
    }
    throw DataError("model: unknown kind");
}

}  // namespace

std::string serialize_model(const TrainedModel& m) {
    json j;
    j["format"] = kFormat;
    j["version"] = kFormatVersion;
    j["kind"] = std::string(kind_name(m.kind()));
    json params = json::object();
    for (const auto& [k, v] : to_param_map(m.params())) params[k] = v;
    j["params"] = params;
    j["seed"] = seed_of(m.params());
    j["registry"] = m.registry_version();
    j["n_features"] = m.n_features();
    j["columns"] = m.columns();
    if (m.standardizer()) {
        j["standardizer"] = {{"mean", m.standardizer()->mean}, {"scale", m.standardizer()->scale}};
    } else {
        j["standardizer"] = nullptr;
    }
    if (m.calibration()) {
        j["calibration"] = {{"a", m.calibration()->a}, {"b", m.calibration()->b}};
    } else {
        j["calibration"] = nullptr;
    }
    j["body"] = body_to_json(m.body());
    return j.dump() + "\n";
}

TrainedModel deserialize_model(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.at("format") != kFormat) throw DataError("not a model file");
        if (j.at("version") != kFormatVersion) {
            throw DataError("unsupported model format version " + j.at("version").dump());
        }
        const Kind kind = parse_kind(j.at("kind").get<std::string>());
        ParamMap pm;
        for (const auto& [k, v] : j.at("params").items()) pm[k] = v.get<double>();
        const Hyperparams params = with_seed(make_hyperparams(kind, pm), j.at("seed").get<std::uint64_t>());
        std::optional<Standardizer> st;
        if (!j.at("standardizer").is_null()) {
            st = Standardizer{j["standardizer"].at("mean").get<std::vector<double>>(),
                              j["standardizer"].at("scale").get<std::vector<double>>()};
        }
        TrainedModel m(params, j.at("registry").get<std::string>(), j.at("n_features").get<std::size_t>(),
                       j.at("columns").get<std::vector<std::size_t>>(), std::move(st), body_from_json(kind, j.at("body")));
        if (!j.at("calibration").is_null()) {
            m.set_calibration(Calibration{j["calibration"].at("a").get<double>(), j["calibration"].at("b").get<double>()});
        }
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const TrainedModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << serialize_model(m);
    if (!out) throw DataError("write failed: " + path);
}

TrainedModel load_model(const std::string& path) { return deserialize_model(read_file(path)); }

bool operator==(const TrainedModel& a, const TrainedModel& b) { return serialize_model(a) == serialize_model(b); }

}  // namespace metacomment::classifiers
