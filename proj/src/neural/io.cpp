#include <fstream>

#include <json.hpp>

#include "metacomment/neural.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/hash.hpp"
#include "metacomment/util/strings.hpp"

namespace metacomment::neural {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormat = "metacomment-cnn";
constexpr int kFormatVersion = 1;

json matrix_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (j.at("rows").get<Eigen::Index>() != rows || j.at("cols").get<Eigen::Index>() != cols) {
        throw DataError(std::string("CNN file: ") + what + " has the wrong shape");
    }
    const auto values = j.at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
        throw DataError(std::string("CNN file: ") + what + " has the wrong size");
    }
    Matrix m(rows, cols);
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

Vector vector_from(const json& j, Eigen::Index size, const char* what) {
    const auto values = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != size) {
        throw DataError(std::string("CNN file: ") + what + " has the wrong size");
    }
    return Eigen::Map<const Vector>(values.data(), size);
}

}  // namespace

void save_cnn(const CnnModel& model, const std::string& path) {
    const auto& c = model.config();
    const auto& p = model.parameters();
    json j;
    j["format"] = kFormat;
    j["version"] = kFormatVersion;
    j["config"] = {{"max_len", c.max_len},       {"n_filters", c.n_filters}, {"kernel_size", c.kernel_size},
                   {"dense_units", c.dense_units}, {"batch_size", c.batch_size}, {"epochs", c.epochs},
                   {"learning_rate", c.learning_rate}, {"seed", c.seed}};
    j["embedding"] = {{"rows", model.embedding().rows()},
                      {"dim", model.embedding().cols()},
                      {"hash", to_hex(model.embedding_hash())}};
    json conv = json::array();
    for (const auto& w : p.conv) conv.push_back(matrix_json(w));
    j["conv"] = conv;
    j["conv_bias"] = std::vector<double>(p.conv_bias.data(), p.conv_bias.data() + p.conv_bias.size());
    j["dense"] = matrix_json(p.dense);
    j["dense_bias"] = std::vector<double>(p.dense_bias.data(), p.dense_bias.data() + p.dense_bias.size());
    j["output"] = matrix_json(p.output);
    j["output_bias"] = std::vector<double>(p.output_bias.data(), p.output_bias.data() + p.output_bias.size());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump() << '\n';
    if (!out) throw DataError("write failed: " + path);
}

CnnModel load_cnn(const std::string& path, const embeddings::WordEmbeddingModel& m) {
    try {
        const json j = json::parse(read_file(path));
        if (j.at("format") != kFormat) throw DataError(path + " is not a CNN model file");
        if (j.at("version") != kFormatVersion) throw DataError(path + ": unsupported CNN format version");
        const auto& jc = j.at("config");
        CnnConfig cfg;
        cfg.max_len = jc.at("max_len").get<int>();
        cfg.n_filters = jc.at("n_filters").get<int>();
        cfg.kernel_size = jc.at("kernel_size").get<int>();
        cfg.dense_units = jc.at("dense_units").get<int>();
        cfg.batch_size = jc.at("batch_size").get<int>();
        cfg.epochs = jc.at("epochs").get<int>();
        cfg.learning_rate = jc.at("learning_rate").get<double>();
        cfg.seed = jc.at("seed").get<std::uint64_t>();

        CnnModel model = CnnModel::build(m, cfg);
        if (to_hex(model.embedding_hash()) != j.at("embedding").at("hash").get<std::string>()) {
            throw DataError(path + ": the word embedding model differs from the one the CNN was trained with");
        }
        const auto d = static_cast<Eigen::Index>(m.dim());
        auto& p = model.params_;
        const auto& conv = j.at("conv");
        if (conv.size() != static_cast<std::size_t>(cfg.kernel_size)) throw DataError("CNN file: wrong kernel size");
        for (std::size_t o = 0; o < conv.size(); ++o) p.conv[o] = matrix_from(conv[o], d, cfg.n_filters, "conv");
        p.conv_bias = vector_from(j.at("conv_bias"), cfg.n_filters, "conv_bias");
        p.dense = matrix_from(j.at("dense"), cfg.n_filters, cfg.dense_units, "dense");
        p.dense_bias = vector_from(j.at("dense_bias"), cfg.dense_units, "dense_bias");
        p.output = matrix_from(j.at("output"), cfg.dense_units, 2, "output");
        p.output_bias = vector_from(j.at("output_bias"), 2, "output_bias");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed CNN file: " + e.what());
    }
}

}  // namespace metacomment::neural
