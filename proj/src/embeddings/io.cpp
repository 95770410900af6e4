#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metacomment/embeddings.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/numeric_io.hpp"
#include "metacomment/util/strings.hpp"

namespace metacomment::embeddings {

using json = nlohmann::ordered_json;

void write_vectors(std::ostream& out, const std::vector<std::string>& keys, const DenseMatrix& m) {
    out << keys.size() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < keys.size(); ++r) {
        if (keys[r].empty() || keys[r].find_first_of(" \t\n\r") != std::string::npos) {
            throw InvalidArgument("vector key must be non-empty and free of whitespace: '" + keys[r] + "'");
        }
        out << keys[r];
        for (double v : m.row(r)) out << ' ' << format_real(v);
        out << '\n';
    }
}

std::pair<std::vector<std::string>, DenseMatrix> read_vectors(std::istream& in, const std::string& what) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(what + ": missing header line");
    const auto header = split(trim(line), ' ');
    if (header.size() != 2) throw DataError(what + ": header must be 'V D'");
    const auto rows = static_cast<std::size_t>(parse_integer(header[0], "vector count"));
    const auto cols = static_cast<std::size_t>(parse_integer(header[1], "dimension"));
    std::vector<std::string> keys;
    keys.reserve(rows);
    DenseMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) throw DataError(what + ": expected " + std::to_string(rows) + " rows");
        const auto fields = split(trim(line), ' ');
        if (fields.size() != cols + 1) {
            throw DataError(what + ": line " + std::to_string(r + 2) + " has " + std::to_string(fields.size() - 1) +
                            " components, expected " + std::to_string(cols));
        }
        keys.emplace_back(fields[0]);
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = parse_real(fields[c + 1], what);
    }
    return {std::move(keys), std::move(m)};
}

namespace {

json params_json(const WordEmbeddingParams& p) {
    json j;
    j["dim"] = p.dim;
    j["window"] = p.window;
    j["min_count"] = p.min_count;
    j["epochs"] = p.epochs;
    j["method"] = std::string(method_name(p.method));
    j["negative_samples"] = p.negative_samples;
    j["seed"] = p.seed;
    j["start_learning_rate"] = p.start_learning_rate;
    j["end_learning_rate"] = p.end_learning_rate;
    j["workers"] = p.workers;
    return j;
}

WordEmbeddingParams params_from_json(const json& j) {
    WordEmbeddingParams p;
    p.dim = j.value("dim", p.dim);
    p.window = j.value("window", p.window);
    p.min_count = j.value("min_count", p.min_count);
    p.epochs = j.value("epochs", p.epochs);
    p.method = parse_method(j.value("method", std::string("cbow")));
    p.negative_samples = j.value("negative_samples", p.negative_samples);
    p.seed = j.value("seed", p.seed);
    p.start_learning_rate = j.value("start_learning_rate", p.start_learning_rate);
    p.end_learning_rate = j.value("end_learning_rate", p.end_learning_rate);
    p.workers = j.value("workers", p.workers);
    return p;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    return out;
}

}  // namespace

void save_word_model(const WordEmbeddingModel& m, const std::string& prefix) {
    {
        auto out = open_out(prefix + ".vec");
        write_vectors(out, m.vocab(), m.input());
    }
    if (m.has_output()) {
        auto out = open_out(prefix + ".out.vec");
        write_vectors(out, m.vocab(), m.output());
    }
    json meta;
    meta["format"] = "metacomment-word-model";
    meta["version"] = 1;
    meta["params"] = params_json(m.params());
    meta["counts"] = m.counts();
    meta["epoch_loss"] = m.epoch_loss;
    auto out = open_out(prefix + ".meta.json");
    out << meta.dump(2) << '\n';
}

WordEmbeddingModel load_word_model(const std::string& prefix) {
    std::ifstream vin(prefix + ".vec");
    if (!vin) throw DataError("cannot open " + prefix + ".vec");
    auto [vocab, input] = read_vectors(vin, prefix + ".vec");

    DenseMatrix output;
    if (std::ifstream oin(prefix + ".out.vec"); oin) {
        auto [okeys, omat] = read_vectors(oin, prefix + ".out.vec");
        if (okeys != vocab) throw DataError(prefix + ".out.vec: vocabulary differs from " + prefix + ".vec");
        output = std::move(omat);
    }
    WordEmbeddingParams params;
    std::vector<std::uint64_t> counts;
    std::vector<double> losses;
    if (std::ifstream min(prefix + ".meta.json"); min) {
        json meta;
        try {
            meta = json::parse(min);
            params = params_from_json(meta.at("params"));
            counts = meta.at("counts").get<std::vector<std::uint64_t>>();
            losses = meta.value("epoch_loss", std::vector<double>{});
        } catch (const json::exception& e) {
            throw DataError(prefix + ".meta.json: " + e.what());
        }
    }
    params.dim = static_cast<int>(input.cols());
    WordEmbeddingModel model(params, std::move(vocab), std::move(counts), std::move(input), std::move(output));
    model.epoch_loss = std::move(losses);
    return model;
}

void save_doc_model(const DocEmbeddingModel& m, const std::string& prefix) {
    save_word_model(m.words(), prefix);
    {
        auto out = open_out(prefix + ".docs.vec");
        write_vectors(out, m.doc_ids(), m.doc_vectors());
    }
    json meta;
    meta["format"] = "metacomment-doc-model";
    meta["version"] = 1;
    meta["inference"] = {{"steps", m.inference().steps},
                         {"learning_rate", m.inference().learning_rate},
                         {"end_learning_rate", m.inference().end_learning_rate},
                         {"seed", m.inference().seed}};
    json flagged = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.flagged(i)) flagged.push_back(m.doc_ids()[i]);
    }
    meta["flagged"] = flagged;
    auto out = open_out(prefix + ".docs.meta.json");
    out << meta.dump(2) << '\n';
}

DocEmbeddingModel load_doc_model(const std::string& prefix) {
    auto words = load_word_model(prefix);
    std::ifstream din(prefix + ".docs.vec");
    if (!din) throw DataError("cannot open " + prefix + ".docs.vec");
    auto [ids, docs] = read_vectors(din, prefix + ".docs.vec");
    InferenceParams inference;
    std::vector<bool> flagged(ids.size(), false);
    std::ifstream min(prefix + ".docs.meta.json");
    if (!min) throw DataError("cannot open " + prefix + ".docs.meta.json");
    try {
        const json meta = json::parse(min);
        const auto& inf = meta.at("inference");
        inference.steps = inf.at("steps").get<int>();
        inference.learning_rate = inf.at("learning_rate").get<double>();
        inference.end_learning_rate = inf.at("end_learning_rate").get<double>();
        inference.seed = inf.at("seed").get<std::uint64_t>();
        std::unordered_map<std::string, std::size_t> pos;
        for (std::size_t i = 0; i < ids.size(); ++i) pos.emplace(ids[i], i);
        for (const auto& id : meta.at("flagged")) {
            const auto it = pos.find(id.get<std::string>());
            if (it == pos.end()) throw DataError(prefix + ".docs.meta.json: flagged id not in vector file");
            flagged[it->second] = true;
        }
    } catch (const json::exception& e) {
        throw DataError(prefix + ".docs.meta.json: " + e.what());
    }
    return DocEmbeddingModel(std::move(words), inference, std::move(ids), std::move(docs), std::move(flagged));
}

}  // namespace metacomment::embeddings
