#include <algorithm>
#include <atomic>
#include <thread>
#include <unordered_map>

#include "metacomment/embeddings.hpp"
#include "metacomment/util/error.hpp"
#include "metacomment/util/random.hpp"
#include "ns_core.hpp"

namespace metacomment::embeddings {

namespace {

struct Vocabulary {
    std::vector<std::string> tokens;
    std::vector<std::uint64_t> counts;
    std::unordered_map<std::string, std::size_t> index;
};

Vocabulary build_vocabulary(const std::vector<textprep::TokenStream>& corpus, int min_count) {
    std::unordered_map<std::string, std::uint64_t> freq;
    for (const auto& ts : corpus) {
        for (const auto& t : ts.tokens) ++freq[t];
    }
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (auto& [tok, n] : freq) {
        if (n >= static_cast<std::uint64_t>(min_count)) kept.emplace_back(tok, n);
    }
    if (kept.empty()) {
        throw InvalidArgument("empty vocabulary: no token occurs at least min_count=" + std::to_string(min_count) +
                              " times");
    }
    std::sort(kept.begin(), kept.end(),
              [](const auto& a, const auto& b) { return a.second > b.second || (a.second == b.second && a.first < b.first); });
    Vocabulary v;
    for (auto& [tok, n] : kept) {
        v.index.emplace(tok, v.tokens.size());
        v.tokens.push_back(tok);
        v.counts.push_back(n);
    }
    return v;
}

struct EncodedCorpus {
    std::vector<std::vector<std::uint32_t>> sentences;
    std::size_t total = 0;
};

EncodedCorpus encode(const std::vector<textprep::TokenStream>& corpus, const Vocabulary& v) {
    EncodedCorpus enc;
    enc.sentences.reserve(corpus.size());
    for (const auto& ts : corpus) {
        std::vector<std::uint32_t> s;
        for (const auto& t : ts.tokens) {
            if (auto it = v.index.find(t); it != v.index.end()) s.push_back(static_cast<std::uint32_t>(it->second));
        }
        enc.total += s.size();
        enc.sentences.push_back(std::move(s));
    }
    return enc;
}

void init_uniform(DenseMatrix& m, Rng& rng) {
    const double dim = static_cast<double>(m.cols());
    for (double& x : m.data()) x = (rng.uniform() - 0.5) / dim;
}

struct TrainState {
    const WordEmbeddingParams& params;
    DenseMatrix& input;
    DenseMatrix& output;
    DenseMatrix* docs;
    std::vector<double> noise;
    std::atomic<std::size_t> processed{0};
    std::size_t total_positions = 1;

    double learning_rate(std::size_t done) const {
        const double progress = std::min(1.0, static_cast<double>(done) / static_cast<double>(total_positions));
        return params.start_learning_rate - (params.start_learning_rate - params.end_learning_rate) * progress;
    }
};

template <bool Shared>
double train_sentences(TrainState& st, const EncodedCorpus& enc, std::size_t begin, std::size_t end, Rng& rng,
                       std::size_t& predictions) {
    using A = detail::Access<Shared>;
    const std::size_t dim = st.input.cols();
    const int window = st.params.window;
    std::vector<double> hidden(dim), grad(dim);
    std::vector<std::uint32_t> ctx;
    double loss = 0.0;
    for (std::size_t s = begin; s < end; ++s) {
        const auto& sent = enc.sentences[s];
        const std::size_t n = sent.size();
        double* doc = st.docs ? st.docs->row(s).data() : nullptr;
        for (std::size_t pos = 0; pos < n; ++pos) {
            const double lr = st.learning_rate(st.processed.fetch_add(1, std::memory_order_relaxed));
            const auto reach = static_cast<std::size_t>(window - static_cast<int>(rng.below(static_cast<std::uint64_t>(window))));
            const std::size_t lo = pos >= reach ? pos - reach : 0;
            const std::size_t hi = std::min(n, pos + reach + 1);
            ctx.clear();
            for (std::size_t j = lo; j < hi; ++j) {
                if (j != pos) ctx.push_back(sent[j]);
            }
            if (st.params.method == Method::CBOW) {
                const std::size_t count = ctx.size() + (doc ? 1 : 0);
                if (count == 0) continue;
                std::fill(hidden.begin(), hidden.end(), 0.0);
                for (auto c : ctx) {
                    const auto row = st.input.row(c);
                    for (std::size_t k = 0; k < dim; ++k) hidden[k] += A::load(row[k]);
                }
                if (doc) {
                    for (std::size_t k = 0; k < dim; ++k) hidden[k] += A::load(doc[k]);
                }
                const double inv = 1.0 / static_cast<double>(count);
                for (double& h : hidden) h *= inv;
                std::fill(grad.begin(), grad.end(), 0.0);
                loss += detail::ns_predict<Shared>(hidden, st.output, &st.output, sent[pos], st.noise,
                                                   st.params.negative_samples, rng, lr, grad);
                ++predictions;
                const double step = -lr * inv;
                for (auto c : ctx) {
                    auto row = st.input.row(c);
                    for (std::size_t k = 0; k < dim; ++k) A::add(row[k], step * grad[k]);
                }
                if (doc) {
                    for (std::size_t k = 0; k < dim; ++k) A::add(doc[k], step * grad[k]);
                }
            } else {
                auto center = st.input.row(sent[pos]);
                for (auto c : ctx) {
                    for (std::size_t k = 0; k < dim; ++k) hidden[k] = A::load(center[k]);
                    std::fill(grad.begin(), grad.end(), 0.0);
                    loss += detail::ns_predict<Shared>(hidden, st.output, &st.output, c, st.noise,
                                                       st.params.negative_samples, rng, lr, grad);
                    ++predictions;
                    for (std::size_t k = 0; k < dim; ++k) A::add(center[k], -lr * grad[k]);
                }
            }
        }
    }
    return loss;
}

std::vector<double> run_epochs(TrainState& st, const EncodedCorpus& enc) {
    const auto& p = st.params;
    std::vector<double> history;
    Rng rng(derive_seed(p.seed, "train"));
    for (int epoch = 0; epoch < p.epochs; ++epoch) {
        double loss = 0.0;
        std::size_t predictions = 0;
        if (p.workers == 1) {
            loss = train_sentences<false>(st, enc, 0, enc.sentences.size(), rng, predictions);
        } else {
            const auto workers = static_cast<std::size_t>(p.workers);
            std::vector<double> losses(workers, 0.0);
            std::vector<std::size_t> counts(workers, 0);
            std::vector<std::thread> pool;
            const std::size_t n = enc.sentences.size();
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    Rng local(derive_seed(p.seed, static_cast<std::uint64_t>(epoch) * workers + w));
                    losses[w] = train_sentences<true>(st, enc, n * w / workers, n * (w + 1) / workers, local, counts[w]);
                });
            }
            for (auto& t : pool) t.join();
            for (std::size_t w = 0; w < workers; ++w) {
                loss += losses[w];
                predictions += counts[w];
            }
        }
        history.push_back(predictions ? loss / static_cast<double>(predictions) : 0.0);
    }
    return history;
}

}  // namespace

WordEmbeddingModel train_word_embeddings(const std::vector<textprep::TokenStream>& corpus,
                                         const WordEmbeddingParams& params) {
    params.validate();
    if (corpus.empty()) throw InvalidArgument("train_word_embeddings: empty corpus");
    const Vocabulary vocab = build_vocabulary(corpus, params.min_count);
    const EncodedCorpus enc = encode(corpus, vocab);
    const auto dim = static_cast<std::size_t>(params.dim);

    DenseMatrix input(vocab.tokens.size(), dim);
    DenseMatrix output(vocab.tokens.size(), dim, 0.0);
    Rng init(derive_seed(params.seed, "init"));
    init_uniform(input, init);

    TrainState st{params, input, output, nullptr, detail::noise_cdf(vocab.counts)};
    st.total_positions = std::max<std::size_t>(1, enc.total * static_cast<std::size_t>(params.epochs));
    auto history = run_epochs(st, enc);

    WordEmbeddingModel model(params, vocab.tokens, vocab.counts, std::move(input), std::move(output));
    model.epoch_loss = std::move(history);
    return model;
}

DocEmbeddingModel train_doc_embeddings(const std::vector<textprep::TokenStream>& corpus,
                                       const DocEmbeddingParams& params) {
    params.word.validate();
    if (params.word.method != Method::CBOW) {
        throw InvalidArgument("train_doc_embeddings: document vectors use the CBOW (distributed memory) objective");
    }
    if (corpus.empty()) throw InvalidArgument("train_doc_embeddings: empty corpus");
    std::vector<std::string> ids;
    {
        std::unordered_map<std::string, std::size_t> seen;
        for (const auto& ts : corpus) {
            if (ts.source_id.empty()) throw InvalidArgument("train_doc_embeddings: token stream without source id");
            if (!seen.emplace(ts.source_id, ids.size()).second) {
                throw InvalidArgument("train_doc_embeddings: duplicate document id '" + ts.source_id + "'");
            }
            ids.push_back(ts.source_id);
        }
    }
    const Vocabulary vocab = build_vocabulary(corpus, params.word.min_count);
    const EncodedCorpus enc = encode(corpus, vocab);
    const auto dim = static_cast<std::size_t>(params.word.dim);

    DenseMatrix input(vocab.tokens.size(), dim);
    DenseMatrix output(vocab.tokens.size(), dim, 0.0);
    DenseMatrix docs(corpus.size(), dim, 0.0);
    std::vector<bool> flagged(corpus.size(), false);
    Rng init(derive_seed(params.word.seed, "init"));
    init_uniform(input, init);
    Rng doc_init(derive_seed(params.word.seed, "doc-init"));
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        if (enc.sentences[d].empty()) {
            flagged[d] = true;
            continue;
        }
        for (double& x : docs.row(d)) x = (doc_init.uniform() - 0.5) / static_cast<double>(dim);
    }

    TrainState st{params.word, input, output, &docs, detail::noise_cdf(vocab.counts)};
    st.total_positions = std::max<std::size_t>(1, enc.total * static_cast<std::size_t>(params.word.epochs));
    auto history = run_epochs(st, enc);

    WordEmbeddingModel words(params.word, vocab.tokens, vocab.counts, std::move(input), std::move(output));
    words.epoch_loss = std::move(history);
    return DocEmbeddingModel(std::move(words), params.inference, std::move(ids), std::move(docs), std::move(flagged));
}

namespace {

double ns_objective(const DenseMatrix& input, const DenseMatrix& output, const NsExample& ex,
                    std::span<const double> doc, NsGradient* grad) {
    const std::size_t dim = input.cols();
    const std::size_t count = ex.context.size() + (doc.empty() ? 0 : 1);
    if (count == 0) throw InvalidArgument("ns_loss: no context");
    if (!doc.empty() && doc.size() != dim) throw InvalidArgument("ns_loss: doc vector dimension");
    std::vector<double> hidden(dim, 0.0);
    for (auto c : ex.context) {
        for (std::size_t k = 0; k < dim; ++k) hidden[k] += input(c, k);
    }
    for (std::size_t k = 0; k < doc.size(); ++k) hidden[k] += doc[k];
    for (double& h : hidden) h /= static_cast<double>(count);

    std::vector<double> grad_hidden(dim, 0.0);
    if (grad) {
        grad->input = DenseMatrix(input.rows(), dim, 0.0);
        grad->output = DenseMatrix(output.rows(), dim, 0.0);
        grad->doc.assign(doc.size(), 0.0);
    }
    double loss = 0.0;
    const auto term = [&](std::size_t row, double label) {
        double f = 0.0;
        for (std::size_t k = 0; k < dim; ++k) f += hidden[k] * output(row, k);
        loss -= label > 0 ? detail::log_sigmoid(f) : detail::log_sigmoid(-f);
        if (!grad) return;
        const double g = detail::sigmoid(f) - label;
        for (std::size_t k = 0; k < dim; ++k) {
            grad_hidden[k] += g * output(row, k);
            grad->output(row, k) += g * hidden[k];
        }
    };
    term(ex.target, 1.0);
    for (auto n : ex.negatives) {
        if (n != ex.target) term(n, 0.0);
    }
    if (grad) {
        for (auto c : ex.context) {
            for (std::size_t k = 0; k < dim; ++k) grad->input(c, k) += grad_hidden[k] / static_cast<double>(count);
        }
        for (std::size_t k = 0; k < doc.size(); ++k) grad->doc[k] = grad_hidden[k] / static_cast<double>(count);
    }
    return loss;
}

}  // namespace

double ns_loss(const DenseMatrix& input, const DenseMatrix& output, const NsExample& ex, std::span<const double> doc) {
    return ns_objective(input, output, ex, doc, nullptr);
}

double ns_loss_and_gradient(const DenseMatrix& input, const DenseMatrix& output, const NsExample& ex, NsGradient& grad,
                            std::span<const double> doc) {
    return ns_objective(input, output, ex, doc, &grad);
}

}  // namespace metacomment::embeddings
