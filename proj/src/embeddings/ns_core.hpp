#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <span>
#include <vector>

#include "metacomment/util/dense.hpp"
#include "metacomment/util/random.hpp"

namespace metacomment::embeddings::detail {

// log(sigmoid(x)) without overflow.
inline double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Memory access policy. Shared = relaxed atomics for lock-free multi-worker training.
template <bool Shared>
struct Access {
    static double load(const double& x) {
        if constexpr (Shared) {
            return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
        } else {
            return x;
        }
    }
    static void add(double& x, double delta) {
        if constexpr (Shared) {
            std::atomic_ref<double> ref(x);
            ref.store(ref.load(std::memory_order_relaxed) + delta, std::memory_order_relaxed);
        } else {
            x += delta;
        }
    }
};

// Cumulative unigram^0.75 weights; sampled by inverse CDF.
inline std::vector<double> noise_cdf(std::span<const std::uint64_t> counts) {
    std::vector<double> cumulative;
    cumulative.reserve(counts.size());
    double total = 0.0;
    for (auto c : counts) {
        total += std::pow(static_cast<double>(c), 0.75);
        cumulative.push_back(total);
    }
    return cumulative;
}

inline std::size_t sample_noise(std::span<const double> cdf, Rng& rng) {
    const double u = rng.uniform() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

// One negative-sampling prediction of `target` from `hidden`. Adds dLoss/dHidden
// into grad_hidden (using the output rows before their update). When
// `output_mut` is given, output rows take an SGD step with rate lr.
template <bool Shared>
double ns_predict(std::span<const double> hidden, const DenseMatrix& output, DenseMatrix* output_mut,
                  std::size_t target, std::span<const double> noise, int negatives, Rng& rng, double lr,
                  std::span<double> grad_hidden) {
    using A = Access<Shared>;
    const std::size_t dim = hidden.size();
    double loss = 0.0;
    for (int d = 0; d <= negatives; ++d) {
        std::size_t row = target;
        double label = 1.0;
        if (d > 0) {
            row = sample_noise(noise, rng);
            if (row == target) continue;
            label = 0.0;
        }
        const auto o = output.row(row);
        double f = 0.0;
        for (std::size_t k = 0; k < dim; ++k) f += hidden[k] * A::load(o[k]);
        loss -= label > 0 ? log_sigmoid(f) : log_sigmoid(-f);
        const double g = sigmoid(f) - label;
        for (std::size_t k = 0; k < dim; ++k) grad_hidden[k] += g * A::load(o[k]);
        if (output_mut) {
            auto om = output_mut->row(row);
            for (std::size_t k = 0; k < dim; ++k) A::add(om[k], -lr * g * hidden[k]);
        }
    }
    return loss;
}

}  // namespace metacomment::embeddings::detail
