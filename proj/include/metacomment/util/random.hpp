#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace metacomment {

// Deterministic random source. The engine is std::mt19937_64 (its output
// sequence is fixed by the standard); the value mappings below are our own
// so results do not depend on the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    // Standard normal via Box-Muller.
    double normal();

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Sub-seed derivation: hash(master seed, purpose) and hash(master seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace metacomment
