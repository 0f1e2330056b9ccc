#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace imcrawler {

// Platform-stable random source. std::mt19937_64 output is fixed by the
// standard but the std distributions are not, so every draw used for
// fixture generation goes through these integer-only helpers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    // Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi);

    // True with probability numer/denom.
    bool chance(std::uint64_t numer, std::uint64_t denom) { return below(denom) < numer; }

    // True with probability p, quantized to 1e-9.
    bool bernoulli(double p);

    // Index drawn proportionally to integer weights (at least one non-zero).
    std::size_t weighted(const std::vector<std::uint64_t>& weights);

    template <class T>
    const T& pick(const std::vector<T>& items) {
        return items[below(items.size())];
    }

private:
    std::mt19937_64 engine_;
};

} // namespace imcrawler
