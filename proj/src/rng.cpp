#include "imcrawler/rng.hpp"

#include <cmath>
#include <numeric>

namespace imcrawler {

std::uint64_t Rng::below(std::uint64_t bound)
{
    // Rejection sampling keeps the result unbiased.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi)
{
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(span == 0 ? engine_() : below(span));
}

bool Rng::bernoulli(double p)
{
    constexpr std::uint64_t scale = 1'000'000'000;
    if (p <= 0.0)
        return false;
    if (p >= 1.0)
        return true;
    return chance(static_cast<std::uint64_t>(std::llround(p * scale)), scale);
}

std::size_t Rng::weighted(const std::vector<std::uint64_t>& weights)
{
    std::uint64_t total = std::accumulate(weights.begin(), weights.end(), std::uint64_t{0});
    std::uint64_t r = below(total);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (r < weights[i])
            return i;
        r -= weights[i];
    }
    return weights.size() - 1;
}

} // namespace imcrawler
