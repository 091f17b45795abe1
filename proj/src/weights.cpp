#include "uniqshap/weights.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace uniqshap {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw std::overflow_error("weight denominator overflows 64 bits");
    }
    return out;
}

}  // namespace

std::uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    // Multiplicative form; each partial product is itself a binomial coefficient,
    // so the division is exact.
    unsigned __int128 acc = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > UINT64_MAX) {
            throw std::overflow_error("C(" + std::to_string(n) + "," + std::to_string(k) +
                                      ") overflows 64 bits");
        }
    }
    return static_cast<std::uint64_t>(acc);
}

std::vector<SubsetWeight> shapley_weights(std::size_t d) {
    std::vector<SubsetWeight> out;
    out.reserve(d);
    for (std::size_t r = 0; r < d; ++r) {
        const std::uint64_t den = checked_mul(d, binomial(d - 1, r));
        out.push_back({d, r, den, 1.0 / static_cast<double>(den)});
    }
    return out;
}

std::vector<SubsetWeight> keyed_weights(std::size_t d) {
    std::vector<SubsetWeight> out;
    out.reserve(d);
    for (std::size_t r = 0; r < d; ++r) {
        const std::uint64_t den = checked_mul(d + 1, binomial(d, r));
        out.push_back({d, r, den, 1.0 / static_cast<double>(den)});
    }
    return out;
}

}  // namespace uniqshap
