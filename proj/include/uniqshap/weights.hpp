#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace uniqshap {

/// Shapley weight for a coalition of size r among d players. The weight is
/// the exact unit fraction 1/denominator; `value` is its double rounding.
struct SubsetWeight {
    std::size_t d = 0;
    std::size_t r = 0;
    std::uint64_t denominator = 1;
    double value = 0.0;
};

/// Binomial coefficient C(n, k). Throws std::overflow_error past 64 bits.
std::uint64_t binomial(std::size_t n, std::size_t k);

/// Plain weights 1 / (d * C(d-1, r)) for r = 0..d-1.
std::vector<SubsetWeight> shapley_weights(std::size_t d);

/// Weights 1 / ((d+1) * C(d, r)), r = 0..d-1, that account for a posited
/// perfectly identifying key variable without materializing it.
std::vector<SubsetWeight> keyed_weights(std::size_t d);

}  // namespace uniqshap
