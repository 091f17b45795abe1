#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace uniqshap {

/// Maximum number of variables a VariableSubset can address.
inline constexpr std::size_t kMaxVariables = 64;

/// A set of variable (column) indices stored as a bit mask. Bit j set means
/// column j is a member.
class VariableSubset {
public:
    constexpr VariableSubset() = default;
    constexpr explicit VariableSubset(std::uint64_t mask) : mask_(mask) {}
    VariableSubset(std::initializer_list<std::size_t> members) {
        for (std::size_t j : members) {
            mask_ |= std::uint64_t{1} << j;
        }
    }

    static constexpr VariableSubset all(std::size_t d) {
        return VariableSubset(d >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << d) - 1);
    }

    constexpr std::uint64_t mask() const { return mask_; }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
    constexpr bool contains(std::size_t j) const { return (mask_ >> j) & 1U; }

    constexpr VariableSubset with(std::size_t j) const {
        return VariableSubset(mask_ | (std::uint64_t{1} << j));
    }
    constexpr VariableSubset without(std::size_t j) const {
        return VariableSubset(mask_ & ~(std::uint64_t{1} << j));
    }
    constexpr bool disjoint(VariableSubset other) const { return (mask_ & other.mask_) == 0; }
    constexpr VariableSubset operator|(VariableSubset other) const {
        return VariableSubset(mask_ | other.mask_);
    }

    /// Member indices in increasing order.
    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        out.reserve(size());
        for (std::uint64_t m = mask_; m != 0; m &= m - 1) {
            out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
        }
        return out;
    }

    friend constexpr bool operator==(VariableSubset, VariableSubset) = default;

private:
    std::uint64_t mask_ = 0;
};

}  // namespace uniqshap
