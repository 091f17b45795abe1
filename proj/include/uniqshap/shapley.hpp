#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uniqshap/adtree.hpp"
#include "uniqshap/dataset.hpp"
#include "uniqshap/variable_subset.hpp"

namespace uniqshap {

inline constexpr std::size_t kDefaultExactLimit = 20;

/// Thrown when exact enumeration is requested for more variables than allowed.
class ExactLimitError : public InputError {
public:
    using InputError::InputError;
};

/// Source of cohort cardinalities N_t(u).
class CohortCounter {
public:
    virtual ~CohortCounter() = default;
    virtual std::size_t rows() const = 0;
    virtual std::size_t cols() const = 0;
    virtual std::int64_t cohort_size(std::size_t t, VariableSubset u) const = 0;
};

class TreeCounter final : public CohortCounter {
public:
    explicit TreeCounter(const ADTree& tree) : tree_(tree) {}
    std::size_t rows() const override { return tree_.rows(); }
    std::size_t cols() const override { return tree_.cols(); }
    std::int64_t cohort_size(std::size_t t, VariableSubset u) const override {
        return tree_.cohort_size(t, u);
    }

private:
    const ADTree& tree_;
};

/// Linear scan per query; the reference engine for benchmarks and tests.
class ScanCounter final : public CohortCounter {
public:
    explicit ScanCounter(const CategoricalTable& table) : table_(table) {}
    std::size_t rows() const override { return table_.rows(); }
    std::size_t cols() const override { return table_.cols(); }
    std::int64_t cohort_size(std::size_t t, VariableSubset u) const override {
        return naive_count(table_, t, u);
    }

private:
    const CategoricalTable& table_;
};

enum class ShapleyMode { exact, monte_carlo, keyed };

const char* to_string(ShapleyMode mode);

/// Per-subject uniqueness Shapley values in bits, row-major n x d.
struct ShapleyMatrix {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> values;
    ShapleyMode mode = ShapleyMode::exact;
    std::size_t permutations = 0;  // monte_carlo only
    std::uint64_t seed = 0;        // monte_carlo only
    std::vector<double> std_errors;  // monte_carlo only, same shape as values

    double at(std::size_t t, std::size_t j) const { return values[t * d + j]; }
    std::span<const double> row(std::size_t t) const { return {values.data() + t * d, d}; }
    double row_total(std::size_t t) const;
};

struct ShapleyOptions {
    std::size_t workers = 1;
    std::size_t exact_limit = kDefaultExactLimit;
};

struct MonteCarloEstimate {
    std::vector<double> values;
    std::vector<double> std_errors;
};

std::vector<double> shapley_subject(const ADTree& tree, const CategoricalTable& table, std::size_t t,
                                    std::size_t exact_limit = kDefaultExactLimit);
std::vector<double> shapley_subject(const CohortCounter& counter, std::size_t t,
                                    std::size_t exact_limit = kDefaultExactLimit);

/// Values for a table extended by a hypothetical unique key column. The key
/// column itself is never built.
std::vector<double> shapley_subject_keyed(const ADTree& tree, const CategoricalTable& table, std::size_t t,
                                          std::size_t exact_limit = kDefaultExactLimit);
std::vector<double> shapley_subject_keyed(const CohortCounter& counter, std::size_t t,
                                          std::size_t exact_limit = kDefaultExactLimit);

/// Permutation-sampling estimate. Reproducible for a given (seed, t).
MonteCarloEstimate shapley_subject_mc(const ADTree& tree, const CategoricalTable& table, std::size_t t,
                                      std::size_t permutations, std::uint64_t seed);
MonteCarloEstimate shapley_subject_mc(const CohortCounter& counter, std::size_t t,
                                      std::size_t permutations, std::uint64_t seed);

ShapleyMatrix shapley_all(const ADTree& tree, const CategoricalTable& table,
                          const ShapleyOptions& options = {});
ShapleyMatrix shapley_all(const CohortCounter& counter, const ShapleyOptions& options = {});
ShapleyMatrix shapley_all_keyed(const CohortCounter& counter, const ShapleyOptions& options = {});
ShapleyMatrix shapley_all_mc(const CohortCounter& counter, std::size_t permutations, std::uint64_t seed,
                             const ShapleyOptions& options = {});

/// Aggregated values over a subject set with entropy baselines.
struct AggregateReport {
    std::vector<std::size_t> subjects;
    std::vector<std::string> variables;
    std::vector<double> shapley_bits;  // mean over the subjects
    std::vector<double> entropy_bits;  // marginal entropy over all rows
    double population_fraction = 0.0;  // |v| / n
};

/// Mean of matrix rows over v. `table` supplies names and marginal entropies.
AggregateReport aggregate(const ShapleyMatrix& matrix, const CategoricalTable& table, const SubjectSet& v);

/// Column means only.
std::vector<double> aggregate_values(const ShapleyMatrix& matrix, const SubjectSet& v);

}  // namespace uniqshap
