#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "uniqshap/dataset.hpp"
#include "uniqshap/variable_subset.hpp"

namespace uniqshap {

/// Empirical distribution of the value tuples of columns `subset`, kept as
/// exact integer counts. Tuples list codes in increasing column order.
struct EmpiricalDistribution {
    VariableSubset subset;
    std::map<std::vector<Code>, std::int64_t> counts;
    std::int64_t total = 0;

    double probability(const std::vector<Code>& tuple) const;
    std::size_t support_size() const { return counts.size(); }
};

/// Raised when q puts mass on a tuple that p does not support.
class SupportError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

EmpiricalDistribution marginal(const CategoricalTable& table, VariableSubset w);
EmpiricalDistribution marginal(const CategoricalTable& table, VariableSubset w, const SubjectSet& v);

/// Shannon entropy in bits.
double entropy(const EmpiricalDistribution& dist);

/// H(target | given) = H(target u given) - H(given). Sets must be disjoint.
double conditional_entropy(const CategoricalTable& table, VariableSubset target, VariableSubset given);

/// D(q || p) = sum q log2(q / p), in bits.
double relative_entropy(const EmpiricalDistribution& q, const EmpiricalDistribution& p);

/// H(p, q) = -sum q log2 p = H(q) + D(q || p), in bits.
double cross_entropy(const EmpiricalDistribution& p, const EmpiricalDistribution& q);

/// Joint entropy H(u) for every mask u over the table's columns.
std::vector<double> subset_entropies(const CategoricalTable& table);

/// Global uniqueness Shapley value of column j expressed through conditional
/// entropies: (1/d) sum_{u not containing j} C(d-1,|u|)^-1 H(j | u).
double global_shapley_via_entropy(const CategoricalTable& table, std::size_t j,
                                  std::size_t exact_limit = 20);
std::vector<double> global_shapley_via_entropy_all(const CategoricalTable& table, std::size_t exact_limit = 20);

/// Aggregate over subject set v through cross entropies of the full-data
/// marginals p relative to the subset marginals q.
double subset_shapley_via_cross_entropy(const CategoricalTable& table, const SubjectSet& v, std::size_t j,
                                        std::size_t exact_limit = 20);
std::vector<double> subset_shapley_via_cross_entropy_all(const CategoricalTable& table, const SubjectSet& v,
                                                     std::size_t exact_limit = 20);

}  // namespace uniqshap
