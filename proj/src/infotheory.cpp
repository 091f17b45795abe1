#include "uniqshap/infotheory.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "uniqshap/weights.hpp"

namespace uniqshap {

namespace {

/// Neumaier-compensated sum in extended precision.
class CompensatedSum {
public:
    void add(long double x) {
        const long double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    long double value() const { return sum_ + comp_; }

private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

template <typename Rows>
EmpiricalDistribution tabulate(const CategoricalTable& table, VariableSubset w, const Rows& rows) {
    if (table.cols() < kMaxVariables && (w.mask() >> table.cols()) != 0) {
        throw std::out_of_range("variable subset exceeds table width");
    }
    const auto members = w.members();
    EmpiricalDistribution dist;
    dist.subset = w;
    std::vector<Code> tuple(members.size());
    for (std::size_t i : rows) {
        for (std::size_t k = 0; k < members.size(); ++k) {
            tuple[k] = table.code(i, members[k]);
        }
        ++dist.counts[tuple];
        ++dist.total;
    }
    return dist;
}

struct RowRange {
    std::size_t n;
    struct iterator {
        std::size_t i;
        std::size_t operator*() const { return i; }
        iterator& operator++() {
            ++i;
            return *this;
        }
        bool operator!=(const iterator& o) const { return i != o.i; }
    };
    iterator begin() const { return {0}; }
    iterator end() const { return {n}; }
};

std::string describe(const std::vector<Code>& tuple) {
    std::ostringstream out;
    out << '(';
    for (std::size_t k = 0; k < tuple.size(); ++k) {
        out << (k ? "," : "") << tuple[k];
    }
    out << ')';
    return out.str();
}

void check_comparable(const EmpiricalDistribution& q, const EmpiricalDistribution& p) {
    if (q.subset != p.subset) {
        throw std::invalid_argument("distributions are over different variable subsets");
    }
}

void check_limit(std::size_t d, std::size_t limit) {
    if (d > limit) {
        throw InputError("entropy formula enumerates 2^d subsets; d=" + std::to_string(d) +
                         " exceeds the limit " + std::to_string(limit));
    }
}

/// (1/d) sum_{u not containing j} C(d-1,|u|)^-1 (f(u+j) - f(u)).
std::vector<double> weighted_differences(const std::vector<double>& f, std::size_t d) {
    const auto weights = shapley_weights(d);
    std::vector<double> out(d);
    const std::size_t masks = std::size_t{1} << d;
    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        CompensatedSum sum;
        // Increasing popcount, so each weight bucket is contiguous.
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t m = 0; m < masks; ++m) {
                if ((m & bit) == 0 && static_cast<std::size_t>(std::popcount(m)) == r) {
                    sum.add(static_cast<long double>(weights[r].value) * (f[m | bit] - f[m]));
                }
            }
        }
        out[j] = static_cast<double>(sum.value());
    }
    return out;
}

}  // namespace

double EmpiricalDistribution::probability(const std::vector<Code>& tuple) const {
    auto it = counts.find(tuple);
    return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(total);
}

EmpiricalDistribution marginal(const CategoricalTable& table, VariableSubset w) {
    return tabulate(table, w, RowRange{table.rows()});
}

EmpiricalDistribution marginal(const CategoricalTable& table, VariableSubset w, const SubjectSet& v) {
    if (v.indices().back() >= table.rows()) {
        throw std::out_of_range("subject set does not fit the table");
    }
    return tabulate(table, w, v.indices());
}

double entropy(const EmpiricalDistribution& dist) {
    CompensatedSum sum;
    const auto total = static_cast<long double>(dist.total);
    for (const auto& [tuple, count] : dist.counts) {
        const long double p = static_cast<long double>(count) / total;
        sum.add(-p * std::log2(p));
    }
    return static_cast<double>(sum.value());
}

double conditional_entropy(const CategoricalTable& table, VariableSubset target, VariableSubset given) {
    if (!target.disjoint(given)) {
        throw std::invalid_argument("conditional entropy needs disjoint target and given sets");
    }
    return entropy(marginal(table, target | given)) - entropy(marginal(table, given));
}

double relative_entropy(const EmpiricalDistribution& q, const EmpiricalDistribution& p) {
    check_comparable(q, p);
    CompensatedSum sum;
    for (const auto& [tuple, count] : q.counts) {
        auto it = p.counts.find(tuple);
        if (it == p.counts.end()) {
            throw SupportError("q has mass on tuple " + describe(tuple) + " outside the support of p");
        }
        const long double qx = static_cast<long double>(count) / static_cast<long double>(q.total);
        const long double px = static_cast<long double>(it->second) / static_cast<long double>(p.total);
        sum.add(qx * std::log2(qx / px));
    }
    return static_cast<double>(sum.value());
}

double cross_entropy(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
    check_comparable(q, p);
    CompensatedSum sum;
    for (const auto& [tuple, count] : q.counts) {
        auto it = p.counts.find(tuple);
        if (it == p.counts.end()) {
            throw SupportError("q has mass on tuple " + describe(tuple) + " outside the support of p");
        }
        const long double qx = static_cast<long double>(count) / static_cast<long double>(q.total);
        const long double px = static_cast<long double>(it->second) / static_cast<long double>(p.total);
        sum.add(-qx * std::log2(px));
    }
    return static_cast<double>(sum.value());
}

std::vector<double> subset_entropies(const CategoricalTable& table) {
    const std::size_t masks = std::size_t{1} << table.cols();
    std::vector<double> h(masks);
    for (std::size_t m = 0; m < masks; ++m) {
        h[m] = entropy(marginal(table, VariableSubset(m)));
    }
    return h;
}

std::vector<double> global_shapley_via_entropy_all(const CategoricalTable& table, std::size_t exact_limit) {
    check_limit(table.cols(), exact_limit);
    // f(u+j) - f(u) = H(u+j) - H(u) = H(j | u).
    return weighted_differences(subset_entropies(table), table.cols());
}

double global_shapley_via_entropy(const CategoricalTable& table, std::size_t j, std::size_t exact_limit) {
    if (j >= table.cols()) {
        throw std::out_of_range("column index out of range");
    }
    return global_shapley_via_entropy_all(table, exact_limit)[j];
}

std::vector<double> subset_shapley_via_cross_entropy_all(const CategoricalTable& table, const SubjectSet& v,
                                                     std::size_t exact_limit) {
    check_limit(table.cols(), exact_limit);
    const std::size_t masks = std::size_t{1} << table.cols();
    std::vector<double> h(masks);
    for (std::size_t m = 0; m < masks; ++m) {
        const VariableSubset w(m);
        h[m] = cross_entropy(marginal(table, w), marginal(table, w, v));
    }
    return weighted_differences(h, table.cols());
}

double subset_shapley_via_cross_entropy(const CategoricalTable& table, const SubjectSet& v, std::size_t j,
                                        std::size_t exact_limit) {
    if (j >= table.cols()) {
        throw std::out_of_range("column index out of range");
    }
    return subset_shapley_via_cross_entropy_all(table, v, exact_limit)[j];
}

}  // namespace uniqshap
