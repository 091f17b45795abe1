#include "uniqshap/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "uniqshap/infotheory.hpp"
#include "uniqshap/weights.hpp"

namespace uniqshap {

namespace {

void check_exact_limit(std::size_t d, std::size_t limit) {
    if (d > limit) {
        throw ExactLimitError("exact mode supports at most " + std::to_string(limit) + " variables, table has " +
                              std::to_string(d) + "; use Monte Carlo mode");
    }
}

void check_subject(const CohortCounter& counter, std::size_t t) {
    if (t >= counter.rows()) {
        throw std::out_of_range("subject index " + std::to_string(t) + " out of range");
    }
}

void check_same_table(const ADTree& tree, const CategoricalTable& table) {
    if (tree.rows() != table.rows() || tree.cols() != table.cols()) {
        throw std::invalid_argument("AD-tree was built from a different table");
    }
}

/// log2 N_t(u) for every u, indexed by mask.
void fill_log_cohorts(const CohortCounter& counter, std::size_t t, std::vector<double>& log_n) {
    const std::size_t masks = std::size_t{1} << counter.cols();
    log_n.resize(masks);
    for (std::size_t m = 0; m < masks; ++m) {
        log_n[m] = std::log2(static_cast<double>(counter.cohort_size(t, VariableSubset(m))));
    }
}

/// phi_j = sum over u not containing j of weight(|u|) * (log2 N(u) - log2 N(u+j)).
void weighted_increments(std::span<const double> log_n, std::size_t d, const std::vector<SubsetWeight>& weights,
                         std::span<double> out) {
    const std::size_t masks = std::size_t{1} << d;
    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        double sum = 0.0;
        for (std::size_t m = 0; m < masks; ++m) {
            if ((m & bit) != 0) {
                continue;
            }
            sum += weights[static_cast<std::size_t>(std::popcount(m))].value * (log_n[m] - log_n[m | bit]);
        }
        out[j] = sum;
    }
}

/// Runs body(t) for t in [0, n) on `workers` threads with static contiguous
/// chunks. Each t is handled by exactly one thread.
template <typename Body>
void for_each_subject(std::size_t n, std::size_t workers, Body body) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t t = 0; t < n; ++t) {
            body(t, 0);
        }
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&, begin, end, w] {
            try {
                for (std::size_t t = begin; t < end; ++t) {
                    body(t, w);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : threads) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

ShapleyMatrix weighted_all(const CohortCounter& counter, const ShapleyOptions& options,
                           const std::vector<SubsetWeight>& weights, ShapleyMode mode) {
    const std::size_t n = counter.rows();
    const std::size_t d = counter.cols();
    check_exact_limit(d, options.exact_limit);
    ShapleyMatrix matrix;
    matrix.n = n;
    matrix.d = d;
    matrix.mode = mode;
    matrix.values.assign(n * d, 0.0);
    const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, n));
    std::vector<std::vector<double>> scratch(workers);
    for_each_subject(n, workers, [&](std::size_t t, std::size_t w) {
        fill_log_cohorts(counter, t, scratch[w]);
        weighted_increments(scratch[w], d, weights, std::span<double>(matrix.values.data() + t * d, d));
    });
    return matrix;
}

std::vector<double> weighted_subject(const CohortCounter& counter, std::size_t t, std::size_t exact_limit,
                                     const std::vector<SubsetWeight>& weights) {
    check_subject(counter, t);
    check_exact_limit(counter.cols(), exact_limit);
    std::vector<double> log_n;
    fill_log_cohorts(counter, t, log_n);
    std::vector<double> phi(counter.cols());
    weighted_increments(log_n, counter.cols(), weights, phi);
    return phi;
}

std::mt19937_64 subject_rng(std::uint64_t seed, std::size_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(std::uint64_t{t} >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

const char* to_string(ShapleyMode mode) {
    switch (mode) {
        case ShapleyMode::exact:
            return "exact";
        case ShapleyMode::monte_carlo:
            return "mc";
        case ShapleyMode::keyed:
            return "keyed";
    }
    return "unknown";
}

double ShapleyMatrix::row_total(std::size_t t) const {
    const auto r = row(t);
    return std::accumulate(r.begin(), r.end(), 0.0);
}

std::vector<double> shapley_subject(const CohortCounter& counter, std::size_t t, std::size_t exact_limit) {
    check_exact_limit(counter.cols(), exact_limit);
    return weighted_subject(counter, t, exact_limit, shapley_weights(counter.cols()));
}

std::vector<double> shapley_subject(const ADTree& tree, const CategoricalTable& table, std::size_t t,
                                    std::size_t exact_limit) {
    check_same_table(tree, table);
    return shapley_subject(TreeCounter(tree), t, exact_limit);
}

std::vector<double> shapley_subject_keyed(const CohortCounter& counter, std::size_t t, std::size_t exact_limit) {
    check_exact_limit(counter.cols(), exact_limit);
    return weighted_subject(counter, t, exact_limit, keyed_weights(counter.cols()));
}

std::vector<double> shapley_subject_keyed(const ADTree& tree, const CategoricalTable& table, std::size_t t,
                                          std::size_t exact_limit) {
    check_same_table(tree, table);
    return shapley_subject_keyed(TreeCounter(tree), t, exact_limit);
}

MonteCarloEstimate shapley_subject_mc(const CohortCounter& counter, std::size_t t, std::size_t permutations,
                                      std::uint64_t seed) {
    check_subject(counter, t);
    if (permutations == 0) {
        throw InputError("Monte Carlo mode needs at least one permutation");
    }
    const std::size_t d = counter.cols();
    const double log_n = std::log2(static_cast<double>(counter.rows()));
    std::mt19937_64 rng = subject_rng(seed, t);
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});

    // Welford running mean and sum of squared deviations per variable.
    std::vector<double> mean(d, 0.0);
    std::vector<double> m2(d, 0.0);
    for (std::size_t p = 0; p < permutations; ++p) {
        std::shuffle(order.begin(), order.end(), rng);
        VariableSubset prefix;
        double prev = log_n;
        for (std::size_t j : order) {
            prefix = prefix.with(j);
            const double next = std::log2(static_cast<double>(counter.cohort_size(t, prefix)));
            const double increment = prev - next;
            prev = next;
            const double delta = increment - mean[j];
            mean[j] += delta / static_cast<double>(p + 1);
            m2[j] += delta * (increment - mean[j]);
        }
    }
    MonteCarloEstimate est{mean, std::vector<double>(d, 0.0)};
    if (permutations > 1) {
        const auto count = static_cast<double>(permutations);
        for (std::size_t j = 0; j < d; ++j) {
            est.std_errors[j] = std::sqrt(std::max(0.0, m2[j] / (count - 1.0)) / count);
        }
    }
    return est;
}

MonteCarloEstimate shapley_subject_mc(const ADTree& tree, const CategoricalTable& table, std::size_t t,
                                      std::size_t permutations, std::uint64_t seed) {
    check_same_table(tree, table);
    return shapley_subject_mc(TreeCounter(tree), t, permutations, seed);
}

ShapleyMatrix shapley_all(const CohortCounter& counter, const ShapleyOptions& options) {
    return weighted_all(counter, options, shapley_weights(counter.cols()), ShapleyMode::exact);
}

ShapleyMatrix shapley_all(const ADTree& tree, const CategoricalTable& table, const ShapleyOptions& options) {
    check_same_table(tree, table);
    return shapley_all(TreeCounter(tree), options);
}

ShapleyMatrix shapley_all_keyed(const CohortCounter& counter, const ShapleyOptions& options) {
    return weighted_all(counter, options, keyed_weights(counter.cols()), ShapleyMode::keyed);
}

ShapleyMatrix shapley_all_mc(const CohortCounter& counter, std::size_t permutations, std::uint64_t seed,
                             const ShapleyOptions& options) {
    if (permutations == 0) {
        throw InputError("Monte Carlo mode needs at least one permutation");
    }
    const std::size_t n = counter.rows();
    const std::size_t d = counter.cols();
    ShapleyMatrix matrix;
    matrix.n = n;
    matrix.d = d;
    matrix.mode = ShapleyMode::monte_carlo;
    matrix.permutations = permutations;
    matrix.seed = seed;
    matrix.values.assign(n * d, 0.0);
    matrix.std_errors.assign(n * d, 0.0);
    for_each_subject(n, options.workers, [&](std::size_t t, std::size_t) {
        const auto est = shapley_subject_mc(counter, t, permutations, seed);
        std::copy(est.values.begin(), est.values.end(), matrix.values.begin() + static_cast<std::ptrdiff_t>(t * d));
        std::copy(est.std_errors.begin(), est.std_errors.end(),
                  matrix.std_errors.begin() + static_cast<std::ptrdiff_t>(t * d));
    });
    return matrix;
}

std::vector<double> aggregate_values(const ShapleyMatrix& matrix, const SubjectSet& v) {
    if (v.indices().back() >= matrix.n) {
        throw std::out_of_range("subject set does not fit the matrix");
    }
    std::vector<double> mean(matrix.d, 0.0);
    for (std::size_t t : v) {
        for (std::size_t j = 0; j < matrix.d; ++j) {
            mean[j] += matrix.at(t, j);
        }
    }
    for (double& m : mean) {
        m /= static_cast<double>(v.size());
    }
    return mean;
}

AggregateReport aggregate(const ShapleyMatrix& matrix, const CategoricalTable& table, const SubjectSet& v) {
    if (matrix.n != table.rows() || matrix.d != table.cols()) {
        throw std::invalid_argument("matrix shape does not match the table");
    }
    AggregateReport report;
    report.subjects = v.indices();
    report.variables = table.names();
    report.shapley_bits = aggregate_values(matrix, v);
    for (std::size_t j = 0; j < table.cols(); ++j) {
        report.entropy_bits.push_back(entropy(marginal(table, VariableSubset{j})));
    }
    report.population_fraction = static_cast<double>(v.size()) / static_cast<double>(table.rows());
    return report;
}

}  // namespace uniqshap
