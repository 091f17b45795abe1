#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "uniqshap/infotheory.hpp"
#include "uniqshap/shapley.hpp"

using namespace uniqshap;
using uniqshap::testing::d1_table;

namespace {

CategoricalTable two_level(std::size_t a, std::size_t b) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < a + b; ++i) {
        rows.push_back({i < a ? "a" : "b"});
    }
    return CategoricalTable::from_rows({"x"}, rows);
}

// Mean of the permutation oracle over a subject set.
std::vector<double> oracle_mean(const CategoricalTable& table, const std::vector<std::size_t>& subjects) {
    std::vector<double> mean(table.cols(), 0.0);
    for (std::size_t t : subjects) {
        const auto phi = testing::permutation_oracle(table, t);
        for (std::size_t j = 0; j < table.cols(); ++j) {
            mean[j] += phi[j];
        }
    }
    for (double& m : mean) {
        m /= static_cast<double>(subjects.size());
    }
    return mean;
}

// Entropy straight from cohort counts: H(u) = -(1/n) sum_t log2(N_t(u)/n).
double scan_entropy(const CategoricalTable& table, const std::vector<std::size_t>& cols) {
    const double n = static_cast<double>(table.rows());
    double h = 0.0;
    for (std::size_t t = 0; t < table.rows(); ++t) {
        h -= std::log2(static_cast<double>(testing::scan_cohort(table, t, cols)) / n);
    }
    return h / n;
}

}  // namespace

TEST_CASE("marginals of D1") {
    const auto table = d1_table();
    const auto p1 = marginal(table, VariableSubset{0});
    CHECK(p1.total == 4);
    CHECK(p1.support_size() == 2);
    CHECK(p1.probability({*table.level_code(0, "A")}) == 0.5);

    const auto joint = marginal(table, VariableSubset{0, 1});
    CHECK(joint.support_size() == 3);
    CHECK(joint.probability({*table.level_code(0, "B"), *table.level_code(1, "0")}) == 0.5);
    CHECK(joint.probability({*table.level_code(0, "B"), *table.level_code(1, "1")}) == 0.0);

    const auto sub = marginal(table, VariableSubset{0}, SubjectSet({2, 3}, 4));
    CHECK(sub.total == 2);
    CHECK(sub.support_size() == 1);

    const auto empty = marginal(table, VariableSubset{});
    CHECK(empty.support_size() == 1);
    CHECK(entropy(empty) == 0.0);
}

TEST_CASE("entropy of simple distributions") {
    CHECK(entropy(marginal(two_level(5, 5), VariableSubset{0})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(entropy(marginal(two_level(9, 1), VariableSubset{0})) - 0.468996) <= 1e-6);
    CHECK(entropy(marginal(two_level(7, 0), VariableSubset{0})) == 0.0);
}

TEST_CASE("conditional entropy on D1") {
    const auto table = d1_table();
    CHECK(std::abs(conditional_entropy(table, VariableSubset{0}, VariableSubset{1}) - 0.688722) <= 1e-6);
    CHECK(conditional_entropy(table, VariableSubset{0}, VariableSubset{}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(conditional_entropy(table, VariableSubset{0}, VariableSubset{0, 1}), std::invalid_argument);
}

TEST_CASE("relative and cross entropy") {
    const auto table = d1_table();
    const auto p = marginal(table, VariableSubset{0});
    const auto q = marginal(table, VariableSubset{0}, SubjectSet({2, 3}, 4));
    CHECK(relative_entropy(q, p) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cross_entropy(p, q) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(relative_entropy(p, p) == 0.0);

    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto t = testing::random_table(rng, 80, 3, 2, 4, trial % 2 == 0);
        const auto v = testing::random_subjects(rng, t.rows());
        const VariableSubset w(std::uniform_int_distribution<std::uint64_t>(1, 7)(rng));
        const auto full = marginal(t, w);
        const auto part = marginal(t, w, v);
        CHECK(cross_entropy(full, part) == doctest::Approx(entropy(part) + relative_entropy(part, full)).epsilon(1e-12));
        CHECK(relative_entropy(part, full) >= -1e-12);
    }

    CHECK_THROWS_AS(relative_entropy(p, q), SupportError);
    CHECK_THROWS_AS(cross_entropy(q, p), SupportError);
}

TEST_CASE("subset entropies match a cohort-count scan and obey the chain rule") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        const auto table = testing::random_table(rng, 60, 4, 1, 4, trial % 2 == 0);
        const auto h = subset_entropies(table);
        REQUIRE(h.size() == 16);
        for (std::uint64_t m = 0; m < 16; ++m) {
            const auto members = VariableSubset(m).members();
            CHECK(std::abs(h[m] - scan_entropy(table, members)) <= 1e-12);
            for (std::uint64_t w = 0; w < 16; ++w) {
                if ((m & w) == 0) {
                    CHECK(std::abs(h[m | w] - (h[m] + conditional_entropy(table, VariableSubset(w), VariableSubset(m)))) <=
                          1e-12);
                }
            }
        }
    }
}

TEST_CASE("global values from conditional entropies") {
    const auto table = d1_table();
    CHECK(std::abs(global_shapley_via_entropy(table, 0) - 0.844361) <= 1e-6);
    CHECK(std::abs(global_shapley_via_entropy(table, 1) - 0.655639) <= 1e-6);

    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
        const auto t = testing::random_table(rng, 70, d, 1, 5, trial % 2 == 0);
        std::vector<std::size_t> everyone(t.rows());
        std::iota(everyone.begin(), everyone.end(), std::size_t{0});
        const auto expected = oracle_mean(t, everyone);
        const auto via_entropy = global_shapley_via_entropy_all(t);
        const auto via_matrix = aggregate_values(shapley_all(ADTree(t), t), SubjectSet::all(t.rows()));
        double total = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            CHECK(std::abs(via_entropy[j] - expected[j]) <= 1e-9);
            CHECK(std::abs(via_matrix[j] - expected[j]) <= 1e-9);
            total += via_entropy[j];
        }
        CHECK(std::abs(total - scan_entropy(t, VariableSubset::all(d).members())) <= 1e-9);
    }
    CHECK_THROWS_AS(global_shapley_via_entropy(table, 0, 1), InputError);
}

TEST_CASE("subset aggregates from cross entropies") {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        const auto t = testing::random_table(rng, 60, d, 2, 4, trial % 2 == 0);
        const auto v = testing::random_subjects(rng, t.rows());
        const auto expected = oracle_mean(t, v.indices());
        const auto via_cross = subset_shapley_via_cross_entropy_all(t, v);
        const auto via_matrix = aggregate_values(shapley_all(ADTree(t), t), v);
        for (std::size_t j = 0; j < d; ++j) {
            CHECK(std::abs(via_cross[j] - expected[j]) <= 1e-9);
            CHECK(std::abs(via_matrix[j] - expected[j]) <= 1e-9);
        }
    }
    const auto table = d1_table();
    CHECK(std::abs(subset_shapley_via_cross_entropy(table, SubjectSet({2, 3}, 4), 0) - 0.792481) <= 1e-6);
}

TEST_CASE("independent columns get exactly their own entropy") {
    for (const auto& counts : std::vector<std::vector<std::size_t>>{{2, 3, 4}, {5, 2}, {3, 3, 2, 2}, {7}}) {
        const auto table = synth_product(counts, 2);
        const auto m = shapley_all(ADTree(table), table);
        for (std::size_t j = 0; j < counts.size(); ++j) {
            const double h = std::log2(static_cast<double>(counts[j]));
            CHECK(std::abs(entropy(marginal(table, VariableSubset{j})) - h) <= 1e-12);
            for (std::size_t t = 0; t < table.rows(); ++t) {
                CHECK(std::abs(m.at(t, j) - h) <= 1e-12);
            }
        }
    }
}

TEST_CASE("global value lies between the conditional and marginal entropy") {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = std::uniform_int_distribution<std::size_t>(2, 5)(rng);
        const auto t = testing::random_table(rng, 90, d, 1, 5, trial % 2 == 0);
        const auto global = global_shapley_via_entropy_all(t);
        for (std::size_t j = 0; j < d; ++j) {
            const double upper = entropy(marginal(t, VariableSubset{j}));
            const double lower = conditional_entropy(t, VariableSubset{j}, VariableSubset::all(d).without(j));
            CHECK(global[j] <= upper + 1e-12);
            CHECK(global[j] >= lower - 1e-12);
        }
    }
}
