#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "uniqshap/adtree.hpp"

using namespace uniqshap;
using uniqshap::testing::d1_table;

TEST_CASE("D1 counts") {
    const auto table = d1_table();
    const ADTree tree(table, 0);
    tree.validate();
    const Code a = *table.level_code(0, "A");
    const Code zero = *table.level_code(1, "0");

    CHECK(tree.count(PartialAssignment{}) == 4);
    CHECK(tree.count(PartialAssignment({{0, a}})) == 2);
    CHECK(tree.count(PartialAssignment({{1, zero}})) == 3);
    CHECK(tree.count(PartialAssignment({{0, a}, {1, zero}})) == 1);
    // Subjects 2 and 3 are identical.
    CHECK(tree.count(PartialAssignment::for_subject(table, 2, VariableSubset{0, 1})) == 2);
    // (B,1) never occurs.
    CHECK(tree.count(PartialAssignment({{0, *table.level_code(0, "B")}, {1, *table.level_code(1, "1")}})) == 0);
}

TEST_CASE("naive_count on D1") {
    const auto table = d1_table();
    CHECK(naive_count(table, 0, VariableSubset{}) == 4);
    CHECK(naive_count(table, 0, VariableSubset{0}) == 2);
    CHECK(naive_count(table, 1, VariableSubset{1}) == 1);
    CHECK_THROWS(naive_count(table, 4, VariableSubset{}));
}

TEST_CASE("leaf threshold n collapses the tree to one leaf-list") {
    std::mt19937_64 rng(3);
    const auto table = testing::random_table(rng, 40, 4, 2, 4);
    const ADTree tree(table, table.rows());
    CHECK(tree.node_count() == 1);
    CHECK(tree.leaf_list_rows() == table.rows());
    tree.validate();
    for (std::size_t t = 0; t < table.rows(); ++t) {
        for (std::uint64_t m = 0; m < 16; ++m) {
            CHECK(tree.cohort_size(t, VariableSubset(m)) == naive_count(table, t, VariableSubset(m)));
        }
    }
}

TEST_CASE("assignments are validated") {
    const auto table = d1_table();
    const ADTree tree(table);
    CHECK_THROWS(tree.count(PartialAssignment({{0, 7}})));
    CHECK_THROWS(tree.count(PartialAssignment({{5, 0}})));
    CHECK_THROWS(PartialAssignment({{0, 0}, {0, 1}}));
    CHECK(PartialAssignment({{1, 0}, {0, 1}}).subset() == VariableSubset{0, 1});
}

TEST_CASE("oracle equivalence, monotonicity and structure on random tables") {
    std::mt19937_64 rng(20240601);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
        const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
        const std::size_t threshold = std::uniform_int_distribution<std::size_t>(0, 20)(rng);
        const auto table = testing::random_table(rng, n, d, 1, 5, trial % 2 == 0);
        const ADTree tree(table, threshold);
        tree.validate();
        const std::uint64_t masks = std::uint64_t{1} << d;
        for (std::size_t t = 0; t < n; ++t) {
            for (std::uint64_t m = 0; m < masks; ++m) {
                const VariableSubset u(m);
                const auto c = tree.count(PartialAssignment::for_subject(table, t, u));
                REQUIRE(c == naive_count(table, t, u));
                CHECK(c >= 1);
                CHECK(tree.cohort_size(t, u) == c);
                for (std::size_t j = 0; j < d; ++j) {
                    if (!u.contains(j)) {
                        CHECK(tree.cohort_size(t, u.with(j)) <= c);
                    }
                }
            }
        }
    }
}

TEST_CASE("MCV values are recovered by subtraction") {
    // Column 0 is 'M' in 9 of 10 rows, so its MCV child is pruned at the root.
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < 10; ++i) {
        rows.push_back({i == 0 ? "r" : "M", std::to_string(i % 3), std::to_string(i % 2)});
    }
    const auto table = CategoricalTable::from_rows({"a", "b", "c"}, rows);
    const ADTree tree(table, 0);
    tree.validate();
    const Code mcv = *table.level_code(0, "M");
    for (Code b = 0; b < 3; ++b) {
        for (Code c = 0; c < 2; ++c) {
            long expected = 0;
            for (std::size_t i = 0; i < table.rows(); ++i) {
                expected += table.code(i, 0) == mcv && table.code(i, 1) == b && table.code(i, 2) == c;
            }
            CHECK(tree.count(PartialAssignment({{0, mcv}, {1, b}, {2, c}})) == expected);
        }
    }
}

TEST_CASE("query cost does not grow with n") {
    // Same distribution at growing n: product design replicated.
    std::vector<std::uint64_t> visits;
    for (std::size_t rep : {10, 100, 1000}) {
        const auto table = synth_product({3, 2, 4, 2}, rep);
        const ADTree tree(table, 0);
        QueryStats stats;
        for (std::uint64_t m = 0; m < 16; ++m) {
            for (std::size_t t = 0; t < table.rows(); t += table.rows() / 48) {
                tree.cohort_size(t, VariableSubset(m), &stats);
            }
        }
        CHECK(stats.leaf_rows_scanned == 0);
        visits.push_back(stats.node_visits);
    }
    CHECK(visits[0] == visits[1]);
    CHECK(visits[1] == visits[2]);
}

TEST_CASE("cache round trip") {
    std::mt19937_64 rng(99);
    const auto table = testing::random_table(rng, 150, 5, 2, 5, true);
    const ADTree tree(table, 4);
    std::stringstream buf;
    tree.save(buf);
    const ADTree loaded = ADTree::load(buf, table);
    loaded.validate();
    CHECK(loaded.node_count() == tree.node_count());
    for (std::size_t t = 0; t < table.rows(); ++t) {
        for (std::uint64_t m = 0; m < 32; ++m) {
            CHECK(loaded.cohort_size(t, VariableSubset(m)) == tree.cohort_size(t, VariableSubset(m)));
        }
    }

    const auto other = testing::random_table(rng, 150, 5, 2, 5, true);
    std::stringstream again;
    tree.save(again);
    CHECK_THROWS_AS(ADTree::load(again, other), InputError);
    std::stringstream junk("not a tree");
    CHECK_THROWS_AS(ADTree::load(junk, table), InputError);
    std::string bytes;
    {
        std::stringstream full;
        tree.save(full);
        bytes = full.str();
    }
    std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(ADTree::load(truncated, table), InputError);
}

TEST_CASE("content hash tracks table contents") {
    const auto a = d1_table();
    const auto b = CategoricalTable::from_rows({"var1", "var2"}, {{"A", "0"}, {"A", "1"}, {"B", "0"}, {"B", "1"}});
    CHECK(content_hash(a) == content_hash(d1_table()));
    CHECK(content_hash(a) != content_hash(b));
}
