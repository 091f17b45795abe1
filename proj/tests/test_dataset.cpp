#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "test_support.hpp"
#include "uniqshap/adtree.hpp"
#include "uniqshap/csv.hpp"
#include "uniqshap/dataset.hpp"
#include "uniqshap/infotheory.hpp"
#include "uniqshap/shapley.hpp"

using namespace uniqshap;

TEST_CASE("csv parser handles RFC 4180 quoting") {
    std::istringstream in("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\n\"multi\nline\",\n");
    const auto records = csv::parse(in);
    REQUIRE(records.size() == 3);
    CHECK(records[1][0] == "x,1");
    CHECK(records[1][1] == "say \"hi\"");
    CHECK(records[2][0] == "multi\nline");
    CHECK(records[2][1] == "");
    CHECK(csv::escape("plain") == "plain");
    CHECK(csv::escape("a,b") == "\"a,b\"");

    std::istringstream bad("a,\"open\n");
    CHECK_THROWS(csv::parse(bad));
}

TEST_CASE("ingest_csv encodes by first appearance") {
    TempDir dir;
    const auto path = dir.write("d.csv", "v1,v2,unused\nA,0,x\nA,1,y\nB,0,z\nB,0,w\n");
    const auto table = ingest_csv(path, {"v1", "v2"});
    CHECK(table.rows() == 4);
    CHECK(table.cols() == 2);
    CHECK(table.levels(0) == std::vector<std::string>{"A", "B"});
    CHECK(table.levels(1) == std::vector<std::string>{"0", "1"});
    const std::vector<Code> expected{0, 0, 0, 1, 1, 0, 1, 0};
    CHECK(std::equal(expected.begin(), expected.end(), table.codes().begin(), table.codes().end()));
}

TEST_CASE("empty cells are their own level") {
    TempDir dir;
    const auto path = dir.write("age.csv", "age,sex\n30,F\n,M\n30,\n");
    const auto table = ingest_csv(path);
    CHECK(table.levels(0) == std::vector<std::string>{"30", ""});
    CHECK(table.levels(1) == std::vector<std::string>{"F", "M", ""});
}

TEST_CASE("ingest_csv errors") {
    TempDir dir;
    CHECK_THROWS_AS(ingest_csv(dir.path() / "missing.csv"), InputError);

    const auto ok = dir.write("ok.csv", "a,b\n1,2\n");
    CHECK_THROWS_WITH_AS(ingest_csv(ok, {"a", "zz"}), doctest::Contains("zz"), InputError);

    const auto ragged = dir.write("ragged.csv", "a,b\n1,2\n3\n4,5\n");
    CHECK_THROWS_WITH_AS(ingest_csv(ragged), doctest::Contains("row 3"), InputError);

    const auto header_only = dir.write("header.csv", "a,b\n");
    CHECK_THROWS_AS(ingest_csv(header_only), InputError);
}

TEST_CASE("solar flare fixture: 1066 regions, nine predictors") {
    const auto table = ingest_csv(data_path("flare.csv"), flare_predictors());
    CHECK(table.rows() == 1066);
    CHECK(table.cols() == 9);
    // The omitted tenth predictor really is constant.
    const auto all = ingest_csv(data_path("flare.csv"));
    CHECK(all.level_count(*all.column_index("area_largest_spot")) == 1);
}

TEST_CASE("decoding codes reproduces the raw cells") {
    TempDir dir;
    std::mt19937_64 rng(11);
    std::ostringstream text;
    text << "p,q,r\n";
    std::vector<std::vector<std::string>> raw;
    for (int i = 0; i < 60; ++i) {
        std::vector<std::string> row{std::to_string(rng() % 4), (rng() % 3 == 0) ? "" : "v" + std::to_string(rng() % 5),
                                     "w,\"" + std::to_string(rng() % 2)};
        raw.push_back(row);
        csv::write_record(text, row);
    }
    const auto table = ingest_csv(dir.write("rt.csv", text.str()));
    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(table.raw(i, j) == raw[i][j]);
        }
    }
}

TEST_CASE("table invariants are enforced") {
    CHECK_THROWS_AS(CategoricalTable({"a"}, {{"x", "x"}}, {0}), InputError);
    CHECK_THROWS_AS(CategoricalTable({"a"}, {{"x"}}, {1}), InputError);
    CHECK_THROWS_AS(CategoricalTable({"a"}, {{}}, {}), InputError);
    CHECK_THROWS_AS(CategoricalTable({}, {}, {}), InputError);
}

TEST_CASE("coarsen to 25-year buckets") {
    std::vector<std::vector<std::string>> rows;
    for (int age = 0; age <= 120; ++age) {
        rows.push_back({std::to_string(age), age % 2 ? "F" : "M"});
    }
    const auto table = CategoricalTable::from_rows({"age", "sex"}, rows);
    CoarseningMap map{0, {}};
    for (int age = 0; age <= 120; ++age) {
        map.mapping[std::to_string(age)] = std::to_string(age / 25 * 25);
    }
    const auto coarse = coarsen(table, map);
    CHECK(coarse.level_count(0) == 5);
    CHECK(coarse.rows() == table.rows());
    CHECK(coarse.cols() == table.cols());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        CHECK(coarse.code(i, 1) == table.code(i, 1));
        CHECK(coarse.raw(i, 0) == map.mapping.at(table.raw(i, 0)));
    }
}

TEST_CASE("one-bucket coarsening zeroes that variable") {
    std::mt19937_64 rng(5);
    const auto table = testing::random_table(rng, 80, 3, 2, 5);
    CoarseningMap map{1, {}};
    for (const auto& level : table.levels(1)) {
        map.mapping[level] = "all";
    }
    const auto coarse = coarsen(table, map);
    CHECK(coarse.level_count(1) == 1);
    const ADTree tree(coarse);
    for (std::size_t t = 0; t < coarse.rows(); ++t) {
        CHECK(shapley_subject(tree, coarse, t)[1] == 0.0);
    }
}

TEST_CASE("identity coarsening returns the same table") {
    std::mt19937_64 rng(6);
    const auto table = testing::random_table(rng, 50, 3, 2, 4);
    CoarseningMap map{2, {}};
    for (const auto& level : table.levels(2)) {
        map.mapping[level] = level;
    }
    CHECK(coarsen(table, map) == table);
}

TEST_CASE("coarsen rejects unmapped levels") {
    const auto table = testing::d1_table();
    CoarseningMap map{0, {{"A", "a"}}};
    CHECK_THROWS_WITH_AS(coarsen(table, map), doctest::Contains("'B'"), InputError);
}

TEST_CASE("coarsening map files name their column in the header") {
    TempDir dir;
    const auto table = testing::d1_table();
    const auto path = dir.write("m.csv", "var1,bucket\nA,AB\nB,AB\n");
    const auto map = load_coarsening_map(path, table);
    CHECK(map.column == 0);
    CHECK(map.mapping.at("B") == "AB");
    CHECK_THROWS_AS(load_coarsening_map(dir.write("bad.csv", "nope,bucket\nA,B\n"), table), InputError);
}

TEST_CASE("synth_product") {
    const auto small = synth_product({2, 2}, 1);
    CHECK(small.rows() == 4);
    std::set<std::pair<Code, Code>> pairs;
    for (std::size_t i = 0; i < 4; ++i) {
        pairs.emplace(small.code(i, 0), small.code(i, 1));
    }
    CHECK(pairs.size() == 4);

    const auto big = synth_product({2, 3, 4}, 2);
    CHECK(big.rows() == 48);
    CHECK(big.cols() == 3);

    CHECK_THROWS_AS(synth_product({2, 0}, 1), InputError);
    CHECK_THROWS_AS(synth_product({2}, 0), InputError);
    CHECK_THROWS_AS(synth_product({1ULL << 40, 1ULL << 40}, 1), InputError);
}

TEST_CASE("synth_product columns are exactly independent") {
    for (const auto& counts : std::vector<std::vector<std::size_t>>{{2, 3, 4}, {5, 2}, {3, 3, 2, 2}}) {
        const auto table = synth_product(counts, 3);
        const auto n = static_cast<double>(table.rows());
        for (std::size_t a = 0; a < table.cols(); ++a) {
            for (std::size_t b = a + 1; b < table.cols(); ++b) {
                const auto joint = marginal(table, VariableSubset{a, b});
                const auto pa = marginal(table, VariableSubset{a});
                const auto pb = marginal(table, VariableSubset{b});
                for (const auto& [tuple, count] : joint.counts) {
                    const double prod = pa.probability({tuple[0]}) * pb.probability({tuple[1]});
                    CHECK(std::abs(static_cast<double>(count) / n - prod) <= 1e-12);
                }
                CHECK(joint.support_size() == table.level_count(a) * table.level_count(b));
                const double mutual_information = entropy(pa) + entropy(pb) - entropy(joint);
                CHECK(std::abs(mutual_information) <= 1e-12);
            }
        }
    }
}

TEST_CASE("subject filters") {
    const auto table = testing::d1_table();
    const auto b_rows = select_subjects(table, SubjectFilter::parse("var1=B"));
    CHECK(b_rows.indices() == std::vector<std::size_t>{2, 3});
    const auto either = select_subjects(table, SubjectFilter::parse("var2=1|0,var1=A"));
    CHECK(either.indices() == std::vector<std::size_t>{0, 1});
    CHECK_THROWS_AS(select_subjects(table, SubjectFilter::parse("var1=C")), InputError);
    CHECK_THROWS_AS(select_subjects(table, SubjectFilter::parse("nope=A")), InputError);
    CHECK_THROWS_AS(SubjectFilter::parse("var1"), InputError);
    CHECK(SubjectFilter::parse("a=1|2,b=x").to_string() == "a=1|2,b=x");
}

TEST_CASE("subject sets reject bad input") {
    CHECK_THROWS_AS(SubjectSet({}, 3), InputError);
    CHECK_THROWS_AS(SubjectSet({1, 1}, 3), InputError);
    CHECK_THROWS_AS(SubjectSet({3}, 3), InputError);
    CHECK(SubjectSet({2, 0}, 3).indices() == std::vector<std::size_t>{0, 2});
}
