#pragma once

#include <cstddef>
#include <optional>

#include "uniqshap/dataset.hpp"
#include "uniqshap/shapley.hpp"

namespace uniqshap {

inline constexpr std::size_t kDefaultNaiveCutoff = 50000;
inline constexpr double kEngineAgreementTolerance = 1e-9;

struct EngineTiming {
    double build_seconds = 0.0;
    double query_seconds = 0.0;
    double total() const { return build_seconds + query_seconds; }
};

struct BenchmarkResult {
    std::size_t n = 0;
    std::size_t d = 0;
    EngineTiming tree;
    std::optional<EngineTiming> naive;  // empty when n exceeds the cutoff
    std::size_t tree_nodes = 0;
    double max_abs_diff = 0.0;          // between engines; 0 when naive skipped
    bool agree = true;
    ShapleyMatrix matrix;               // AD-tree result
};

struct BenchmarkOptions {
    std::size_t leaf_threshold = 16;
    std::size_t workers = 1;
    std::size_t naive_cutoff = kDefaultNaiveCutoff;
    std::size_t exact_limit = kDefaultExactLimit;
};

/// Exact Shapley with the AD-tree and, when n <= cutoff, with linear-scan
/// counting, timing both and comparing the matrices entrywise.
BenchmarkResult run_benchmark(const CategoricalTable& table, const BenchmarkOptions& options = {});

}  // namespace uniqshap
