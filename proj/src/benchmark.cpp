#include "uniqshap/benchmark.hpp"

#include <chrono>
#include <cmath>

namespace uniqshap {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

BenchmarkResult run_benchmark(const CategoricalTable& table, const BenchmarkOptions& options) {
    BenchmarkResult result;
    result.n = table.rows();
    result.d = table.cols();
    const ShapleyOptions shap{options.workers, options.exact_limit};

    auto start = Clock::now();
    const ADTree tree(table, options.leaf_threshold);
    result.tree.build_seconds = seconds_since(start);
    result.tree_nodes = tree.node_count();

    start = Clock::now();
    result.matrix = shapley_all(tree, table, shap);
    result.tree.query_seconds = seconds_since(start);

    if (table.rows() > options.naive_cutoff) {
        return result;
    }
    start = Clock::now();
    const ShapleyMatrix naive = shapley_all(ScanCounter(table), shap);
    result.naive = EngineTiming{0.0, seconds_since(start)};

    for (std::size_t k = 0; k < naive.values.size(); ++k) {
        const double diff = std::fabs(naive.values[k] - result.matrix.values[k]);
        if (!(diff <= result.max_abs_diff)) {
            result.max_abs_diff = diff;
        }
    }
    result.agree = result.max_abs_diff <= kEngineAgreementTolerance;
    return result;
}

}  // namespace uniqshap
