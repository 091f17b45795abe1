#include "uniqshap/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "uniqshap/adtree.hpp"
#include "uniqshap/benchmark.hpp"
#include "uniqshap/dataset.hpp"
#include "uniqshap/infotheory.hpp"
#include "uniqshap/report.hpp"
#include "uniqshap/shapley.hpp"

namespace uniqshap::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

/// Raised when two engines or identities disagree; maps to exit code 2.
class CorrectnessFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string input;
    std::vector<std::string> columns;
    std::string filter;
    std::string mode = "exact";
    std::size_t permutations = 1000;
    std::uint64_t seed = 0;
    std::size_t workers = std::max(1U, std::thread::hardware_concurrency());
    std::size_t leaf_threshold = ADTree::kDefaultLeafThreshold;
    std::size_t exact_limit = kDefaultExactLimit;
    bool force_exact = false;
    std::string coarsen_maps;
    std::size_t every = 1;
    std::string output = "-";
    std::string format = "csv";
    // benchmark
    std::size_t naive_cutoff = kDefaultNaiveCutoff;
    std::size_t synthetic_rows = 0;
    std::vector<std::size_t> synthetic_levels{40, 90, 6, 3, 5};
    double skew = 1.0;
};

std::shared_ptr<spdlog::logger> logger() {
    static std::shared_ptr<spdlog::logger> log = [] {
        auto l = spdlog::stderr_logger_st("uniqshap");
        l->set_pattern("[%l] %v");
        l->set_level(spdlog::level::warn);
        if (const char* env = std::getenv("UNIQ_SHAP_LOG")) {
            l->set_level(spdlog::level::from_str(env));
        }
        return l;
    }();
    return log;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Writes through a sibling temporary file renamed on success, so failed runs
/// leave no partial output behind.
void emit(const RunConfig& cfg, std::ostream& out, const std::function<void(std::ostream&)>& body) {
    if (cfg.output == "-") {
        body(out);
        return;
    }
    const fs::path target(cfg.output);
    fs::path tmp = target;
    tmp += ".partial";
    try {
        {
            std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
            if (!file) {
                throw InputError("cannot open output file: " + target.string());
            }
            body(file);
            file.flush();
            if (!file) {
                throw InputError("failed writing output file: " + target.string());
            }
        }
        fs::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
}

OutputFormat parse_format(const std::string& format) {
    return format == "json" ? OutputFormat::json : OutputFormat::csv;
}

/// Input table with every column, used for filters, and the analysis table
/// restricted to --columns.
struct LoadedInput {
    CategoricalTable full;
    CategoricalTable table;
};

LoadedInput load_input(const RunConfig& cfg) {
    if (cfg.input.empty()) {
        throw InputError("--input is required");
    }
    auto start = Clock::now();
    CategoricalTable full = ingest_csv(cfg.input);
    CategoricalTable table = cfg.columns.empty() ? full : full.select_columns(cfg.columns);
    logger()->info("loaded {} rows, {} analysis columns from {} in {:.3f}s", table.rows(), table.cols(),
                   cfg.input, seconds_since(start));
    return {std::move(full), std::move(table)};
}

SubjectSet subjects_for(const RunConfig& cfg, const CategoricalTable& full) {
    if (cfg.filter.empty()) {
        return SubjectSet::all(full.rows());
    }
    return select_subjects(full, SubjectFilter::parse(cfg.filter));
}

struct Timed {
    ShapleyMatrix matrix;
    double build_seconds = 0.0;
    double compute_seconds = 0.0;
};

Timed compute_matrix(const RunConfig& cfg, const CategoricalTable& table, std::ostream& err) {
    Timed result;
    std::string mode = cfg.mode;
    ShapleyOptions options{cfg.workers, cfg.force_exact ? std::max(cfg.exact_limit, table.cols()) : cfg.exact_limit};
    if (mode != "mc" && table.cols() > options.exact_limit) {
        logger()->warn("d={} exceeds the exact-mode limit {}; switching to Monte Carlo with {} permutations",
                       table.cols(), options.exact_limit, cfg.permutations);
        mode = "mc";
    }
    auto start = Clock::now();
    const ADTree tree(table, cfg.leaf_threshold);
    result.build_seconds = seconds_since(start);
    logger()->info("AD-tree: {} nodes, {} vary-nodes, {} leaf-list rows", tree.node_count(),
                   tree.vary_node_count(), tree.leaf_list_rows());

    start = Clock::now();
    const TreeCounter counter(tree);
    if (mode == "exact") {
        result.matrix = shapley_all(counter, options);
    } else if (mode == "keyed") {
        result.matrix = shapley_all_keyed(counter, options);
    } else {
        result.matrix = shapley_all_mc(counter, cfg.permutations, cfg.seed, options);
    }
    result.compute_seconds = seconds_since(start);
    err << std::fixed << std::setprecision(3) << "n=" << table.rows() << " d=" << table.cols()
        << " mode=" << to_string(result.matrix.mode) << " build_seconds=" << result.build_seconds
        << " compute_seconds=" << result.compute_seconds << '\n';
    err.unsetf(std::ios::floatfield);
    return result;
}

int cmd_shapley(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto input = load_input(cfg);
    const auto timed = compute_matrix(cfg, input.table, err);
    emit(cfg, out, [&](std::ostream& o) { write_matrix_csv(o, timed.matrix, input.table.names()); });
    return kSuccess;
}

int cmd_aggregate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto input = load_input(cfg);
    const SubjectSet v = subjects_for(cfg, input.full);
    const auto timed = compute_matrix(cfg, input.table, err);
    const auto report = aggregate(timed.matrix, input.table, v);
    emit(cfg, out, [&](std::ostream& o) { write_aggregate(o, report, parse_format(cfg.format), cfg.filter); });
    return kSuccess;
}

int cmd_entropy(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto input = load_input(cfg);
    const auto timed = compute_matrix(cfg, input.table, err);
    const auto report = aggregate(timed.matrix, input.table, SubjectSet::all(input.table.rows()));
    emit(cfg, out, [&](std::ostream& o) {
        write_entropy_report(o, input.table.names(), report.entropy_bits, report.shapley_bits);
    });
    return kSuccess;
}

int cmd_benchmark(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::optional<CategoricalTable> table;
    if (cfg.synthetic_rows > 0) {
        table = synth_zipf(cfg.synthetic_rows, cfg.synthetic_levels, cfg.skew, cfg.seed);
    } else {
        table = load_input(cfg).table;
    }
    BenchmarkOptions options;
    options.leaf_threshold = cfg.leaf_threshold;
    options.workers = cfg.workers;
    options.naive_cutoff = cfg.naive_cutoff;
    options.exact_limit = cfg.force_exact ? std::max(cfg.exact_limit, table->cols()) : cfg.exact_limit;
    const auto result = run_benchmark(*table, options);
    if (!result.agree) {
        throw CorrectnessFailure("AD-tree and naive engines disagree (max abs diff " +
                                 format_double(result.max_abs_diff) + "); timings withheld");
    }
    auto fmt = [](double s) {
        std::ostringstream o;
        o << std::fixed << std::setprecision(3) << s;
        return o.str();
    };
    emit(cfg, out, [&](std::ostream& o) {
        o << "engine,n,d,build_seconds,query_seconds,total_seconds\n";
        o << "adtree," << result.n << ',' << result.d << ',' << fmt(result.tree.build_seconds) << ','
          << fmt(result.tree.query_seconds) << ',' << fmt(result.tree.total()) << '\n';
        if (result.naive) {
            o << "naive," << result.n << ',' << result.d << ',' << fmt(result.naive->build_seconds) << ','
              << fmt(result.naive->query_seconds) << ',' << fmt(result.naive->total()) << '\n';
        } else {
            o << "naive," << result.n << ',' << result.d << ",n/a,n/a,n/a\n";
        }
    });
    if (result.naive) {
        err << "engines agree, max_abs_diff=" << format_double(result.max_abs_diff)
            << " speedup=" << fmt(result.naive->total() / std::max(result.tree.total(), 1e-9)) << "x\n";
    } else {
        err << "naive engine skipped: n=" << result.n << " exceeds cutoff " << cfg.naive_cutoff << '\n';
    }
    return kSuccess;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

int cmd_coarsen_study(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.coarsen_maps.empty()) {
        throw InputError("--coarsen-map is required for coarsen-study");
    }
    const auto input = load_input(cfg);
    const SubjectSet v = subjects_for(cfg, input.full);
    std::vector<CoarseningRow> rows;
    const auto baseline = compute_matrix(cfg, input.table, err);
    rows.push_back({"baseline", aggregate_values(baseline.matrix, v)});
    for (const auto& path : split(cfg.coarsen_maps, ':')) {
        const auto map = load_coarsening_map(path, input.table);
        const auto coarse = coarsen(input.table, map);
        const auto timed = compute_matrix(cfg, coarse, err);
        rows.push_back({fs::path(path).stem().string(), aggregate_values(timed.matrix, v)});
    }
    emit(cfg, out, [&](std::ostream& o) {
        write_coarsen_study(o, input.table.names(), rows, parse_format(cfg.format));
    });
    return kSuccess;
}

int cmd_plotdata(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto input = load_input(cfg);
    const auto timed = compute_matrix(cfg, input.table, err);
    const auto order = plot_order(timed.matrix, cfg.every);
    emit(cfg, out, [&](std::ostream& o) { write_plot_data(o, timed.matrix, input.table.names(), order); });
    return kSuccess;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool needs_input) {
    auto* input = sub->add_option("--input", cfg.input, "CSV file with a header row");
    if (needs_input) {
        input->required();
    }
    sub->add_option("--columns", cfg.columns, "Columns to analyse (default: all)")->delimiter(',');
    sub->add_option("--mode", cfg.mode, "exact, mc or keyed")
        ->check(CLI::IsMember({"exact", "mc", "keyed"}));
    sub->add_option("--permutations", cfg.permutations, "Monte Carlo permutations per subject")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "Monte Carlo / synthetic data seed");
    sub->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--leaf-threshold", cfg.leaf_threshold, "AD-tree leaf-list threshold");
    sub->add_option("--exact-limit", cfg.exact_limit, "Largest d for exact enumeration");
    sub->add_flag("--force-exact", cfg.force_exact, "Use exact mode even above the limit");
    sub->add_option("--output", cfg.output, "Output path, '-' for stdout");
    sub->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Uniqueness Shapley values for categorical data", "uniqshap"};
    app.require_subcommand(1, 1);

    auto* shapley = app.add_subcommand("shapley", "Per-subject values as CSV");
    add_common(shapley, cfg, true);

    auto* aggregate_cmd = app.add_subcommand("aggregate", "Mean values over a subject subset");
    add_common(aggregate_cmd, cfg, true);
    aggregate_cmd->add_option("--filter", cfg.filter, "col=level[,col=level...]; a|b for alternatives");

    auto* entropy_cmd = app.add_subcommand("entropy", "Marginal entropy and global value per variable");
    add_common(entropy_cmd, cfg, true);

    auto* benchmark = app.add_subcommand("benchmark", "AD-tree vs linear-scan counting");
    add_common(benchmark, cfg, false);
    benchmark->add_option("--naive-cutoff", cfg.naive_cutoff, "Skip the naive engine above this n");
    benchmark->add_option("--synthetic-rows", cfg.synthetic_rows, "Generate Zipf data instead of --input");
    benchmark->add_option("--synthetic-levels", cfg.synthetic_levels, "Level counts of synthetic columns")
        ->delimiter(',');
    benchmark->add_option("--skew", cfg.skew, "Zipf exponent of synthetic columns");

    auto* study = app.add_subcommand("coarsen-study", "Aggregated values under alternative coarsenings");
    add_common(study, cfg, true);
    study->add_option("--coarsen-map", cfg.coarsen_maps, "FILE[:FILE...]; header cell 1 names the column")
        ->required();
    study->add_option("--filter", cfg.filter, "Subject filter for the aggregation");

    auto* plot = app.add_subcommand("plotdata", "Per-subject values sorted by total");
    add_common(plot, cfg, true);
    plot->add_option("--every", cfg.every, "Keep every k-th subject")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInputError;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "shapley") {
            return cmd_shapley(cfg, out, err);
        }
        if (name == "aggregate") {
            return cmd_aggregate(cfg, out, err);
        }
        if (name == "entropy") {
            return cmd_entropy(cfg, out, err);
        }
        if (name == "benchmark") {
            return cmd_benchmark(cfg, out, err);
        }
        if (name == "coarsen-study") {
            return cmd_coarsen_study(cfg, out, err);
        }
        return cmd_plotdata(cfg, out, err);
    } catch (const CorrectnessFailure& e) {
        err << "error: " << e.what() << '\n';
        return kCorrectnessFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace uniqshap::cli
