#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "uniqshap/shapley.hpp"

namespace uniqshap {

enum class OutputFormat { csv, json };

/// Shortest decimal that round-trips the double.
std::string format_double(double value);

/// `subject_id,<var1>,...,<vard>`; Monte Carlo matrices get one extra
/// `se_<var>` column per variable.
void write_matrix_csv(std::ostream& out, const ShapleyMatrix& matrix, const std::vector<std::string>& names);

/// One row per variable: `variable,shapley_bits,entropy_bits,population_pct`.
void write_aggregate(std::ostream& out, const AggregateReport& report, OutputFormat format,
                     const std::string& filter_label = "");

/// `variable,entropy_bits,shapley_bits`.
void write_entropy_report(std::ostream& out, const std::vector<std::string>& names,
                          const std::vector<double>& entropy_bits, const std::vector<double>& shapley_bits);

/// Subjects ordered by total value (ties by index), keeping every k-th.
std::vector<std::size_t> plot_order(const ShapleyMatrix& matrix, std::size_t every);

/// `subject_id,<var1>,...,<vard>,total` for the given subject order.
void write_plot_data(std::ostream& out, const ShapleyMatrix& matrix, const std::vector<std::string>& names,
                     const std::vector<std::size_t>& order);

struct CoarseningRow {
    std::string label;
    std::vector<double> shapley_bits;
};

/// `coarsening,<var1>,...,<vard>`.
void write_coarsen_study(std::ostream& out, const std::vector<std::string>& names,
                         const std::vector<CoarseningRow>& rows, OutputFormat format);

}  // namespace uniqshap
