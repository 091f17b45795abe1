#include "uniqshap/report.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include <json.hpp>

#include "uniqshap/csv.hpp"

namespace uniqshap {

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) {
        return "nan";
    }
    return std::string(buf, end);
}

void write_matrix_csv(std::ostream& out, const ShapleyMatrix& matrix, const std::vector<std::string>& names) {
    const bool with_se = !matrix.std_errors.empty();
    csv::Record header{"subject_id"};
    header.insert(header.end(), names.begin(), names.end());
    if (with_se) {
        for (const auto& name : names) {
            header.push_back("se_" + name);
        }
    }
    csv::write_record(out, header);
    csv::Record record;
    for (std::size_t t = 0; t < matrix.n; ++t) {
        record.assign(1, std::to_string(t));
        for (std::size_t j = 0; j < matrix.d; ++j) {
            record.push_back(format_double(matrix.at(t, j)));
        }
        if (with_se) {
            for (std::size_t j = 0; j < matrix.d; ++j) {
                record.push_back(format_double(matrix.std_errors[t * matrix.d + j]));
            }
        }
        csv::write_record(out, record);
    }
}

void write_aggregate(std::ostream& out, const AggregateReport& report, OutputFormat format,
                     const std::string& filter_label) {
    const double pct = 100.0 * report.population_fraction;
    if (format == OutputFormat::json) {
        nlohmann::ordered_json doc;
        doc["filter"] = filter_label;
        doc["subject_count"] = report.subjects.size();
        doc["population_fraction"] = report.population_fraction;
        doc["population_pct"] = pct;
        doc["subjects"] = report.subjects;
        auto& vars = doc["variables"] = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < report.variables.size(); ++j) {
            vars.push_back({{"variable", report.variables[j]},
                            {"shapley_bits", report.shapley_bits[j]},
                            {"entropy_bits", report.entropy_bits[j]}});
        }
        out << doc.dump(2) << '\n';
        return;
    }
    csv::write_record(out, {"variable", "shapley_bits", "entropy_bits", "population_pct"});
    for (std::size_t j = 0; j < report.variables.size(); ++j) {
        csv::write_record(out, {report.variables[j], format_double(report.shapley_bits[j]),
                                format_double(report.entropy_bits[j]), format_double(pct)});
    }
}

void write_entropy_report(std::ostream& out, const std::vector<std::string>& names,
                          const std::vector<double>& entropy_bits, const std::vector<double>& shapley_bits) {
    csv::write_record(out, {"variable", "entropy_bits", "shapley_bits"});
    for (std::size_t j = 0; j < names.size(); ++j) {
        csv::write_record(out, {names[j], format_double(entropy_bits[j]), format_double(shapley_bits[j])});
    }
}

std::vector<std::size_t> plot_order(const ShapleyMatrix& matrix, std::size_t every) {
    if (every == 0) {
        every = 1;
    }
    std::vector<double> totals(matrix.n);
    for (std::size_t t = 0; t < matrix.n; ++t) {
        totals[t] = matrix.row_total(t);
    }
    std::vector<std::size_t> order(matrix.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return totals[a] < totals[b]; });
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < order.size(); k += every) {
        kept.push_back(order[k]);
    }
    return kept;
}

void write_plot_data(std::ostream& out, const ShapleyMatrix& matrix, const std::vector<std::string>& names,
                     const std::vector<std::size_t>& order) {
    csv::Record header{"subject_id"};
    header.insert(header.end(), names.begin(), names.end());
    header.push_back("total");
    csv::write_record(out, header);
    for (std::size_t t : order) {
        csv::Record record{std::to_string(t)};
        for (std::size_t j = 0; j < matrix.d; ++j) {
            record.push_back(format_double(matrix.at(t, j)));
        }
        record.push_back(format_double(matrix.row_total(t)));
        csv::write_record(out, record);
    }
}

void write_coarsen_study(std::ostream& out, const std::vector<std::string>& names,
                         const std::vector<CoarseningRow>& rows, OutputFormat format) {
    if (format == OutputFormat::json) {
        nlohmann::ordered_json doc = nlohmann::ordered_json::array();
        for (const auto& row : rows) {
            nlohmann::ordered_json values;
            for (std::size_t j = 0; j < names.size(); ++j) {
                values[names[j]] = row.shapley_bits[j];
            }
            doc.push_back({{"coarsening", row.label}, {"shapley_bits", values}});
        }
        out << doc.dump(2) << '\n';
        return;
    }
    csv::Record header{"coarsening"};
    header.insert(header.end(), names.begin(), names.end());
    csv::write_record(out, header);
    for (const auto& row : rows) {
        csv::Record record{row.label};
        for (double v : row.shapley_bits) {
            record.push_back(format_double(v));
        }
        csv::write_record(out, record);
    }
}

}  // namespace uniqshap
