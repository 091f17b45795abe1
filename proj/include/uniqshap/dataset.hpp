#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uniqshap {

using Code = std::uint32_t;

/// Raised for malformed input files and invalid arguments coming from users.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// n x d matrix of integer level codes with per-column level dictionaries.
/// Immutable once built; safe to share between threads.
class CategoricalTable {
public:
    /// Validates every invariant: n, d >= 1, codes in range, levels unique.
    CategoricalTable(std::vector<std::string> names, std::vector<std::vector<std::string>> levels,
                     std::vector<Code> codes);

    /// Encode raw string rows, assigning codes in order of first appearance.
    static CategoricalTable from_rows(std::vector<std::string> names,
                                      const std::vector<std::vector<std::string>>& rows);

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return d_; }

    Code code(std::size_t row, std::size_t col) const { return codes_[row * d_ + col]; }
    std::span<const Code> row(std::size_t i) const { return {codes_.data() + i * d_, d_}; }
    std::span<const Code> codes() const { return codes_; }

    const std::string& name(std::size_t col) const { return names_[col]; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<std::string>& levels(std::size_t col) const { return levels_[col]; }
    std::size_t level_count(std::size_t col) const { return levels_[col].size(); }
    const std::string& raw(std::size_t row, std::size_t col) const {
        return levels_[col][code(row, col)];
    }

    /// Index of the named column, or nullopt.
    std::optional<std::size_t> column_index(const std::string& name) const;
    std::optional<Code> level_code(std::size_t col, const std::string& level) const;

    /// Table restricted to the named columns, in the given order.
    CategoricalTable select_columns(const std::vector<std::string>& names) const;

    friend bool operator==(const CategoricalTable&, const CategoricalTable&) = default;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<std::string> names_;
    std::vector<std::vector<std::string>> levels_;
    std::vector<Code> codes_;  // row-major
};

/// Sorted, duplicate-free, non-empty set of subject (row) indices.
class SubjectSet {
public:
    SubjectSet(std::vector<std::size_t> indices, std::size_t n);

    static SubjectSet all(std::size_t n);

    std::size_t size() const { return indices_.size(); }
    const std::vector<std::size_t>& indices() const { return indices_; }
    auto begin() const { return indices_.begin(); }
    auto end() const { return indices_.end(); }

private:
    std::vector<std::size_t> indices_;
};

/// Replacement of the levels of one column by bucket labels.
struct CoarseningMap {
    std::size_t column = 0;
    std::map<std::string, std::string> mapping;
};

/// Read a CSV file and encode the selected columns (all columns when
/// `selected` is empty). Empty cells become the level "".
CategoricalTable ingest_csv(const std::filesystem::path& path,
                            const std::vector<std::string>& selected = {});

/// Read all columns of a CSV file as raw strings, header first.
std::vector<std::vector<std::string>> read_csv_file(const std::filesystem::path& path);

/// Load a two-column `old_level,new_bucket` file. The first cell of the header
/// row names the column of `table` the map applies to.
CoarseningMap load_coarsening_map(const std::filesystem::path& path, const CategoricalTable& table);

CategoricalTable coarsen(const CategoricalTable& table, const CoarseningMap& map);

/// Full factorial design over `level_counts`, each cell repeated `replication`
/// times. Columns are named x1..xd and levels "0".."k-1"; the last column
/// varies fastest.
CategoricalTable synth_product(const std::vector<std::size_t>& level_counts, std::size_t replication);

/// Independent columns with Zipf-distributed levels (P(level k) ~ 1/(k+1)^exponent).
/// Deterministic for a given seed.
CategoricalTable synth_zipf(std::size_t n, const std::vector<std::size_t>& level_counts,
                            double exponent, std::uint64_t seed);

/// Conjunction of column=level tests, parsed from "col=level[,col=level...]".
/// A term may list alternatives as "col=a|b", matching either level.
struct SubjectFilter {
    struct Term {
        std::string column;
        std::vector<std::string> levels;
    };
    std::vector<Term> terms;

    static SubjectFilter parse(const std::string& expression);
    std::string to_string() const;
};

/// Rows satisfying every term. Throws InputError for unknown columns and when
/// nothing matches.
SubjectSet select_subjects(const CategoricalTable& table, const SubjectFilter& filter);

}  // namespace uniqshap
