#include "uniqshap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <unordered_map>

#include "uniqshap/csv.hpp"

namespace uniqshap {

CategoricalTable::CategoricalTable(std::vector<std::string> names,
                                   std::vector<std::vector<std::string>> levels,
                                   std::vector<Code> codes)
    : d_(names.size()), names_(std::move(names)), levels_(std::move(levels)), codes_(std::move(codes)) {
    if (d_ == 0) {
        throw InputError("table needs at least one column");
    }
    if (levels_.size() != d_) {
        throw InputError("level dictionaries do not match column count");
    }
    if (codes_.empty() || codes_.size() % d_ != 0) {
        throw InputError("code matrix must hold a positive multiple of " + std::to_string(d_) + " cells");
    }
    n_ = codes_.size() / d_;
    for (std::size_t j = 0; j < d_; ++j) {
        if (levels_[j].empty()) {
            throw InputError("column '" + names_[j] + "' has no levels");
        }
        std::set<std::string> seen(levels_[j].begin(), levels_[j].end());
        if (seen.size() != levels_[j].size()) {
            throw InputError("column '" + names_[j] + "' has duplicate levels");
        }
    }
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < d_; ++j) {
            if (code(i, j) >= levels_[j].size()) {
                throw InputError("code out of range at row " + std::to_string(i) + ", column '" +
                                 names_[j] + "'");
            }
        }
    }
}

CategoricalTable CategoricalTable::from_rows(std::vector<std::string> names,
                                             const std::vector<std::vector<std::string>>& rows) {
    const std::size_t d = names.size();
    std::vector<std::vector<std::string>> levels(d);
    std::vector<std::unordered_map<std::string, Code>> lookup(d);
    std::vector<Code> codes;
    codes.reserve(rows.size() * d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) {
            throw InputError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                             " fields, expected " + std::to_string(d));
        }
        for (std::size_t j = 0; j < d; ++j) {
            auto [it, inserted] = lookup[j].try_emplace(rows[i][j], static_cast<Code>(levels[j].size()));
            if (inserted) {
                levels[j].push_back(rows[i][j]);
            }
            codes.push_back(it->second);
        }
    }
    return CategoricalTable(std::move(names), std::move(levels), std::move(codes));
}

std::optional<std::size_t> CategoricalTable::column_index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - names_.begin());
}

std::optional<Code> CategoricalTable::level_code(std::size_t col, const std::string& level) const {
    const auto& lv = levels_.at(col);
    auto it = std::find(lv.begin(), lv.end(), level);
    if (it == lv.end()) {
        return std::nullopt;
    }
    return static_cast<Code>(it - lv.begin());
}

CategoricalTable CategoricalTable::select_columns(const std::vector<std::string>& names) const {
    std::vector<std::size_t> picks;
    for (const auto& name : names) {
        auto col = column_index(name);
        if (!col) {
            throw InputError("missing column '" + name + "'");
        }
        picks.push_back(*col);
    }
    std::vector<std::vector<std::string>> rows(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        rows[i].reserve(picks.size());
        for (std::size_t j : picks) {
            rows[i].push_back(raw(i, j));
        }
    }
    return from_rows(names, rows);
}

SubjectSet::SubjectSet(std::vector<std::size_t> indices, std::size_t n) : indices_(std::move(indices)) {
    std::sort(indices_.begin(), indices_.end());
    if (indices_.empty()) {
        throw InputError("subject set must not be empty");
    }
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
        throw InputError("subject set has duplicate indices");
    }
    if (indices_.back() >= n) {
        throw InputError("subject index " + std::to_string(indices_.back()) + " out of range for n=" +
                         std::to_string(n));
    }
}

SubjectSet SubjectSet::all(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) {
        idx[i] = i;
    }
    return SubjectSet(std::move(idx), n);
}

std::vector<std::vector<std::string>> read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open input file: " + path.string());
    }
    std::vector<csv::Record> records;
    try {
        records = csv::parse(in);
    } catch (const std::runtime_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    if (records.empty()) {
        throw InputError(path.string() + ": missing header row");
    }
    // A lone empty field is a blank line unless the file has a single column.
    if (records.front().size() > 1) {
        std::erase_if(records, [](const csv::Record& r) { return r.size() == 1 && r[0].empty(); });
    }
    const std::size_t width = records.front().size();
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].size() != width) {
            // Row numbers count the header as row 1.
            throw InputError(path.string() + ": ragged row " + std::to_string(i + 1) + " has " +
                             std::to_string(records[i].size()) + " fields, header has " +
                             std::to_string(width));
        }
    }
    return records;
}

CategoricalTable ingest_csv(const std::filesystem::path& path, const std::vector<std::string>& selected) {
    auto records = read_csv_file(path);
    const auto& header = records.front();
    if (records.size() < 2) {
        throw InputError(path.string() + ": no data rows");
    }
    std::vector<std::size_t> picks;
    if (selected.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            picks.push_back(j);
        }
    } else {
        for (const auto& name : selected) {
            auto it = std::find(header.begin(), header.end(), name);
            if (it == header.end()) {
                throw InputError(path.string() + ": missing column '" + name + "'");
            }
            picks.push_back(static_cast<std::size_t>(it - header.begin()));
        }
    }
    std::vector<std::string> names;
    for (std::size_t j : picks) {
        names.push_back(header[j]);
    }
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size() - 1);
    for (std::size_t i = 1; i < records.size(); ++i) {
        std::vector<std::string> row;
        row.reserve(picks.size());
        for (std::size_t j : picks) {
            row.push_back(std::move(records[i][j]));
        }
        rows.push_back(std::move(row));
    }
    return CategoricalTable::from_rows(std::move(names), rows);
}

CoarseningMap load_coarsening_map(const std::filesystem::path& path, const CategoricalTable& table) {
    auto records = read_csv_file(path);
    if (records.front().size() != 2) {
        throw InputError(path.string() + ": coarsening map needs exactly two columns");
    }
    const std::string& column_name = records.front()[0];
    auto col = table.column_index(column_name);
    if (!col) {
        throw InputError(path.string() + ": coarsening map names unknown column '" + column_name + "'");
    }
    CoarseningMap map;
    map.column = *col;
    for (std::size_t i = 1; i < records.size(); ++i) {
        auto [it, inserted] = map.mapping.emplace(records[i][0], records[i][1]);
        if (!inserted && it->second != records[i][1]) {
            throw InputError(path.string() + ": level '" + records[i][0] + "' mapped twice");
        }
    }
    return map;
}

CategoricalTable coarsen(const CategoricalTable& table, const CoarseningMap& map) {
    if (map.column >= table.cols()) {
        throw InputError("coarsening column index out of range");
    }
    const std::size_t col = map.column;
    std::vector<Code> old_to_new(table.level_count(col));
    std::vector<std::string> buckets;
    std::unordered_map<std::string, Code> bucket_code;
    // Buckets are numbered by first appearance in row order, matching ingest.
    std::vector<bool> seen(table.level_count(col), false);
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const Code old = table.code(i, col);
        if (seen[old]) {
            continue;
        }
        seen[old] = true;
        const std::string& level = table.levels(col)[old];
        auto it = map.mapping.find(level);
        if (it == map.mapping.end()) {
            throw InputError("coarsening map for column '" + table.name(col) + "' has no bucket for level '" +
                             level + "'");
        }
        auto [b, inserted] = bucket_code.try_emplace(it->second, static_cast<Code>(buckets.size()));
        if (inserted) {
            buckets.push_back(it->second);
        }
        old_to_new[old] = b->second;
    }
    for (std::size_t k = 0; k < table.level_count(col); ++k) {
        if (!seen[k] && !map.mapping.contains(table.levels(col)[k])) {
            throw InputError("coarsening map for column '" + table.name(col) + "' has no bucket for level '" +
                             table.levels(col)[k] + "'");
        }
    }

    std::vector<std::vector<std::string>> levels;
    for (std::size_t j = 0; j < table.cols(); ++j) {
        levels.push_back(j == col ? buckets : table.levels(j));
    }
    std::vector<Code> codes(table.codes().begin(), table.codes().end());
    for (std::size_t i = 0; i < table.rows(); ++i) {
        Code& c = codes[i * table.cols() + col];
        c = old_to_new[c];
    }
    return CategoricalTable(table.names(), std::move(levels), std::move(codes));
}

CategoricalTable synth_product(const std::vector<std::size_t>& level_counts, std::size_t replication) {
    if (level_counts.empty()) {
        throw InputError("synth_product needs at least one column");
    }
    if (replication == 0) {
        throw InputError("replication must be >= 1");
    }
    std::size_t cells = 1;
    for (std::size_t k : level_counts) {
        if (k == 0) {
            throw InputError("level counts must be >= 1");
        }
        if (cells > std::numeric_limits<std::size_t>::max() / k) {
            throw InputError("synth_product row count overflows");
        }
        cells *= k;
    }
    if (cells > std::numeric_limits<std::size_t>::max() / replication) {
        throw InputError("synth_product row count overflows");
    }
    const std::size_t d = level_counts.size();
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> levels(d);
    for (std::size_t j = 0; j < d; ++j) {
        names.push_back("x" + std::to_string(j + 1));
        for (std::size_t k = 0; k < level_counts[j]; ++k) {
            levels[j].push_back(std::to_string(k));
        }
    }
    std::vector<Code> codes;
    codes.reserve(cells * replication * d);
    std::vector<Code> digits(d, 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        for (std::size_t r = 0; r < replication; ++r) {
            codes.insert(codes.end(), digits.begin(), digits.end());
        }
        for (std::size_t j = d; j-- > 0;) {
            if (++digits[j] < level_counts[j]) {
                break;
            }
            digits[j] = 0;
        }
    }
    return CategoricalTable(std::move(names), std::move(levels), std::move(codes));
}

CategoricalTable synth_zipf(std::size_t n, const std::vector<std::size_t>& level_counts, double exponent,
                            std::uint64_t seed) {
    if (n == 0 || level_counts.empty()) {
        throw InputError("synth_zipf needs n >= 1 and at least one column");
    }
    const std::size_t d = level_counts.size();
    std::mt19937_64 rng(seed);
    std::vector<std::discrete_distribution<Code>> dists;
    for (std::size_t k : level_counts) {
        if (k == 0) {
            throw InputError("level counts must be >= 1");
        }
        std::vector<double> w(k);
        for (std::size_t l = 0; l < k; ++l) {
            w[l] = 1.0 / std::pow(static_cast<double>(l + 1), exponent);
        }
        dists.emplace_back(w.begin(), w.end());
    }
    std::vector<std::string> names;
    for (std::size_t j = 0; j < d; ++j) {
        names.push_back("x" + std::to_string(j + 1));
    }
    std::vector<std::vector<std::string>> rows(n, std::vector<std::string>(d));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            rows[i][j] = std::to_string(dists[j](rng));
        }
    }
    return CategoricalTable::from_rows(std::move(names), rows);
}

SubjectFilter SubjectFilter::parse(const std::string& expression) {
    SubjectFilter filter;
    std::size_t start = 0;
    while (start <= expression.size()) {
        std::size_t end = expression.find(',', start);
        if (end == std::string::npos) {
            end = expression.size();
        }
        std::string term = expression.substr(start, end - start);
        auto eq = term.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw InputError("filter term '" + term + "' is not of the form column=level");
        }
        Term t{term.substr(0, eq), {}};
        std::string rest = term.substr(eq + 1);
        std::size_t from = 0;
        while (true) {
            auto bar = rest.find('|', from);
            t.levels.push_back(rest.substr(from, bar == std::string::npos ? std::string::npos : bar - from));
            if (bar == std::string::npos) {
                break;
            }
            from = bar + 1;
        }
        filter.terms.push_back(std::move(t));
        start = end + 1;
    }
    return filter;
}

std::string SubjectFilter::to_string() const {
    std::string out;
    for (const auto& term : terms) {
        if (!out.empty()) {
            out += ',';
        }
        out += term.column + "=";
        for (std::size_t k = 0; k < term.levels.size(); ++k) {
            out += (k > 0 ? "|" : "") + term.levels[k];
        }
    }
    return out;
}

SubjectSet select_subjects(const CategoricalTable& table, const SubjectFilter& filter) {
    // Per term: column index and acceptance flag per level code.
    std::vector<std::pair<std::size_t, std::vector<bool>>> tests;
    for (const auto& term : filter.terms) {
        auto col = table.column_index(term.column);
        if (!col) {
            throw InputError("filter column '" + term.column + "' does not exist");
        }
        std::vector<bool> accept(table.level_count(*col), false);
        for (const auto& level : term.levels) {
            if (auto code = table.level_code(*col, level)) {
                accept[*code] = true;
            }
        }
        tests.emplace_back(*col, std::move(accept));
    }
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        bool ok = std::all_of(tests.begin(), tests.end(),
                              [&](const auto& t) { return t.second[table.code(i, t.first)]; });
        if (ok) {
            hits.push_back(i);
        }
    }
    if (hits.empty()) {
        throw InputError("filter '" + filter.to_string() + "' selects no subjects");
    }
    return SubjectSet(std::move(hits), table.rows());
}

}  // namespace uniqshap
