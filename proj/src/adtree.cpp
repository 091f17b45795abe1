#include "uniqshap/adtree.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <new>
#include <string>

namespace uniqshap {

PartialAssignment::PartialAssignment(std::vector<Term> terms) : terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    for (std::size_t k = 1; k < terms_.size(); ++k) {
        if (terms_[k].var == terms_[k - 1].var) {
            throw std::invalid_argument("variable " + std::to_string(terms_[k].var) +
                                        " assigned twice");
        }
    }
}

PartialAssignment PartialAssignment::for_subject(const CategoricalTable& table, std::size_t t,
                                                 VariableSubset u) {
    std::vector<Term> terms;
    for (std::size_t j : u.members()) {
        terms.push_back({j, table.code(t, j)});
    }
    return PartialAssignment(std::move(terms));
}

VariableSubset PartialAssignment::subset() const {
    VariableSubset u;
    for (const auto& term : terms_) {
        u = u.with(term.var);
    }
    return u;
}

ADTree::ADTree(const CategoricalTable& table, std::size_t leaf_threshold)
    : n_(table.rows()),
      d_(table.cols()),
      leaf_threshold_(leaf_threshold),
      table_hash_(content_hash(table)),
      codes_(table.codes().begin(), table.codes().end()) {
    if (d_ > kMaxVariables) {
        throw InputError("AD-tree supports at most " + std::to_string(kMaxVariables) + " variables");
    }
    if (n_ > std::numeric_limits<std::uint32_t>::max()) {
        throw InputError("AD-tree row indices are limited to 32 bits");
    }
    for (std::size_t j = 0; j < d_; ++j) {
        arity_.push_back(static_cast<std::uint32_t>(table.level_count(j)));
    }
    std::vector<std::uint32_t> rows(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        rows[i] = static_cast<std::uint32_t>(i);
    }
    try {
        build_node(rows, 0);
    } catch (const std::bad_alloc&) {
        throw TreeBuildError("out of memory building AD-tree after " + std::to_string(nodes_.size()) +
                                 " nodes",
                             nodes_.size());
    }
}

std::uint32_t ADTree::build_node(std::vector<std::uint32_t>& rows, std::uint32_t start_var) {
    if (nodes_.size() >= static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
        throw TreeBuildError("AD-tree node index space exhausted", nodes_.size());
    }
    const auto self = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({static_cast<std::int64_t>(rows.size()), start_var, 0, 0, false});

    if (rows.size() <= leaf_threshold_) {
        std::sort(rows.begin(), rows.end());
        nodes_[self].leaf = true;
        nodes_[self].first = static_cast<std::uint32_t>(leaf_rows_.size());
        nodes_[self].leaf_size = static_cast<std::uint32_t>(rows.size());
        leaf_rows_.insert(leaf_rows_.end(), rows.begin(), rows.end());
        return self;
    }

    const auto first_vary = static_cast<std::uint32_t>(vary_.size());
    nodes_[self].first = first_vary;
    vary_.resize(vary_.size() + (d_ - start_var));

    std::vector<std::vector<std::uint32_t>> buckets;
    for (std::uint32_t var = start_var; var < d_; ++var) {
        const std::uint32_t arity = arity_[var];
        buckets.assign(arity, {});
        for (std::uint32_t i : rows) {
            buckets[codes_[std::size_t{i} * d_ + var]].push_back(i);
        }
        Code mcv = 0;
        for (Code k = 1; k < arity; ++k) {
            if (buckets[k].size() > buckets[mcv].size()) {
                mcv = k;
            }
        }
        const auto first_child = static_cast<std::uint32_t>(children_.size());
        children_.resize(children_.size() + arity, kNoChild);
        vary_[first_vary + (var - start_var)] = {var, mcv, first_child};

        // Recursion appends to children_, so write slots by index afterwards.
        std::vector<std::vector<std::uint32_t>> local = std::move(buckets);
        for (Code k = 0; k < arity; ++k) {
            if (k == mcv || local[k].empty()) {
                continue;
            }
            const std::uint32_t child = build_node(local[k], var + 1);
            children_[first_child + k] = static_cast<std::int32_t>(child);
            std::vector<std::uint32_t>().swap(local[k]);
        }
        buckets.clear();
    }
    return self;
}

std::int64_t ADTree::count(const PartialAssignment& a, QueryStats* stats) const {
    for (const auto& term : a.terms()) {
        if (term.var >= d_ || term.level >= arity_[term.var]) {
            throw std::out_of_range("assignment references an unknown variable or level");
        }
    }
    return count_from(0, a.terms(), stats);
}

std::int64_t ADTree::cohort_size(std::size_t t, VariableSubset u, QueryStats* stats) const {
    std::array<PartialAssignment::Term, kMaxVariables> buf;
    std::size_t k = 0;
    for (std::uint64_t m = u.mask(); m != 0; m &= m - 1) {
        const auto j = static_cast<std::size_t>(std::countr_zero(m));
        buf[k++] = {j, codes_[t * d_ + j]};
    }
    return count_from(0, std::span<const PartialAssignment::Term>(buf.data(), k), stats);
}

std::int64_t ADTree::count_from(std::uint32_t node_index, std::span<const PartialAssignment::Term> terms,
                                QueryStats* stats) const {
    if (stats != nullptr) {
        ++stats->node_visits;
    }
    const Node& node = nodes_[node_index];
    if (terms.empty()) {
        return node.count;
    }
    if (node.leaf) {
        std::int64_t hits = 0;
        for (std::uint32_t k = 0; k < node.leaf_size; ++k) {
            const Code* row = &codes_[std::size_t{leaf_rows_[node.first + k]} * d_];
            bool match = true;
            for (const auto& term : terms) {
                if (row[term.var] != term.level) {
                    match = false;
                    break;
                }
            }
            hits += match ? 1 : 0;
        }
        if (stats != nullptr) {
            stats->leaf_rows_scanned += node.leaf_size;
        }
        return hits;
    }

    const auto& [var, level] = terms.front();
    const VaryNode& vary = vary_[node.first + (var - node.start_var)];
    const auto rest = terms.subspan(1);
    if (level != vary.mcv) {
        const std::int32_t child = children_[vary.first_child + level];
        return child == kNoChild ? 0 : count_from(static_cast<std::uint32_t>(child), rest, stats);
    }
    // MCV child is pruned: everything matching `rest` here minus the siblings.
    std::int64_t total = count_from(node_index, rest, stats);
    for (Code k = 0; k < arity_[var]; ++k) {
        const std::int32_t child = children_[vary.first_child + k];
        if (k != vary.mcv && child != kNoChild) {
            total -= count_from(static_cast<std::uint32_t>(child), rest, stats);
        }
    }
    return total;
}

std::int64_t ADTree::matching_rows(std::span<const PartialAssignment::Term> path) const {
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < n_; ++i) {
        hits += std::all_of(path.begin(), path.end(),
                            [&](const auto& term) { return codes_[i * d_ + term.var] == term.level; });
    }
    return hits;
}

void ADTree::validate() const {
    if (nodes_.empty() || nodes_[0].count != static_cast<std::int64_t>(n_)) {
        throw std::logic_error("root count differs from row count");
    }
    std::vector<PartialAssignment::Term> path;
    validate_node(0, path);
}

void ADTree::validate_node(std::uint32_t node_index, std::vector<PartialAssignment::Term>& path) const {
    const Node& node = nodes_[node_index];
    auto fail = [&](const std::string& what) {
        throw std::logic_error("AD-tree node " + std::to_string(node_index) + ": " + what);
    };
    if (node.count < 1) {
        fail("non-positive count");
    }
    if (node.count != matching_rows(path)) {
        fail("count disagrees with a scan of the data");
    }
    if (node.leaf) {
        if (node.leaf_size != static_cast<std::uint64_t>(node.count)) {
            fail("leaf-list length differs from count");
        }
        if (node.count > static_cast<std::int64_t>(leaf_threshold_)) {
            fail("leaf-list above threshold");
        }
        return;
    }
    for (std::uint32_t var = node.start_var; var < d_; ++var) {
        const VaryNode& vary = vary_[node.first + (var - node.start_var)];
        if (vary.var != var) {
            fail("vary-nodes out of canonical order");
        }
        if (children_[vary.first_child + vary.mcv] != kNoChild) {
            fail("MCV child not pruned");
        }
        std::int64_t present = 0;
        std::int64_t largest = 0;
        for (Code k = 0; k < arity_[var]; ++k) {
            const std::int32_t child = children_[vary.first_child + k];
            if (child == kNoChild) {
                continue;
            }
            const std::int64_t c = nodes_[static_cast<std::size_t>(child)].count;
            present += c;
            largest = std::max(largest, c);
            path.push_back({var, k});
            validate_node(static_cast<std::uint32_t>(child), path);
            path.pop_back();
        }
        const std::int64_t mcv_count = node.count - present;
        if (mcv_count < largest || mcv_count < 1) {
            fail("MCV count recovered by subtraction is not the largest");
        }
        path.push_back({var, vary.mcv});
        if (mcv_count != matching_rows(path)) {
            fail("MCV count recovered by subtraction disagrees with a scan");
        }
        path.pop_back();
    }
}

std::int64_t naive_count(const CategoricalTable& table, std::size_t t, VariableSubset u) {
    if (t >= table.rows()) {
        throw std::out_of_range("subject index out of range");
    }
    const auto members = u.members();
    const auto target = table.row(t);
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < table.rows(); ++i) {
        const auto row = table.row(i);
        bool match = true;
        for (std::size_t j : members) {
            if (row[j] != target[j]) {
                match = false;
                break;
            }
        }
        hits += match ? 1 : 0;
    }
    return hits;
}

}  // namespace uniqshap
