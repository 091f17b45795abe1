#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "uniqshap/dataset.hpp"
#include "uniqshap/variable_subset.hpp"

namespace uniqshap {

/// Values for the members of a VariableSubset, kept sorted by variable.
class PartialAssignment {
public:
    struct Term {
        std::size_t var;
        Code level;
    };

    PartialAssignment() = default;
    /// Terms need not be sorted; duplicates are rejected.
    explicit PartialAssignment(std::vector<Term> terms);

    /// The values subject t takes on the variables in u.
    static PartialAssignment for_subject(const CategoricalTable& table, std::size_t t, VariableSubset u);

    std::span<const Term> terms() const { return terms_; }
    VariableSubset subset() const;

private:
    std::vector<Term> terms_;
};

/// Counters filled by ADTree::count when requested.
struct QueryStats {
    std::uint64_t node_visits = 0;
    std::uint64_t leaf_rows_scanned = 0;
};

class TreeBuildError : public std::runtime_error {
public:
    TreeBuildError(const std::string& what, std::size_t nodes_built)
        : std::runtime_error(what), nodes_built_(nodes_built) {}
    std::size_t nodes_built() const { return nodes_built_; }

private:
    std::size_t nodes_built_;
};

/// All-dimension tree over a CategoricalTable (Moore & Lee, 1998).
///
/// Every AD-node stores the number of rows matching the conjunction on the
/// path from the root. An AD-node whose path last branched on variable a owns
/// one vary-node for each variable b > a; each vary-node has one child per
/// level of b, except the most common value (MCV), whose child is pruned and
/// recovered by subtraction at query time. AD-nodes with count at or below
/// the leaf threshold keep their row indices instead of a subtree.
///
/// Immutable after construction; concurrent count() calls are safe.
class ADTree {
public:
    static constexpr std::size_t kDefaultLeafThreshold = 16;

    ADTree(const CategoricalTable& table, std::size_t leaf_threshold = kDefaultLeafThreshold);

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return d_; }
    std::size_t leaf_threshold() const { return leaf_threshold_; }
    std::uint64_t table_hash() const { return table_hash_; }

    /// Exact number of rows matching the assignment.
    std::int64_t count(const PartialAssignment& a, QueryStats* stats = nullptr) const;

    /// Cohort cardinality N_t(u) of the subject t the tree was built from.
    std::int64_t cohort_size(std::size_t t, VariableSubset u, QueryStats* stats = nullptr) const;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t vary_node_count() const { return vary_.size(); }
    std::size_t leaf_list_rows() const { return leaf_rows_.size(); }

    /// Walks the whole tree and throws std::logic_error on the first violated
    /// structural invariant.
    void validate() const;

    /// Binary cache. `load` rejects files built from a different table.
    void save(std::ostream& out) const;
    static ADTree load(std::istream& in, const CategoricalTable& table);

private:
    struct Node {
        std::int64_t count = 0;
        std::uint32_t start_var = 0;   // first variable this node may branch on
        std::uint32_t first = 0;       // vary_ index, or leaf_rows_ index for leaves
        std::uint32_t leaf_size = 0;
        bool leaf = false;
    };
    struct VaryNode {
        std::uint32_t var = 0;
        Code mcv = 0;
        std::uint32_t first_child = 0;  // into children_, one slot per level of var
    };
    static constexpr std::int32_t kNoChild = -1;

    ADTree() = default;
    std::uint32_t build_node(std::vector<std::uint32_t>& rows, std::uint32_t start_var);
    std::int64_t count_from(std::uint32_t node, std::span<const PartialAssignment::Term> terms,
                            QueryStats* stats) const;
    std::int64_t matching_rows(std::span<const PartialAssignment::Term> path) const;
    void validate_node(std::uint32_t node, std::vector<PartialAssignment::Term>& path) const;

    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::size_t leaf_threshold_ = kDefaultLeafThreshold;
    std::uint64_t table_hash_ = 0;
    std::vector<Code> codes_;          // row-major copy of the table codes
    std::vector<std::uint32_t> arity_; // level count per column
    std::vector<Node> nodes_;
    std::vector<VaryNode> vary_;
    std::vector<std::int32_t> children_;
    std::vector<std::uint32_t> leaf_rows_;
};

/// Linear-scan cohort cardinality: rows equal to row t on every variable in u.
std::int64_t naive_count(const CategoricalTable& table, std::size_t t, VariableSubset u);

/// FNV-1a digest of names, level dictionaries and codes.
std::uint64_t content_hash(const CategoricalTable& table);

}  // namespace uniqshap
