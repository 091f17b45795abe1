#include <istream>
#include <ostream>
#include <string_view>

#include "uniqshap/adtree.hpp"

namespace uniqshap {

namespace {

constexpr char kMagic[8] = {'U', 'Q', 'A', 'D', 'T', 'R', 'E', 'E'};
constexpr std::uint32_t kFormatVersion = 1;

class Fnv1a {
public:
    void bytes(const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            hash_ = (hash_ ^ p[i]) * 1099511628211ULL;
        }
    }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void str(std::string_view s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 14695981039346656037ULL;
};

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
    put<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw InputError("AD-tree cache is truncated");
    }
    return v;
}

template <typename T>
std::vector<T> get_vec(std::istream& in) {
    const auto size = get<std::uint64_t>(in);
    if (size > (std::uint64_t{1} << 40) / sizeof(T)) {
        throw InputError("AD-tree cache has an implausible section size");
    }
    std::vector<T> v(size);
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(size * sizeof(T)))) {
        throw InputError("AD-tree cache is truncated");
    }
    return v;
}

}  // namespace

std::uint64_t content_hash(const CategoricalTable& table) {
    Fnv1a h;
    h.u64(table.rows());
    h.u64(table.cols());
    for (std::size_t j = 0; j < table.cols(); ++j) {
        h.str(table.name(j));
        h.u64(table.level_count(j));
        for (const auto& level : table.levels(j)) {
            h.str(level);
        }
    }
    h.bytes(table.codes().data(), table.codes().size_bytes());
    return h.value();
}

// Layout: magic, version, hash, n, d, leaf threshold, then length-prefixed
// node, vary-node, child-slot and leaf-row arrays in host byte order.
void ADTree::save(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    put(out, kFormatVersion);
    put<std::uint64_t>(out, table_hash_);
    put<std::uint64_t>(out, n_);
    put<std::uint64_t>(out, d_);
    put<std::uint64_t>(out, leaf_threshold_);
    put_vec(out, nodes_);
    put_vec(out, vary_);
    put_vec(out, children_);
    put_vec(out, leaf_rows_);
    if (!out) {
        throw std::runtime_error("failed writing AD-tree cache");
    }
}

ADTree ADTree::load(std::istream& in, const CategoricalTable& table) {
    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::string_view(magic, sizeof magic) !=
                                             std::string_view(kMagic, sizeof kMagic)) {
        throw InputError("not an AD-tree cache file");
    }
    if (get<std::uint32_t>(in) != kFormatVersion) {
        throw InputError("unsupported AD-tree cache version");
    }
    ADTree tree;
    tree.table_hash_ = get<std::uint64_t>(in);
    if (tree.table_hash_ != content_hash(table)) {
        throw InputError("AD-tree cache was built from a different table");
    }
    tree.n_ = get<std::uint64_t>(in);
    tree.d_ = get<std::uint64_t>(in);
    tree.leaf_threshold_ = get<std::uint64_t>(in);
    if (tree.n_ != table.rows() || tree.d_ != table.cols()) {
        throw InputError("AD-tree cache shape does not match the table");
    }
    tree.nodes_ = get_vec<Node>(in);
    tree.vary_ = get_vec<VaryNode>(in);
    tree.children_ = get_vec<std::int32_t>(in);
    tree.leaf_rows_ = get_vec<std::uint32_t>(in);
    if (tree.nodes_.empty()) {
        throw InputError("AD-tree cache has no nodes");
    }
    tree.codes_.assign(table.codes().begin(), table.codes().end());
    for (std::size_t j = 0; j < table.cols(); ++j) {
        tree.arity_.push_back(static_cast<std::uint32_t>(table.level_count(j)));
    }
    return tree;
}

}  // namespace uniqshap
