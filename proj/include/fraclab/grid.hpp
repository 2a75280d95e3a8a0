#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fraclab/errors.hpp"

namespace fraclab {

// Branching factors of the nested subdivision of [0,1]^d, one per
// construction level, 1-based: levels[k-1] = N_k.  A level-n cube has side
// prod_{k<=n} 1/N_k and N_{n+1}^d children.
struct ScaleSequence {
    int d = 1;
    std::vector<int> levels;

    bool operator==(const ScaleSequence&) const = default;

    int max_depth() const { return static_cast<int>(levels.size()); }
    int branching(int level) const;                   // N_level, 1 <= level <= max_depth
    std::uint64_t children_per_node(int level) const; // N_level^d
    std::int64_t side_denominator(int level) const;   // prod_{k<=level} N_k, exact
    void validate() const;
};

// Path of per-level digit tuples; digits[k][axis] in [0, N_{k+1}).
struct CubeAddress {
    std::vector<std::vector<int>> digits;

    int level() const { return static_cast<int>(digits.size()); }
    bool operator==(const CubeAddress&) const = default;
    std::string str() const;  // "(a,b)(c,d)", "()" for the root
};

// Axis-aligned cube with exact rational corner: corner = corner_num/den,
// side = 1/den.
struct Box {
    std::vector<std::int64_t> corner_num;
    std::int64_t den = 1;
};

Box cube_box(const CubeAddress& addr, const ScaleSequence& scales);
std::vector<CubeAddress> children_addresses(const CubeAddress& addr, const ScaleSequence& scales);

// Row-major packing of a digit tuple; linear order == lexicographic tuple order.
std::uint32_t digit_tuple_to_linear(const std::vector<int>& tuple, int N);
std::vector<int> linear_to_digit_tuple(std::uint32_t linear, int N, int d);

// Finite-depth record of retained cubes.  Level 0 is the (always retained)
// root; nodes of each level are sorted by (parent, digit) so the children of
// a node form a contiguous range at the next level.  Immutable after
// construction apart from push_level; safe for concurrent reads.
class SurvivalTree {
public:
    struct Entry {
        std::uint32_t parent;  // index into the previous level (0 at level 1)
        std::uint32_t digit;   // linear child index within the parent

        bool operator==(const Entry&) const = default;
    };

    SurvivalTree() = default;
    explicit SurvivalTree(ScaleSequence scales);
    static SurvivalTree full(const ScaleSequence& scales, int depth);

    const ScaleSequence& scales() const { return scales_; }
    int dim() const { return scales_.d; }
    int depth() const { return static_cast<int>(levels_.size()); }
    std::size_t count(int level) const;
    std::uint64_t total_nodes() const;

    const Entry& entry(int level, std::size_t i) const;
    std::size_t parent_of(int level, std::size_t i) const;
    // children of node (level, i) as an index range into level+1
    std::pair<std::size_t, std::size_t> children(int level, std::size_t i) const;
    std::size_t child_count(int level, std::size_t i) const;

    CubeAddress address_of(int level, std::size_t i) const;
    std::optional<std::size_t> find(const CubeAddress& addr) const;
    Box box_of(int level, std::size_t i) const;

    // entries must be sorted by (parent, digit), digits unique per parent
    void push_level(std::vector<Entry> entries);

    bool operator==(const SurvivalTree&) const = default;

    // Stable text format (one line per level) used by the CLI and golden
    // tests; see README for the grammar.
    std::string serialize() const;
    static SurvivalTree deserialize(std::istream& in);
    static SurvivalTree deserialize_string(const std::string& text);

private:
    ScaleSequence scales_;
    std::vector<std::vector<Entry>> levels_;          // levels_[k] = nodes at level k+1
    std::vector<std::vector<std::size_t>> offsets_;   // offsets_[k][i..i+1) = children of (k, i)

    void rebuild_offsets(int level_index);
};

}  // namespace fraclab
