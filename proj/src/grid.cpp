#include "fraclab/grid.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

namespace fraclab {

int ScaleSequence::branching(int level) const {
    if (level < 1 || level > max_depth())
        throw ScaleError("no branching factor configured for level " + std::to_string(level));
    return levels[static_cast<std::size_t>(level) - 1];
}

std::uint64_t ScaleSequence::children_per_node(int level) const {
    std::uint64_t n = 1;
    const auto b = static_cast<std::uint64_t>(branching(level));
    for (int axis = 0; axis < d; ++axis) {
        if (n > UINT64_MAX / b) throw Error("children_per_node overflow");
        n *= b;
    }
    return n;
}

std::int64_t ScaleSequence::side_denominator(int level) const {
    if (level < 0 || level > max_depth())
        throw ScaleError("side_denominator: level out of range");
    std::int64_t den = 1;
    for (int k = 1; k <= level; ++k) {
        const std::int64_t b = levels[static_cast<std::size_t>(k) - 1];
        if (__builtin_mul_overflow(den, b, &den))
            throw Error("side_denominator overflow at level " + std::to_string(k));
    }
    return den;
}

void ScaleSequence::validate() const {
    if (d < 1) throw DomainError("spatial dimension must be >= 1");
    for (int n : levels)
        if (n < 2) throw DomainError("all branching factors must be >= 2");
}

std::string CubeAddress::str() const {
    if (digits.empty()) return "()";
    std::string out;
    for (const auto& tuple : digits) {
        out += '(';
        for (std::size_t i = 0; i < tuple.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(tuple[i]);
        }
        out += ')';
    }
    return out;
}

std::uint32_t digit_tuple_to_linear(const std::vector<int>& tuple, int N) {
    std::uint64_t lin = 0;
    for (int t : tuple) {
        if (t < 0 || t >= N) throw InvalidAddress("digit out of range");
        lin = lin * static_cast<std::uint64_t>(N) + static_cast<std::uint64_t>(t);
    }
    if (lin > UINT32_MAX) throw InvalidAddress("linear digit overflow");
    return static_cast<std::uint32_t>(lin);
}

std::vector<int> linear_to_digit_tuple(std::uint32_t linear, int N, int d) {
    std::vector<int> tuple(static_cast<std::size_t>(d));
    std::uint64_t lin = linear;
    for (int axis = d - 1; axis >= 0; --axis) {
        tuple[static_cast<std::size_t>(axis)] = static_cast<int>(lin % static_cast<std::uint64_t>(N));
        lin /= static_cast<std::uint64_t>(N);
    }
    if (lin != 0) throw InvalidAddress("linear digit out of range");
    return tuple;
}

Box cube_box(const CubeAddress& addr, const ScaleSequence& scales) {
    scales.validate();
    if (addr.level() > scales.max_depth())
        throw ScaleError("address deeper than configured scales");
    Box box;
    box.corner_num.assign(static_cast<std::size_t>(scales.d), 0);
    box.den = 1;
    for (int k = 0; k < addr.level(); ++k) {
        const auto& tuple = addr.digits[static_cast<std::size_t>(k)];
        if (static_cast<int>(tuple.size()) != scales.d)
            throw InvalidAddress("digit tuple arity mismatch");
        const std::int64_t b = scales.branching(k + 1);
        for (int axis = 0; axis < scales.d; ++axis) {
            const int t = tuple[static_cast<std::size_t>(axis)];
            if (t < 0 || t >= b) throw InvalidAddress("digit out of range for its level");
            auto& c = box.corner_num[static_cast<std::size_t>(axis)];
            if (__builtin_mul_overflow(c, b, &c)) throw Error("cube_box overflow");
            c += t;
        }
        if (__builtin_mul_overflow(box.den, b, &box.den)) throw Error("cube_box overflow");
    }
    return box;
}

std::vector<CubeAddress> children_addresses(const CubeAddress& addr, const ScaleSequence& scales) {
    const int level = addr.level();
    if (level >= scales.max_depth())
        throw ScaleError("no scale configured below level " + std::to_string(level));
    const int N = scales.branching(level + 1);
    const auto n_children = scales.children_per_node(level + 1);
    std::vector<CubeAddress> out;
    out.reserve(n_children);
    for (std::uint64_t lin = 0; lin < n_children; ++lin) {
        CubeAddress child = addr;
        child.digits.push_back(linear_to_digit_tuple(static_cast<std::uint32_t>(lin), N, scales.d));
        out.push_back(std::move(child));
    }
    return out;
}

SurvivalTree::SurvivalTree(ScaleSequence scales) : scales_(std::move(scales)) {
    scales_.validate();
}

SurvivalTree SurvivalTree::full(const ScaleSequence& scales, int depth) {
    SurvivalTree tree(scales);
    for (int level = 1; level <= depth; ++level) {
        const auto per_node = scales.children_per_node(level);
        const std::size_t parents = tree.count(level - 1);
        std::vector<Entry> entries;
        entries.reserve(parents * per_node);
        for (std::size_t p = 0; p < parents; ++p)
            for (std::uint64_t c = 0; c < per_node; ++c)
                entries.push_back({static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(c)});
        tree.push_level(std::move(entries));
    }
    return tree;
}

std::size_t SurvivalTree::count(int level) const {
    if (level == 0) return 1;
    if (level < 0 || level > depth()) throw ScaleError("count: level out of range");
    return levels_[static_cast<std::size_t>(level) - 1].size();
}

std::uint64_t SurvivalTree::total_nodes() const {
    std::uint64_t n = 1;
    for (const auto& lv : levels_) n += lv.size();
    return n;
}

const SurvivalTree::Entry& SurvivalTree::entry(int level, std::size_t i) const {
    if (level < 1 || level > depth()) throw ScaleError("entry: level out of range");
    return levels_[static_cast<std::size_t>(level) - 1].at(i);
}

std::size_t SurvivalTree::parent_of(int level, std::size_t i) const {
    return entry(level, i).parent;
}

std::pair<std::size_t, std::size_t> SurvivalTree::children(int level, std::size_t i) const {
    if (level < 0 || level >= depth()) throw MissingLevel("children: no populated level below");
    const auto& off = offsets_[static_cast<std::size_t>(level)];
    if (i >= count(level)) throw ScaleError("children: bad node index");
    return {off[i], off[i + 1]};
}

std::size_t SurvivalTree::child_count(int level, std::size_t i) const {
    auto [b, e] = children(level, i);
    return e - b;
}

CubeAddress SurvivalTree::address_of(int level, std::size_t i) const {
    CubeAddress addr;
    addr.digits.resize(static_cast<std::size_t>(level));
    std::size_t cur = i;
    for (int k = level; k >= 1; --k) {
        const Entry& e = entry(k, cur);
        addr.digits[static_cast<std::size_t>(k) - 1] =
            linear_to_digit_tuple(e.digit, scales_.branching(k), scales_.d);
        cur = e.parent;
    }
    return addr;
}

std::optional<std::size_t> SurvivalTree::find(const CubeAddress& addr) const {
    if (addr.level() > depth()) return std::nullopt;
    std::size_t cur = 0;
    for (int k = 1; k <= addr.level(); ++k) {
        const auto digit = digit_tuple_to_linear(addr.digits[static_cast<std::size_t>(k) - 1],
                                                 scales_.branching(k));
        auto [b, e] = children(k - 1, cur);
        const auto& lv = levels_[static_cast<std::size_t>(k) - 1];
        const auto it = std::lower_bound(lv.begin() + static_cast<std::ptrdiff_t>(b),
                                         lv.begin() + static_cast<std::ptrdiff_t>(e), digit,
                                         [](const Entry& en, std::uint32_t dg) { return en.digit < dg; });
        if (it == lv.begin() + static_cast<std::ptrdiff_t>(e) || it->digit != digit) return std::nullopt;
        cur = static_cast<std::size_t>(it - lv.begin());
    }
    return cur;
}

Box SurvivalTree::box_of(int level, std::size_t i) const {
    return cube_box(address_of(level, i), scales_);
}

void SurvivalTree::push_level(std::vector<Entry> entries) {
    const int level = depth() + 1;
    if (level > scales_.max_depth())
        throw ScaleError("push_level: tree deeper than configured scales");
    const auto per_node = scales_.children_per_node(level);
    const std::size_t parents = count(level - 1);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const Entry& e = entries[i];
        if (e.parent >= parents) throw InvalidAddress("entry parent out of range");
        if (e.digit >= per_node) throw InvalidAddress("entry digit out of range");
        if (i > 0) {
            const Entry& prev = entries[i - 1];
            if (!(prev.parent < e.parent || (prev.parent == e.parent && prev.digit < e.digit)))
                throw InvalidAddress("entries not sorted by (parent, digit)");
        }
    }
    levels_.push_back(std::move(entries));
    offsets_.emplace_back();
    rebuild_offsets(depth() - 1);
}

void SurvivalTree::rebuild_offsets(int level_index) {
    const std::size_t parents = count(level_index);
    auto& off = offsets_[static_cast<std::size_t>(level_index)];
    off.assign(parents + 1, 0);
    const auto& lv = levels_[static_cast<std::size_t>(level_index)];
    for (const Entry& e : lv) ++off[e.parent + 1];
    for (std::size_t i = 1; i <= parents; ++i) off[i] += off[i - 1];
}

std::string SurvivalTree::serialize() const {
    std::ostringstream out;
    out << "fraclab-tree 1\n";
    out << "d " << scales_.d << "\n";
    out << "scales";
    for (int n : scales_.levels) out << ' ' << n;
    out << "\n";
    out << "depth " << depth() << "\n";
    for (int level = 0; level <= depth(); ++level) {
        out << "level " << level << ":";
        for (std::size_t i = 0; i < count(level); ++i) out << ' ' << address_of(level, i).str();
        out << "\n";
    }
    return out.str();
}

namespace {

CubeAddress parse_address(const std::string& token, int d) {
    CubeAddress addr;
    std::size_t pos = 0;
    while (pos < token.size()) {
        if (token[pos] != '(') throw InvalidAddress("bad address token: " + token);
        const std::size_t close = token.find(')', pos);
        if (close == std::string::npos) throw InvalidAddress("unterminated tuple: " + token);
        const std::string inner = token.substr(pos + 1, close - pos - 1);
        std::vector<int> tuple;
        if (!inner.empty()) {
            std::istringstream ts(inner);
            std::string part;
            while (std::getline(ts, part, ',')) tuple.push_back(std::stoi(part));
        }
        if (!tuple.empty()) {
            if (static_cast<int>(tuple.size()) != d) throw InvalidAddress("tuple arity mismatch");
            addr.digits.push_back(std::move(tuple));
        }
        pos = close + 1;
    }
    return addr;
}

}  // namespace

SurvivalTree SurvivalTree::deserialize(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "fraclab-tree 1")
        throw Error("unrecognized tree header");
    ScaleSequence scales;
    if (!std::getline(in, line) || line.rfind("d ", 0) != 0) throw Error("missing dimension line");
    scales.d = std::stoi(line.substr(2));
    if (!std::getline(in, line) || line.rfind("scales", 0) != 0) throw Error("missing scales line");
    {
        std::istringstream ls(line.substr(6));
        int n;
        while (ls >> n) scales.levels.push_back(n);
    }
    if (!std::getline(in, line) || line.rfind("depth ", 0) != 0) throw Error("missing depth line");
    const int depth = std::stoi(line.substr(6));
    if (depth > scales.max_depth()) throw Error("depth exceeds scales");

    SurvivalTree tree(scales);
    for (int level = 0; level <= depth; ++level) {
        if (!std::getline(in, line)) throw Error("truncated tree file");
        const std::string prefix = "level " + std::to_string(level) + ":";
        if (line.rfind(prefix, 0) != 0) throw Error("bad level line: " + line);
        std::istringstream ls(line.substr(prefix.size()));
        std::string token;
        std::vector<CubeAddress> addrs;
        while (ls >> token) addrs.push_back(parse_address(token, scales.d));
        if (level == 0) {
            if (addrs.size() != 1 || addrs[0].level() != 0)
                throw InvalidAddress("level 0 must contain exactly the root");
            continue;
        }
        std::vector<Entry> entries;
        entries.reserve(addrs.size());
        for (const auto& addr : addrs) {
            if (addr.level() != level) throw InvalidAddress("address level mismatch");
            CubeAddress parent = addr;
            parent.digits.pop_back();
            const auto pidx = tree.find(parent);
            if (!pidx) throw InvalidAddress("address does not extend a retained parent: " + addr.str());
            entries.push_back({static_cast<std::uint32_t>(*pidx),
                               digit_tuple_to_linear(addr.digits.back(), scales.branching(level))});
        }
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return a.parent < b.parent || (a.parent == b.parent && a.digit < b.digit);
        });
        tree.push_level(std::move(entries));
    }
    return tree;
}

SurvivalTree SurvivalTree::deserialize_string(const std::string& text) {
    std::istringstream in(text);
    return deserialize(in);
}

}  // namespace fraclab
