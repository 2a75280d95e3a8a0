#include "fraclab/percolation.hpp"

#include <cmath>
#include <sstream>

namespace fraclab {

ProbSequence ProbSequence::constant_prob(double p) {
    ProbSequence s;
    s.form = Form::Constant;
    s.constant = p;
    return s;
}

ProbSequence ProbSequence::explicit_list(std::vector<double> v) {
    ProbSequence s;
    s.form = Form::Explicit;
    s.values = std::move(v);
    return s;
}

ProbSequence ProbSequence::one_minus_geometric(double c, double a) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("one_minus_geometric requires 0 < a < 1");
    ProbSequence s;
    s.form = Form::OneMinusGeometric;
    s.c = c;
    s.a = a;
    return s;
}

double ProbSequence::at(int level) const {
    if (level < 1) throw DomainError("sequence levels are 1-based");
    double p = 0.0;
    switch (form) {
        case Form::Constant: p = constant; break;
        case Form::Explicit:
            if (static_cast<std::size_t>(level) > values.size())
                throw InsufficientSequence("probability sequence shorter than requested depth");
            p = values[static_cast<std::size_t>(level) - 1];
            break;
        case Form::OneMinusGeometric: p = 1.0 - c * std::pow(a, level); break;
    }
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError("probability outside [0,1] at level " + std::to_string(level));
    return p;
}

std::string ProbSequence::describe() const {
    std::ostringstream out;
    char buf[64];
    switch (form) {
        case Form::Constant:
            std::snprintf(buf, sizeof buf, "%.17g", constant);
            out << "const " << buf;
            break;
        case Form::Explicit:
            out << "explicit";
            for (double v : values) {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << ' ' << buf;
            }
            break;
        case Form::OneMinusGeometric:
            std::snprintf(buf, sizeof buf, "%.17g", c);
            out << "one-minus-geometric c=" << buf;
            std::snprintf(buf, sizeof buf, "%.17g", a);
            out << " a=" << buf;
            break;
    }
    return out.str();
}

BranchSequence BranchSequence::constant_branch(int N) {
    BranchSequence s;
    s.form = Form::Constant;
    s.constant = N;
    return s;
}

BranchSequence BranchSequence::explicit_list(std::vector<int> v) {
    BranchSequence s;
    s.form = Form::Explicit;
    s.values = std::move(v);
    return s;
}

BranchSequence BranchSequence::geometric_ceil(double b, double r) {
    BranchSequence s;
    s.form = Form::GeometricCeil;
    s.b = b;
    s.r = r;
    return s;
}

int BranchSequence::at(int level) const {
    if (level < 1) throw DomainError("sequence levels are 1-based");
    int n = 0;
    switch (form) {
        case Form::Constant: n = constant; break;
        case Form::Explicit:
            if (static_cast<std::size_t>(level) > values.size())
                throw InsufficientSequence("branching sequence shorter than requested depth");
            n = values[static_cast<std::size_t>(level) - 1];
            break;
        case Form::GeometricCeil: {
            const double v = b * std::pow(r, level);
            if (v > 1e9) throw DomainError("branching factor overflow");
            n = static_cast<int>(std::ceil(v));
            break;
        }
    }
    if (n < 2) throw DomainError("branching factor must be >= 2 at level " + std::to_string(level));
    return n;
}

std::string BranchSequence::describe() const {
    std::ostringstream out;
    switch (form) {
        case Form::Constant: out << "const " << constant; break;
        case Form::Explicit:
            out << "explicit";
            for (int v : values) out << ' ' << v;
            break;
        case Form::GeometricCeil: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", b);
            out << "geometric-ceil b=" << buf;
            std::snprintf(buf, sizeof buf, "%.17g", r);
            out << " r=" << buf;
            break;
        }
    }
    return out.str();
}

ModelSpec ModelSpec::classical(int N, double p, int d) {
    ModelSpec m;
    m.kind = Kind::Classical;
    m.d = d;
    m.branchings = BranchSequence::constant_branch(N);
    m.probs = ProbSequence::constant_prob(p);
    m.validate();
    return m;
}

ModelSpec ModelSpec::fat(int N, ProbSequence probs, int d) {
    ModelSpec m;
    m.kind = Kind::Fat;
    m.d = d;
    m.branchings = BranchSequence::constant_branch(N);
    m.probs = std::move(probs);
    m.validate();
    return m;
}

ModelSpec ModelSpec::dense(BranchSequence Ns, double p, int d) {
    ModelSpec m;
    m.kind = Kind::Dense;
    m.d = d;
    m.branchings = std::move(Ns);
    m.probs = ProbSequence::constant_prob(p);
    m.validate();
    return m;
}

ModelSpec ModelSpec::thick(int N, ProbSequence keep_all, int d) {
    ModelSpec m;
    m.kind = Kind::Thick;
    m.d = d;
    m.branchings = BranchSequence::constant_branch(N);
    m.probs = std::move(keep_all);
    m.validate();
    return m;
}

void ModelSpec::validate() const {
    if (d < 1) throw DomainError("spatial dimension must be >= 1");
    if (kind == Kind::Dense) {
        // dense percolation wants a non-decreasing subdivision sequence
        if (branchings.form == BranchSequence::Form::Explicit) {
            for (std::size_t i = 1; i < branchings.values.size(); ++i)
                if (branchings.values[i] < branchings.values[i - 1])
                    throw DomainError("dense branching sequence must be non-decreasing");
        } else if (branchings.form == BranchSequence::Form::GeometricCeil && branchings.r < 1.0) {
            throw DomainError("dense branching sequence must be non-decreasing (r >= 1)");
        }
    }
}

ScaleSequence ModelSpec::scales(int depth) const {
    ScaleSequence s;
    s.d = d;
    s.levels.reserve(static_cast<std::size_t>(depth));
    for (int level = 1; level <= depth; ++level) s.levels.push_back(branchings.at(level));
    s.validate();
    return s;
}

double ModelSpec::prob_at(int level) const { return probs.at(level); }

double ModelSpec::exact_all_retained(int level) const {
    const double p = prob_at(level);
    if (kind == Kind::Thick) return p;
    const auto n = scales(level).children_per_node(level);
    return std::pow(p, static_cast<double>(n));
}

std::string ModelSpec::describe() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::Classical: out << "classical"; break;
        case Kind::Fat: out << "fat"; break;
        case Kind::Dense: out << "dense"; break;
        case Kind::Thick: out << "thick"; break;
    }
    out << " d=" << d << " N=[" << branchings.describe() << "] p=[" << probs.describe() << "]";
    return out.str();
}

SurvivalTree generate(const ModelSpec& spec, int depth, const SeedSpec& seed,
                      const GenerateOptions& opt) {
    if (depth < 0) throw DomainError("depth must be >= 0");
    spec.validate();
    SurvivalTree tree(spec.scales(depth));

    std::vector<std::uint64_t> states{seed.trial_state(opt.trial, opt.attempt)};
    for (int level = 1; level <= depth; ++level) {
        const double p = spec.prob_at(level);
        const auto per_node = tree.scales().children_per_node(level);
        std::vector<SurvivalTree::Entry> entries;
        std::vector<std::uint64_t> next_states;
        for (std::size_t parent = 0; parent < states.size(); ++parent) {
            const std::uint64_t ps = states[parent];
            if (spec.kind == ModelSpec::Kind::Thick) {
                if (family_uniform(ps) >= p) continue;
                for (std::uint32_t cdx = 0; cdx < per_node; ++cdx) {
                    entries.push_back({static_cast<std::uint32_t>(parent), cdx});
                    next_states.push_back(child_state(ps, cdx));
                }
            } else {
                for (std::uint32_t cdx = 0; cdx < per_node; ++cdx) {
                    const std::uint64_t cs = child_state(ps, cdx);
                    if (retain_uniform(cs) < p) {
                        entries.push_back({static_cast<std::uint32_t>(parent), cdx});
                        next_states.push_back(cs);
                    }
                }
            }
        }
        tree.push_level(std::move(entries));
        states = std::move(next_states);
        if (states.empty()) {
            for (int rest = level + 1; rest <= depth; ++rest) tree.push_level({});
            break;
        }
    }
    return tree;
}

namespace {

bool survives_rec(const ModelSpec& spec, int depth, int level, std::uint64_t state) {
    if (level == depth) return true;
    const double p = spec.prob_at(level + 1);
    std::uint64_t per_node = 1;
    {
        const auto b = static_cast<std::uint64_t>(spec.branchings.at(level + 1));
        for (int axis = 0; axis < spec.d; ++axis) per_node *= b;
    }
    if (spec.kind == ModelSpec::Kind::Thick) {
        if (family_uniform(state) >= p) return false;
        for (std::uint32_t cdx = 0; cdx < per_node; ++cdx)
            if (survives_rec(spec, depth, level + 1, child_state(state, cdx))) return true;
        return false;
    }
    for (std::uint32_t cdx = 0; cdx < per_node; ++cdx) {
        const std::uint64_t cs = child_state(state, cdx);
        if (retain_uniform(cs) < p && survives_rec(spec, depth, level + 1, cs)) return true;
    }
    return false;
}

}  // namespace

bool survives_to_depth(const ModelSpec& spec, int depth, const SeedSpec& seed,
                       std::uint64_t trial, std::uint64_t attempt) {
    spec.validate();
    return survives_rec(spec, depth, 0, seed.trial_state(trial, attempt));
}

ConditionResult condition_nonextinct(const ModelSpec& spec, int depth, const SeedSpec& seed,
                                     int max_retries, std::uint64_t trial) {
    if (max_retries < 1) throw DomainError("max_retries must be >= 1");
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        const auto a = static_cast<std::uint64_t>(attempt);
        if (!survives_to_depth(spec, depth, seed, trial, a)) continue;
        SurvivalTree tree = generate(spec, depth, seed, {trial, a});
        return {std::move(tree), attempt, a};
    }
    throw NonExtinctionFailed("no non-extinct realization in " + std::to_string(max_retries) +
                              " attempts (likely subcritical)");
}

OffspringStats offspring_stats(const ModelSpec& spec, int level, std::uint64_t trials,
                               const SeedSpec& seed) {
    if (trials < 1) throw DomainError("trials must be >= 1");
    const auto per_node = spec.scales(level + 1).children_per_node(level + 1);
    const double p = spec.prob_at(level + 1);

    OffspringStats st;
    st.trials = trials;
    st.histogram.assign(per_node + 1, 0);
    std::uint64_t all_count = 0;
    double sum = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        // the inspected cube is the leftmost level-`level` chain of trial t
        std::uint64_t state = seed.trial_state(t);
        for (int k = 0; k < level; ++k) state = child_state(state, 0);
        std::uint64_t kids = 0;
        if (spec.kind == ModelSpec::Kind::Thick) {
            kids = family_uniform(state) < p ? per_node : 0;
        } else {
            for (std::uint32_t cdx = 0; cdx < per_node; ++cdx)
                if (retain_uniform(child_state(state, cdx)) < p) ++kids;
        }
        ++st.histogram[kids];
        sum += static_cast<double>(kids);
        if (kids == per_node) ++all_count;
    }
    st.mean = sum / static_cast<double>(trials);
    st.all_retained_frequency = static_cast<double>(all_count) / static_cast<double>(trials);
    const double f = st.all_retained_frequency;
    st.ci99_half_width = 2.5758293035489004 * std::sqrt(f * (1.0 - f) / static_cast<double>(trials));
    st.exact_all_retained = spec.exact_all_retained(level + 1);
    return st;
}

double volume_estimate(const SurvivalTree& tree) {
    const int depth = tree.depth();
    if (depth == 0) return 1.0;
    const double den = static_cast<double>(tree.scales().side_denominator(depth));
    const double cell = std::pow(1.0 / den, tree.dim());
    return static_cast<double>(tree.count(depth)) * cell;
}

}  // namespace fraclab
