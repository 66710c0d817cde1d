#include "vidtl/monitor.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <map>
#include <optional>
#include <unordered_map>

namespace vidtl {

namespace {

// Residual-obligation formulas are interned so that structurally equal
// residuals share one id. State formulas are additionally canonicalized to a
// subsumption-reduced DNF over temporal literals; without that, progression
// of nested until/always obligations keeps wrapping and-over-or layers and
// the state set never closes.
struct Residuals {
    enum class Kind : std::uint8_t {
        tt,
        ff,
        atom,
        negation,
        conjunction,  // flattened, sorted, deduplicated children
        disjunction,  // flattened, sorted, deduplicated children
        next,
        always,
        eventually,
        until,
    };

    struct Node {
        Kind kind;
        std::uint32_t atom = 0;
        std::vector<std::uint32_t> kids;

        bool operator==(const Node& o) const {
            return kind == o.kind && atom == o.atom && kids == o.kids;
        }
        bool operator<(const Node& o) const {
            if (kind != o.kind) return kind < o.kind;
            if (atom != o.atom) return atom < o.atom;
            return kids < o.kids;
        }
    };

    explicit Residuals(std::size_t dnf_term_cap) : term_cap_(dnf_term_cap) {}

    std::vector<Node> nodes;
    std::map<Node, std::uint32_t> intern_table;
    std::size_t term_cap_;

    std::uint32_t intern(Node n) {
        auto it = intern_table.find(n);
        if (it != intern_table.end()) return it->second;
        const auto id = static_cast<std::uint32_t>(nodes.size());
        nodes.push_back(n);
        intern_table.emplace(std::move(n), id);
        return id;
    }

    std::uint32_t tt() { return intern({Kind::tt, 0, {}}); }
    std::uint32_t ff() { return intern({Kind::ff, 0, {}}); }
    std::uint32_t atom(std::uint32_t i) { return intern({Kind::atom, i, {}}); }

    std::uint32_t negation(std::uint32_t x) {
        const auto& n = nodes[x];
        if (n.kind == Kind::tt) return ff();
        if (n.kind == Kind::ff) return tt();
        if (n.kind == Kind::negation) return n.kids[0];
        return intern({Kind::negation, 0, {x}});
    }

    std::uint32_t nary(Kind kind, std::vector<std::uint32_t> kids) {
        const std::uint32_t neutral = (kind == Kind::conjunction) ? tt() : ff();
        const std::uint32_t absorbing = (kind == Kind::conjunction) ? ff() : tt();
        std::vector<std::uint32_t> flat;
        std::deque<std::uint32_t> work(kids.begin(), kids.end());
        while (!work.empty()) {
            const auto id = work.front();
            work.pop_front();
            if (id == absorbing) return absorbing;
            if (id == neutral) continue;
            if (nodes[id].kind == kind) {
                for (auto k : nodes[id].kids) work.push_back(k);
            } else {
                flat.push_back(id);
            }
        }
        std::sort(flat.begin(), flat.end());
        flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
        for (auto id : flat) {
            if (nodes[id].kind == Kind::negation &&
                std::binary_search(flat.begin(), flat.end(), nodes[id].kids[0])) {
                return absorbing;
            }
        }
        if (flat.empty()) return neutral;
        if (flat.size() == 1) return flat[0];
        return intern({kind, 0, std::move(flat)});
    }

    std::uint32_t conjunction(std::vector<std::uint32_t> kids) {
        return nary(Kind::conjunction, std::move(kids));
    }
    std::uint32_t disjunction(std::vector<std::uint32_t> kids) {
        return nary(Kind::disjunction, std::move(kids));
    }

    std::uint32_t unary(Kind kind, std::uint32_t x) { return intern({kind, 0, {x}}); }
    std::uint32_t until(std::uint32_t l, std::uint32_t r) {
        return intern({Kind::until, 0, {l, r}});
    }

    std::uint32_t from_formula(const Formula& f) {
        switch (f.kind()) {
            case FormulaKind::atom:
                return atom(static_cast<std::uint32_t>(f.prop_index()));
            case FormulaKind::negation:
                return negation(from_formula(f.child()));
            case FormulaKind::conjunction:
                return conjunction({from_formula(f.left()), from_formula(f.right())});
            case FormulaKind::disjunction:
                return disjunction({from_formula(f.left()), from_formula(f.right())});
            case FormulaKind::implication:
                return disjunction({negation(from_formula(f.left())), from_formula(f.right())});
            case FormulaKind::next:
                return unary(Kind::next, from_formula(f.child()));
            case FormulaKind::always:
                return unary(Kind::always, from_formula(f.child()));
            case FormulaKind::eventually:
                return unary(Kind::eventually, from_formula(f.child()));
            case FormulaKind::until:
                return until(from_formula(f.left()), from_formula(f.right()));
            case FormulaKind::seq:
                throw std::logic_error("compile_monitor requires a Seq-free formula");
        }
        throw std::logic_error("unreachable formula kind");
    }

    /// Rewrite the obligation against the label of the current position. The
    /// result constrains the remaining (possibly empty) suffix.
    std::uint32_t progress(std::uint32_t id, Label label) {
        const Node n = nodes[id];
        switch (n.kind) {
            case Kind::tt:
            case Kind::ff:
                return id;
            case Kind::atom:
                return ((label >> n.atom) & 1u) ? tt() : ff();
            case Kind::negation:
                return negation(progress(n.kids[0], label));
            case Kind::conjunction: {
                std::vector<std::uint32_t> kids;
                kids.reserve(n.kids.size());
                for (auto k : n.kids) kids.push_back(progress(k, label));
                return conjunction(std::move(kids));
            }
            case Kind::disjunction: {
                std::vector<std::uint32_t> kids;
                kids.reserve(n.kids.size());
                for (auto k : n.kids) kids.push_back(progress(k, label));
                return disjunction(std::move(kids));
            }
            case Kind::next:
                // Strong next: besides the payload, the suffix must be non-empty.
                return conjunction({unary(Kind::eventually, tt()), n.kids[0]});
            case Kind::always:
                return conjunction({progress(n.kids[0], label), id});
            case Kind::eventually:
                return disjunction({progress(n.kids[0], label), id});
            case Kind::until:
                return disjunction({progress(n.kids[1], label),
                                    conjunction({progress(n.kids[0], label), id})});
        }
        throw std::logic_error("unreachable residual kind");
    }

    /// Value of the obligation when the trace has ended (empty suffix).
    bool at_end(std::uint32_t id) {
        const Node& n = nodes[id];
        switch (n.kind) {
            case Kind::tt: return true;
            case Kind::ff: return false;
            case Kind::atom: return false;  // no position left to inspect
            case Kind::negation: return !at_end(n.kids[0]);
            case Kind::conjunction:
                for (auto k : n.kids) {
                    if (!at_end(k)) return false;
                }
                return true;
            case Kind::disjunction:
                for (auto k : n.kids) {
                    if (at_end(k)) return true;
                }
                return false;
            case Kind::next: return false;  // strong next off the end
            case Kind::always: return true;  // vacuous over no positions
            case Kind::eventually: return false;
            case Kind::until: return false;
        }
        throw std::logic_error("unreachable residual kind");
    }

    // --- DNF canonicalization over temporal literals ----------------------

    using Conjunct = std::vector<std::uint32_t>;  // sorted literal ids
    using Dnf = std::vector<Conjunct>;            // sorted, subsumption-free

    static bool subset_of(const Conjunct& small, const Conjunct& big) {
        return std::includes(big.begin(), big.end(), small.begin(), small.end());
    }

    /// Drop duplicate and superset conjuncts; an empty conjunct collapses the
    /// whole disjunction to true.
    Dnf reduce(Dnf dnf) const {
        std::sort(dnf.begin(), dnf.end(),
                  [](const Conjunct& a, const Conjunct& b) {
                      return a.size() != b.size() ? a.size() < b.size() : a < b;
                  });
        Dnf kept;
        for (auto& c : dnf) {
            if (!kept.empty() && kept.front().empty()) break;
            bool subsumed = false;
            for (const auto& k : kept) {
                if (subset_of(k, c)) {
                    subsumed = true;
                    break;
                }
            }
            if (!subsumed) kept.push_back(std::move(c));
        }
        std::sort(kept.begin(), kept.end());
        return kept;
    }

    /// Conjunct union; nullopt when it contains complementary literals.
    std::optional<Conjunct> merge(const Conjunct& a, const Conjunct& b) {
        Conjunct out;
        out.reserve(a.size() + b.size());
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        for (const auto lit : out) {
            if (std::binary_search(out.begin(), out.end(), negation(lit))) return std::nullopt;
        }
        return out;
    }

    Dnf to_dnf(std::uint32_t id, bool negated) {
        const Node n = nodes[id];
        switch (n.kind) {
            case Kind::tt:
                return negated ? Dnf{} : Dnf{{}};
            case Kind::ff:
                return negated ? Dnf{{}} : Dnf{};
            case Kind::negation:
                return to_dnf(n.kids[0], !negated);
            case Kind::conjunction:
            case Kind::disjunction: {
                // De Morgan under negation.
                const bool conjunctive = (n.kind == Kind::conjunction) != negated;
                if (!conjunctive) {
                    Dnf all;
                    for (const auto k : n.kids) {
                        Dnf part = to_dnf(k, negated);
                        all.insert(all.end(), part.begin(), part.end());
                        if (all.size() > term_cap_) {
                            throw Error(Errc::monitor_blowup,
                                        "state normalization exceeded the term budget");
                        }
                    }
                    return reduce(std::move(all));
                }
                Dnf acc{{}};
                for (const auto k : n.kids) {
                    const Dnf part = to_dnf(k, negated);
                    Dnf next;
                    for (const auto& a : acc) {
                        for (const auto& b : part) {
                            if (auto m = merge(a, b)) next.push_back(std::move(*m));
                            if (next.size() > term_cap_) {
                                throw Error(Errc::monitor_blowup,
                                            "state normalization exceeded the term budget");
                            }
                        }
                    }
                    acc = reduce(std::move(next));
                    if (acc.empty()) return acc;  // contradiction
                }
                return acc;
            }
            default: {
                const std::uint32_t lit = negated ? negation(id) : id;
                return Dnf{{lit}};
            }
        }
    }

    /// Canonical form used for monitor states.
    std::uint32_t canonical(std::uint32_t id) {
        const Dnf dnf = to_dnf(id, false);
        if (dnf.empty()) return ff();
        std::vector<std::uint32_t> terms;
        terms.reserve(dnf.size());
        for (const auto& c : dnf) {
            terms.push_back(conjunction(Conjunct(c)));
        }
        return disjunction(std::move(terms));
    }
};

std::uint32_t compress_bits(Label value, Label mask) {
    std::uint32_t out = 0;
    int k = 0;
    while (mask) {
        const Label low = mask & (~mask + 1);
        if (value & low) out |= (1u << k);
        ++k;
        mask ^= low;
    }
    return out;
}

Label expand_bits(std::uint32_t packed, Label mask) {
    Label out = 0;
    int k = 0;
    while (mask) {
        const Label low = mask & (~mask + 1);
        if ((packed >> k) & 1u) out |= low;
        ++k;
        mask ^= low;
    }
    return out;
}

}  // namespace

MonitorAutomaton::StateId MonitorAutomaton::step(StateId state, Label label) const {
    return transitions_.at(state)[compress_bits(label, mask_)];
}

bool MonitorAutomaton::accepts(const Trace& t) const {
    StateId s = initial_;
    for (const Label label : t) s = step(s, label);
    return accepting(s);
}

MonitorAutomaton compile_monitor(const Formula& f, const MonitorOptions& options) {
    Residuals res(std::max<std::size_t>(options.max_states, 1024));
    const std::uint32_t root = res.canonical(res.from_formula(f));

    Label mask = 0;
    for (const std::size_t i : free_propositions(f)) mask |= (Label{1} << i);
    const std::size_t bits = static_cast<std::size_t>(std::popcount(mask));
    const std::size_t alphabet = std::size_t{1} << bits;

    MonitorAutomaton m;
    m.mask_ = mask;
    m.alphabet_bits_ = bits;

    std::unordered_map<std::uint32_t, MonitorAutomaton::StateId> ids;
    std::vector<std::uint32_t> resident;
    std::deque<std::uint32_t> queue;

    auto state_of = [&](std::uint32_t residual) {
        auto it = ids.find(residual);
        if (it != ids.end()) return it->second;
        if (resident.size() >= options.max_states) {
            throw Error(Errc::monitor_blowup,
                        "monitor exceeded " + std::to_string(options.max_states) + " states");
        }
        const auto id = static_cast<MonitorAutomaton::StateId>(resident.size());
        ids.emplace(residual, id);
        resident.push_back(residual);
        queue.push_back(residual);
        return id;
    };

    state_of(root);
    m.initial_ = 0;
    while (!queue.empty()) {
        const std::uint32_t residual = queue.front();
        queue.pop_front();
        const auto id = ids.at(residual);
        if (m.transitions_.size() <= id) m.transitions_.resize(id + 1);
        auto& row = m.transitions_[id];
        row.resize(alphabet);
        for (std::size_t sym = 0; sym < alphabet; ++sym) {
            const Label label = expand_bits(static_cast<std::uint32_t>(sym), mask);
            row[sym] = state_of(res.canonical(res.progress(residual, label)));
        }
    }

    m.accepting_.resize(resident.size());
    for (std::size_t i = 0; i < resident.size(); ++i) {
        m.accepting_[i] = res.at_end(resident[i]);
    }
    return m;
}

}  // namespace vidtl
