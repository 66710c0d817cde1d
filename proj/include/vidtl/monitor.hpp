#pragma once

#include <cstdint>
#include <vector>

#include "vidtl/tl.hpp"

namespace vidtl {

struct MonitorOptions {
    /// Formula-to-DFA construction can blow up; refuse past this many states.
    std::size_t max_states = 4096;
};

/// Deterministic finite-trace monitor for a formula: consumes one label per
/// frame and accepts at end of trace exactly when the formula holds at
/// position 0 under evaluate_trace semantics.
class MonitorAutomaton {
  public:
    using StateId = std::uint32_t;

    StateId initial() const { return initial_; }
    std::size_t n_states() const { return accepting_.size(); }

    /// Transition on a full label; bits outside the formula's free
    /// propositions are ignored.
    StateId step(StateId state, Label label) const;

    /// End-of-trace acceptance predicate.
    bool accepting(StateId state) const { return accepting_.at(state); }

    /// Convenience: run the whole trace from the initial state.
    bool accepts(const Trace& t) const;

    /// Bitmask of the propositions the monitor actually inspects.
    Label projection_mask() const { return mask_; }

  private:
    friend MonitorAutomaton compile_monitor(const Formula&, const MonitorOptions&);

    StateId initial_ = 0;
    Label mask_ = 0;
    std::size_t alphabet_bits_ = 0;
    std::vector<bool> accepting_;
    std::vector<std::vector<StateId>> transitions_;  // [state][projected label]
};

/// Compile a Seq-free formula into a monitor by formula progression: each
/// state is a canonical residual obligation, transitions rewrite it against
/// the consumed label, and acceptance asks whether the residual is satisfied
/// by an ended trace.
MonitorAutomaton compile_monitor(const Formula& f, const MonitorOptions& options = {});

}  // namespace vidtl
