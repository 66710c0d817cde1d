#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vidtl/confidence.hpp"
#include "vidtl/tl.hpp"

namespace vidtl {

struct AutomatonOptions {
    /// Layers grow as 2^|propositions|; refuse anything past this.
    std::size_t max_propositions = 12;
    /// Label probabilities at or below this are pruned as exact zeros.
    double prune_floor = 1e-12;
};

/// Layered DTMC over a video: one layer of proposition-subset states per
/// frame, a distinguished initial state, and an absorbing terminal state.
/// Every retained layer-(j-1) state transitions to every retained layer-j
/// state with a probability that depends only on the destination label.
class VideoAutomaton {
  public:
    enum class StateKind { initial, frame, terminal };

    struct State {
        StateKind kind;
        std::size_t layer;  // 0 = initial, 1..N = frames, N+1 = terminal
        Label label;        // bit pattern over the proposition set (frame states)
        double entry_prob;  // label probability pr(layer, label); 1.0 otherwise
    };

    using StateId = std::uint32_t;

    std::size_t n_states() const { return states_.size(); }
    std::size_t n_frames() const { return n_frames_; }
    std::size_t n_props() const { return n_props_; }

    const State& state(StateId id) const { return states_.at(id); }
    StateId initial_state() const { return 0; }
    StateId terminal_state() const { return static_cast<StateId>(states_.size() - 1); }

    /// Ids of the states in layer j (1-based frame layers).
    const std::vector<StateId>& layer_states(std::size_t layer) const;

    /// Outgoing transitions of a state as (destination, probability).
    const std::vector<std::pair<StateId, double>>& out_edges(StateId id) const;

    /// All transitions flattened, in construction order.
    std::vector<std::pair<std::pair<StateId, StateId>, double>> transitions() const;

  private:
    friend VideoAutomaton build_automaton(const PropositionSet&, const ConfidenceMatrix&,
                                          const AutomatonOptions&);

    std::size_t n_frames_ = 0;
    std::size_t n_props_ = 0;
    std::vector<State> states_;
    std::vector<std::vector<StateId>> layers_;  // [0..N+1] -> state ids
    std::vector<std::vector<std::pair<StateId, double>>> out_;
};

/// Construct the layered automaton from a confidence matrix: for each frame j
/// and bit combination k over the proposition set, the label probability is
/// the product of c_{i,j} (bit set) or 1-c_{i,j} (bit clear); combinations
/// with zero probability are pruned, and everything else is fully connected
/// layer to layer. A terminal state absorbs the last layer.
VideoAutomaton build_automaton(const PropositionSet& props, const ConfidenceMatrix& C,
                               const AutomatonOptions& options = {});

/// Forward-reachability marginal over the states of layer j, keyed by label.
/// Sums to 1 within 1e-9.
std::map<Label, double> layer_distribution(const VideoAutomaton& a, std::size_t layer);

/// Graphviz rendering for debugging: states labeled with layer and bit pattern.
std::string to_dot(const VideoAutomaton& a, const PropositionSet& props);

}  // namespace vidtl
