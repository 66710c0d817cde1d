#pragma once

#include <string>

#include "vidtl/automaton.hpp"
#include "vidtl/confidence.hpp"
#include "vidtl/monitor.hpp"
#include "vidtl/tl.hpp"

namespace vidtl {

struct CheckOptions {
    AutomatonOptions automaton;
    MonitorOptions monitor;
    /// Enumeration budget for the oracle: refuse when frames x propositions
    /// exceeds this many bits (2^bits label sequences).
    std::size_t oracle_bit_budget = 20;
};

struct SatisfactionResult {
    double probability = 0.0;
    std::string formula;
    std::size_t n_frames = 0;
    std::string method;  // "dp" or "oracle"
};

/// Exact probability mass, over the trace distribution of the video automaton
/// built from C, of traces satisfying f. Computed by forward dynamic
/// programming over (layer label, monitor state) pairs.
SatisfactionResult satisfaction_probability(const PropositionSet& props,
                                            const ConfidenceMatrix& C, const Formula& f,
                                            const CheckOptions& options = {});

/// Independent brute-force reference: enumerates every label sequence, scores
/// it with the per-frame product rule, and evaluates f with the finite-trace
/// semantics. Shares no code with the DP path.
SatisfactionResult oracle_satisfaction(const PropositionSet& props, const ConfidenceMatrix& C,
                                       const Formula& f, const CheckOptions& options = {});

}  // namespace vidtl
