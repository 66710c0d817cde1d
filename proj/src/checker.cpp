#include "vidtl/checker.hpp"

#include <algorithm>
#include <vector>

namespace vidtl {

namespace {

void check_dimensions(const PropositionSet& props, const ConfidenceMatrix& C, const Formula& f) {
    if (props.size() != C.n_props()) {
        throw Error(Errc::dimension_mismatch,
                    "confidence matrix has " + std::to_string(C.n_props()) +
                        " proposition rows, expected " + std::to_string(props.size()));
    }
    const auto free = free_propositions(f);
    if (!free.empty() && free.back() >= props.size()) {
        throw Error(Errc::dimension_mismatch,
                    "formula references proposition index " + std::to_string(free.back()) +
                        " outside the set of " + std::to_string(props.size()));
    }
}

}  // namespace

SatisfactionResult satisfaction_probability(const PropositionSet& props,
                                            const ConfidenceMatrix& C, const Formula& f,
                                            const CheckOptions& options) {
    check_dimensions(props, C, f);
    const Formula g = desugar_seq(f);
    const MonitorAutomaton monitor = compile_monitor(g, options.monitor);
    const VideoAutomaton automaton = build_automaton(props, C, options.automaton);

    std::vector<double> mass(monitor.n_states(), 0.0);
    mass[monitor.initial()] = 1.0;
    for (std::size_t layer = 1; layer <= automaton.n_frames(); ++layer) {
        std::vector<double> next(monitor.n_states(), 0.0);
        for (const auto id : automaton.layer_states(layer)) {
            const auto& s = automaton.state(id);
            for (MonitorAutomaton::StateId ms = 0; ms < monitor.n_states(); ++ms) {
                if (mass[ms] == 0.0) continue;
                next[monitor.step(ms, s.label)] += mass[ms] * s.entry_prob;
            }
        }
        mass = std::move(next);
    }

    double p = 0.0;
    for (MonitorAutomaton::StateId ms = 0; ms < monitor.n_states(); ++ms) {
        if (monitor.accepting(ms)) p += mass[ms];
    }
    p = std::clamp(p, 0.0, 1.0);
    return SatisfactionResult{p, to_string(f, props), C.n_frames(), "dp"};
}

SatisfactionResult oracle_satisfaction(const PropositionSet& props, const ConfidenceMatrix& C,
                                       const Formula& f, const CheckOptions& options) {
    check_dimensions(props, C, f);
    const std::size_t n_props = props.size();
    const std::size_t n_frames = C.n_frames();
    const std::size_t bits = n_props * n_frames;
    if (bits > options.oracle_bit_budget) {
        throw Error(Errc::too_large_for_oracle,
                    std::to_string(n_frames) + " frames x " + std::to_string(n_props) +
                        " propositions needs 2^" + std::to_string(bits) +
                        " label sequences (budget 2^" +
                        std::to_string(options.oracle_bit_budget) + ")");
    }

    const Formula g = desugar_seq(f);
    const Label label_count = Label{1} << n_props;
    Trace trace(n_frames, 0);

    double total = 0.0;
    // Odometer over all per-frame label assignments.
    while (true) {
        double pr = 1.0;
        for (std::size_t frame = 0; frame < n_frames; ++frame) {
            for (std::size_t i = 0; i < n_props; ++i) {
                const double c = C.at(i, frame);
                pr *= ((trace[frame] >> i) & 1u) ? c : (1.0 - c);
            }
        }
        if (pr > 0.0 && evaluate_trace(g, trace, 0)) total += pr;

        std::size_t frame = 0;
        while (frame < n_frames) {
            if (++trace[frame] < label_count) break;
            trace[frame] = 0;
            ++frame;
        }
        if (frame == n_frames) break;
    }

    total = std::clamp(total, 0.0, 1.0);
    return SatisfactionResult{total, to_string(f, props), n_frames, "oracle"};
}

}  // namespace vidtl
