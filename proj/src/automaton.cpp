#include "vidtl/automaton.hpp"

#include <sstream>

namespace vidtl {

const std::vector<VideoAutomaton::StateId>& VideoAutomaton::layer_states(
    std::size_t layer) const {
    if (layer >= layers_.size()) {
        throw Error(Errc::layer_out_of_range,
                    "layer " + std::to_string(layer) + " out of range (automaton has " +
                        std::to_string(n_frames_) + " frame layers)");
    }
    return layers_[layer];
}

const std::vector<std::pair<VideoAutomaton::StateId, double>>& VideoAutomaton::out_edges(
    StateId id) const {
    if (id >= out_.size()) {
        throw Error(Errc::index_out_of_range, "state id " + std::to_string(id) + " out of range");
    }
    return out_[id];
}

std::vector<std::pair<std::pair<VideoAutomaton::StateId, VideoAutomaton::StateId>, double>>
VideoAutomaton::transitions() const {
    std::vector<std::pair<std::pair<StateId, StateId>, double>> all;
    for (StateId from = 0; from < out_.size(); ++from) {
        for (const auto& [to, p] : out_[from]) all.push_back({{from, to}, p});
    }
    return all;
}

VideoAutomaton build_automaton(const PropositionSet& props, const ConfidenceMatrix& C,
                               const AutomatonOptions& options) {
    if (props.size() != C.n_props()) {
        throw Error(Errc::dimension_mismatch,
                    "confidence matrix has " + std::to_string(C.n_props()) +
                        " proposition rows, expected " + std::to_string(props.size()));
    }
    if (props.size() > options.max_propositions) {
        throw Error(Errc::too_many_propositions,
                    std::to_string(props.size()) + " propositions exceed the layer cap of " +
                        std::to_string(options.max_propositions) +
                        " (states per layer are 2^|propositions|)");
    }

    const std::size_t n_props = props.size();
    const std::size_t n_frames = C.n_frames();
    const std::uint64_t n_labels = std::uint64_t{1} << n_props;

    VideoAutomaton a;
    a.n_frames_ = n_frames;
    a.n_props_ = n_props;
    a.layers_.resize(n_frames + 2);

    a.states_.push_back({VideoAutomaton::StateKind::initial, 0, 0, 1.0});
    a.out_.emplace_back();
    a.layers_[0] = {0};

    std::vector<VideoAutomaton::StateId> prev = {0};
    for (std::size_t frame = 0; frame < n_frames; ++frame) {
        const std::size_t layer = frame + 1;
        std::vector<VideoAutomaton::StateId> current;
        for (std::uint64_t label = 0; label < n_labels; ++label) {
            double pr = 1.0;
            for (std::size_t i = 0; i < n_props; ++i) {
                const double c = C.at(i, frame);
                pr *= ((label >> i) & 1u) ? c : (1.0 - c);
            }
            if (pr <= options.prune_floor) continue;
            const auto id = static_cast<VideoAutomaton::StateId>(a.states_.size());
            a.states_.push_back({VideoAutomaton::StateKind::frame, layer, label, pr});
            a.out_.emplace_back();
            current.push_back(id);
            for (const auto from : prev) a.out_[from].push_back({id, pr});
        }
        a.layers_[layer] = current;
        prev = std::move(current);
    }

    const auto terminal = static_cast<VideoAutomaton::StateId>(a.states_.size());
    a.states_.push_back({VideoAutomaton::StateKind::terminal, n_frames + 1, 0, 1.0});
    a.out_.emplace_back();
    a.layers_[n_frames + 1] = {terminal};
    for (const auto from : prev) a.out_[from].push_back({terminal, 1.0});
    a.out_[terminal].push_back({terminal, 1.0});  // absorbing

    return a;
}

std::map<Label, double> layer_distribution(const VideoAutomaton& a, std::size_t layer) {
    if (layer < 1 || layer > a.n_frames()) {
        throw Error(Errc::layer_out_of_range,
                    "layer " + std::to_string(layer) + " out of range [1, " +
                        std::to_string(a.n_frames()) + "]");
    }
    std::vector<double> mass(a.n_states(), 0.0);
    mass[a.initial_state()] = 1.0;
    for (std::size_t l = 1; l <= layer; ++l) {
        std::vector<double> next(a.n_states(), 0.0);
        const auto& sources = (l == 1) ? a.layer_states(0) : a.layer_states(l - 1);
        for (const auto from : sources) {
            if (mass[from] == 0.0) continue;
            for (const auto& [to, p] : a.out_edges(from)) next[to] += mass[from] * p;
        }
        mass = std::move(next);
    }
    std::map<Label, double> dist;
    for (const auto id : a.layer_states(layer)) {
        dist[a.state(id).label] += mass[id];
    }
    return dist;
}

namespace {

std::string label_text(Label label, const PropositionSet& props) {
    std::string bits;
    for (std::size_t i = 0; i < props.size(); ++i) {
        bits.push_back(((label >> i) & 1u) ? '1' : '0');
    }
    return bits;
}

}  // namespace

std::string to_dot(const VideoAutomaton& a, const PropositionSet& props) {
    std::ostringstream os;
    os << "digraph video_automaton {\n  rankdir=LR;\n";
    for (VideoAutomaton::StateId id = 0; id < a.n_states(); ++id) {
        const auto& s = a.state(id);
        os << "  q" << id << " [label=\"";
        switch (s.kind) {
            case VideoAutomaton::StateKind::initial: os << "initial"; break;
            case VideoAutomaton::StateKind::terminal: os << "terminal"; break;
            case VideoAutomaton::StateKind::frame:
                os << "L" << s.layer << ":" << label_text(s.label, props);
                break;
        }
        os << "\"];\n";
    }
    for (const auto& [edge, p] : a.transitions()) {
        os << "  q" << edge.first << " -> q" << edge.second << " [label=\"" << p << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace vidtl
