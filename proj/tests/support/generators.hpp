#pragma once

#include <random>
#include <string>
#include <vector>

#include "vidtl/confidence.hpp"
#include "vidtl/tl.hpp"

namespace vidtl::testing {

inline PropositionSet make_props(std::size_t n) {
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) texts.push_back("p" + std::to_string(i));
    return PropositionSet(std::move(texts));
}

struct FormulaGenOptions {
    bool allow_seq = false;
    bool positive_only = false;  // no negation/implication: every atom positive
};

inline Formula random_formula(std::mt19937_64& rng, std::size_t n_props, int depth,
                              const FormulaGenOptions& opts = {}) {
    std::uniform_int_distribution<std::size_t> prop(0, n_props - 1);
    if (depth <= 0) return Formula::atom(prop(rng));

    // Operator menu; leaf bias rises as depth shrinks.
    std::vector<int> menu = {0, 1, 2, 3, 4, 5, 6};  // atom and or next always eventually until
    if (!opts.positive_only) {
        menu.push_back(7);  // negation
        menu.push_back(8);  // implication
    }
    if (opts.allow_seq) menu.push_back(9);
    std::uniform_int_distribution<std::size_t> pick(0, menu.size() - 1);
    auto sub = [&](int d) { return random_formula(rng, n_props, d, opts); };
    switch (menu[pick(rng)]) {
        case 0: return Formula::atom(prop(rng));
        case 1: return Formula::conjunction(sub(depth - 1), sub(depth - 1));
        case 2: return Formula::disjunction(sub(depth - 1), sub(depth - 1));
        case 3: return Formula::next(sub(depth - 1));
        case 4: return Formula::always(sub(depth - 1));
        case 5: return Formula::eventually(sub(depth - 1));
        case 6: return Formula::until(sub(depth - 1), sub(depth - 1));
        case 7: return Formula::negation(sub(depth - 1));
        case 8: return Formula::implication(sub(depth - 1), sub(depth - 1));
        default: return Formula::seq(sub(depth - 1), sub(depth - 1));
    }
}

inline Trace random_trace(std::mt19937_64& rng, std::size_t n_props, std::size_t length) {
    std::uniform_int_distribution<Label> label(0, (Label{1} << n_props) - 1);
    Trace t(length);
    for (auto& step : t) step = label(rng);
    return t;
}

inline ConfidenceMatrix random_matrix(std::mt19937_64& rng, std::size_t n_props,
                                      std::size_t n_frames) {
    std::uniform_real_distribution<double> value(0.0, 1.0);
    ConfidenceMatrix m(n_props, n_frames);
    for (std::size_t i = 0; i < n_props; ++i) {
        for (std::size_t j = 0; j < n_frames; ++j) m.set(i, j, value(rng));
    }
    return m;
}

}  // namespace vidtl::testing
