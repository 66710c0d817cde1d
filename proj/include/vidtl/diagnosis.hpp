#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vidtl/checker.hpp"
#include "vidtl/confidence.hpp"
#include "vidtl/tl.hpp"

namespace vidtl {

/// Counterfactual diagnosis of a failing verification: which proposition,
/// when forced to certainty, recovers the most probability mass, and at which
/// frame prefix that forcing pays off the most.
struct DiagnosisReport {
    double base_probability = 0.0;
    std::vector<double> deltas;        // per proposition, forced minus base
    std::size_t weakest = 0;           // argmax delta, smallest index on ties
    std::vector<double> frame_scores;  // z_n per frame prefix
    std::size_t impacted_index = 1;    // 1-based; argmax z_n, largest n on ties
    double gamma = 0.0;

    std::string to_json() const;
    static DiagnosisReport from_json(const std::string& text);
};

/// Copy of C with row `prop` forced to 1.0 at every frame.
ConfidenceMatrix forced_confidence_set(const ConfidenceMatrix& C, std::size_t prop);

struct WeakestResult {
    std::size_t weakest = 0;
    std::vector<double> deltas;
    double base_probability = 0.0;
};

/// For each proposition, the satisfaction-probability gain from forcing its
/// row to certainty; the weakest proposition maximizes the gain.
WeakestResult weakest_proposition(const PropositionSet& props, const ConfidenceMatrix& C,
                                  const Formula& f, const CheckOptions& options = {});

struct LocalizeResult {
    std::size_t impacted_index = 1;  // 1-based frame index
    std::vector<double> frame_scores;
};

/// For each frame n, check the prefix 1..n with the weakest proposition
/// forced to certainty at frame n and every other entry nudged by gamma
/// (clamped to 1). The impacted frame maximizes that score; ties go to the
/// largest n so trimming preserves more of the original video.
///
/// With `noise_seed` set, the nudge is drawn uniformly from [0, gamma] per
/// entry instead of being the constant gamma.
LocalizeResult localize_frame(const PropositionSet& props, const ConfidenceMatrix& C,
                              const Formula& f, std::size_t weakest, double gamma,
                              std::optional<std::uint64_t> noise_seed = std::nullopt,
                              const CheckOptions& options = {});

/// Base satisfaction, weakest proposition, and impacted frame in one report.
DiagnosisReport diagnose(const PropositionSet& props, const ConfidenceMatrix& C,
                         const Formula& f, double gamma = 1e-4,
                         const CheckOptions& options = {});

}  // namespace vidtl
