#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vidtl/errors.hpp"

namespace vidtl {

/// One response token with its post-softmax probability.
struct TokenProb {
    std::string token;
    double probability = 1.0;
};

/// A raw confidence score paired with its ground-truth label.
struct LabeledScore {
    double score = 0.0;
    bool positive = false;
};

/// Two-piece linear calibration map anchored at (threshold, 0.5): scores
/// below the decision boundary land in [0, 0.5), scores above in [0.5, 1].
/// Monotone and rank-preserving.
struct CalibrationModel {
    double threshold = 0.5;

    static CalibrationModel identity() { return CalibrationModel{0.5}; }
    static CalibrationModel load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

/// Product of the response-token probabilities, clamped to [0,1].
double token_confidence(const std::vector<TokenProb>& tokens);

/// Accuracy-maximizing decision threshold, sweeping the observed scores as
/// candidates (score >= threshold classifies as positive). Ties break toward
/// the smallest candidate. Needs both classes present.
double optimal_threshold(const std::vector<LabeledScore>& data);

/// Classification accuracy of `threshold` on `data`.
double threshold_accuracy(const std::vector<LabeledScore>& data, double threshold);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

/// One (FPR, TPR) point per candidate threshold plus the (0,0) and (1,1)
/// anchors, sorted by FPR then TPR, duplicates removed.
std::vector<RocPoint> roc_curve(const std::vector<LabeledScore>& data);

/// Trapezoidal area under a curve from roc_curve.
double roc_auc(const std::vector<RocPoint>& points);

/// Apply the piecewise-linear calibration map to a raw score in [0,1].
double apply_calibration(const CalibrationModel& model, double raw);

/// CSV rows of `score,label` with label in {1,0}; a non-numeric first line is
/// treated as a header and skipped.
std::vector<LabeledScore> load_labeled_scores_csv(const std::filesystem::path& path);

}  // namespace vidtl
