#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vidtl/checker.hpp"
#include "vidtl/clients.hpp"
#include "vidtl/diagnosis.hpp"
#include "vidtl/video_io.hpp"

namespace vidtl {

struct RefinementConfig {
    double theta = 0.7;                   // stop once satisfaction reaches this
    std::optional<std::size_t> kappa;     // iteration cap; defaults to |propositions|
    double gamma = 1e-4;
    double sampling_rate = 1.0;           // frames per second
    bool keyframe_editing = false;        // off by default; costs visual quality
    std::filesystem::path workspace = "runs";
    std::optional<std::filesystem::path> calibration_model;  // identity when absent
    std::string run_id;                   // derived from the prompt when empty
    int scoring_parallelism = 1;
    CheckOptions check;

    void validate() const;
};

struct IterationRecord {
    std::size_t iteration = 0;       // 1-based
    std::string scores_path;         // run-relative
    double probability = 0.0;        // before this round's regeneration
    DiagnosisReport diagnosis;
    std::string t_new;
    std::size_t keyframe_index = 0;  // 1-based sampled-frame index
    bool keyframe_edited = false;
    std::string segment_path;        // run-relative
    std::string video_path;          // run-relative stitched result
};

struct RunManifest {
    std::string prompt;
    std::vector<std::string> propositions;
    std::string formula;
    double theta = 0.7;
    std::size_t kappa = 0;
    double gamma = 0.0;
    double sampling_rate = 0.0;
    bool keyframe_editing = false;
    std::string feedback_template;  // continuation-request phrasing used this run
    std::vector<IterationRecord> iterations;
    double final_probability = 0.0;
    std::string final_scores_path;
    std::string final_video_path;
    std::string stop_reason;  // threshold_met | iteration_cap | already_satisfied | client_failure
    std::string failure;      // stage and cause when stop_reason is client_failure

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
};

struct VerifyOutcome {
    double probability = 0.0;
    ConfidenceMatrix scores;
};

/// Sample the video, score every (proposition, frame) pair, and check the
/// resulting matrix. The matrix is fully assembled before anything is
/// returned; a scorer failure mid-matrix leaves no partial output.
VerifyOutcome verify_once(const VideoHandle& video, const PropositionSet& props,
                          const Formula& formula, VisionClient& vision,
                          const CalibrationModel& cal, double sampling_rate,
                          int parallelism = 1, const CheckOptions& check = {});

struct RefineResult {
    VideoHandle video;
    RunManifest manifest;
    std::filesystem::path manifest_path;
};

/// The full refinement loop: generate, decompose, then verify / diagnose /
/// trim / regenerate / stitch until the satisfaction threshold is met, the
/// iteration cap is reached, or a client fails (recorded in the manifest).
/// The manifest is persisted after every iteration.
RefineResult refine(const std::string& prompt, const RefinementConfig& config,
                    ClientBundle& clients);

/// Stable id for a run: hash of the prompt and the knobs that shape outputs.
std::string derive_run_id(const std::string& prompt, const RefinementConfig& config);

}  // namespace vidtl
