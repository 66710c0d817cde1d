#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "vidtl/errors.hpp"
#include "vidtl/tl.hpp"

namespace vidtl {

/// Per-frame, per-proposition calibrated scores in [0,1]. Row i holds the
/// scores of proposition i across all frames.
class ConfidenceMatrix {
  public:
    ConfidenceMatrix(std::size_t n_props, std::size_t n_frames, double fill = 0.0);

    /// Build from proposition-major rows: rows[i][j] is the score of
    /// proposition i at frame j. All rows must have equal, nonzero length.
    static ConfidenceMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t n_props() const { return n_props_; }
    std::size_t n_frames() const { return n_frames_; }

    double at(std::size_t prop, std::size_t frame) const;
    void set(std::size_t prop, std::size_t frame, double value);

    /// Copy of the first `n_frames` columns.
    ConfidenceMatrix prefix(std::size_t n_frames) const;

    bool operator==(const ConfidenceMatrix& other) const;

  private:
    void check_indices(std::size_t prop, std::size_t frame) const;

    std::size_t n_props_;
    std::size_t n_frames_;
    std::vector<double> values_;  // row-major, rows = propositions
};

/// On-disk scores: { "propositions": [...], "frames": N, "scores": [[...]] }
/// where scores[j][i] is the score of proposition i at frame j (frame-major,
/// the transpose of the in-memory layout).
struct ScoresFile {
    std::vector<std::string> propositions;
    ConfidenceMatrix matrix;
};

ScoresFile load_scores_file(const std::filesystem::path& path);
void save_scores_file(const std::filesystem::path& path,
                      const std::vector<std::string>& propositions,
                      const ConfidenceMatrix& matrix);
std::string scores_to_json(const std::vector<std::string>& propositions,
                           const ConfidenceMatrix& matrix);
ScoresFile scores_from_json(const std::string& text);

}  // namespace vidtl
