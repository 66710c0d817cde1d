#include "vidtl/confidence.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vidtl {

namespace {

void check_probability(double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(Errc::invalid_argument,
                    "confidence " + std::to_string(v) + " outside [0,1]");
    }
}

}  // namespace

ConfidenceMatrix::ConfidenceMatrix(std::size_t n_props, std::size_t n_frames, double fill)
    : n_props_(n_props), n_frames_(n_frames) {
    if (n_props == 0 || n_frames == 0) {
        throw Error(Errc::dimension_mismatch, "confidence matrix dimensions must be positive");
    }
    check_probability(fill);
    values_.assign(n_props * n_frames, fill);
}

ConfidenceMatrix ConfidenceMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
        throw Error(Errc::dimension_mismatch, "confidence matrix dimensions must be positive");
    }
    ConfidenceMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.n_frames_) {
            throw Error(Errc::dimension_mismatch, "ragged confidence rows");
        }
        for (std::size_t j = 0; j < rows[i].size(); ++j) m.set(i, j, rows[i][j]);
    }
    return m;
}

void ConfidenceMatrix::check_indices(std::size_t prop, std::size_t frame) const {
    if (prop >= n_props_ || frame >= n_frames_) {
        throw Error(Errc::index_out_of_range,
                    "matrix index (" + std::to_string(prop) + ", " + std::to_string(frame) +
                        ") out of range for " + std::to_string(n_props_) + "x" +
                        std::to_string(n_frames_));
    }
}

double ConfidenceMatrix::at(std::size_t prop, std::size_t frame) const {
    check_indices(prop, frame);
    return values_[prop * n_frames_ + frame];
}

void ConfidenceMatrix::set(std::size_t prop, std::size_t frame, double value) {
    check_indices(prop, frame);
    check_probability(value);
    values_[prop * n_frames_ + frame] = value;
}

ConfidenceMatrix ConfidenceMatrix::prefix(std::size_t n_frames) const {
    if (n_frames == 0 || n_frames > n_frames_) {
        throw Error(Errc::index_out_of_range,
                    "prefix length " + std::to_string(n_frames) + " out of range");
    }
    ConfidenceMatrix out(n_props_, n_frames);
    for (std::size_t i = 0; i < n_props_; ++i) {
        for (std::size_t j = 0; j < n_frames; ++j) out.set(i, j, at(i, j));
    }
    return out;
}

bool ConfidenceMatrix::operator==(const ConfidenceMatrix& other) const {
    return n_props_ == other.n_props_ && n_frames_ == other.n_frames_ &&
           values_ == other.values_;
}

std::string scores_to_json(const std::vector<std::string>& propositions,
                           const ConfidenceMatrix& matrix) {
    if (propositions.size() != matrix.n_props()) {
        throw Error(Errc::dimension_mismatch, "proposition list does not match matrix rows");
    }
    nlohmann::json j;
    j["propositions"] = propositions;
    j["frames"] = matrix.n_frames();
    auto scores = nlohmann::json::array();
    for (std::size_t frame = 0; frame < matrix.n_frames(); ++frame) {
        auto row = nlohmann::json::array();
        for (std::size_t prop = 0; prop < matrix.n_props(); ++prop) {
            row.push_back(matrix.at(prop, frame));
        }
        scores.push_back(std::move(row));
    }
    j["scores"] = std::move(scores);
    return j.dump(2) + "\n";
}

ScoresFile scores_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::io_error, std::string("scores file is not valid JSON: ") + e.what());
    }
    if (!j.contains("propositions") || !j.contains("scores")) {
        throw Error(Errc::io_error, "scores file needs \"propositions\" and \"scores\"");
    }
    auto propositions = j["propositions"].get<std::vector<std::string>>();
    auto frame_rows = j["scores"].get<std::vector<std::vector<double>>>();
    if (frame_rows.empty() || propositions.empty()) {
        throw Error(Errc::dimension_mismatch, "scores file has no frames or no propositions");
    }
    if (j.contains("frames") && j["frames"].get<std::size_t>() != frame_rows.size()) {
        throw Error(Errc::dimension_mismatch, "\"frames\" does not match the score row count");
    }
    ConfidenceMatrix m(propositions.size(), frame_rows.size());
    for (std::size_t frame = 0; frame < frame_rows.size(); ++frame) {
        if (frame_rows[frame].size() != propositions.size()) {
            throw Error(Errc::dimension_mismatch,
                        "frame " + std::to_string(frame + 1) + " has " +
                            std::to_string(frame_rows[frame].size()) + " scores, expected " +
                            std::to_string(propositions.size()));
        }
        for (std::size_t prop = 0; prop < propositions.size(); ++prop) {
            m.set(prop, frame, frame_rows[frame][prop]);
        }
    }
    return ScoresFile{std::move(propositions), std::move(m)};
}

ScoresFile load_scores_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open scores file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return scores_from_json(buf.str());
}

void save_scores_file(const std::filesystem::path& path,
                      const std::vector<std::string>& propositions,
                      const ConfidenceMatrix& matrix) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::io_error, "cannot write scores file " + path.string());
    out << scores_to_json(propositions, matrix);
}

}  // namespace vidtl
