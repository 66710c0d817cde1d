#include "vidtl/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vidtl {

double token_confidence(const std::vector<TokenProb>& tokens) {
    if (tokens.empty()) {
        throw Error(Errc::empty_response, "no response tokens to score");
    }
    double product = 1.0;
    for (const auto& t : tokens) {
        if (!(t.probability > 0.0 && t.probability <= 1.0)) {
            throw Error(Errc::invalid_argument,
                        "token probability " + std::to_string(t.probability) +
                            " outside (0,1]");
        }
        product *= t.probability;
    }
    return std::clamp(product, 0.0, 1.0);
}

namespace {

void check_two_classes(const std::vector<LabeledScore>& data) {
    bool has_pos = false;
    bool has_neg = false;
    for (const auto& d : data) {
        (d.positive ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
        throw Error(Errc::degenerate_dataset,
                    "threshold search needs at least one positive and one negative example");
    }
}

std::vector<double> candidate_thresholds(const std::vector<LabeledScore>& data) {
    std::set<double> scores;
    for (const auto& d : data) scores.insert(d.score);
    return std::vector<double>(scores.begin(), scores.end());
}

}  // namespace

double threshold_accuracy(const std::vector<LabeledScore>& data, double threshold) {
    if (data.empty()) throw Error(Errc::degenerate_dataset, "empty dataset");
    std::size_t correct = 0;
    for (const auto& d : data) {
        const bool predicted = d.score >= threshold;
        if (predicted == d.positive) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

double optimal_threshold(const std::vector<LabeledScore>& data) {
    check_two_classes(data);
    double best_threshold = 0.0;
    double best_accuracy = -1.0;
    for (const double tau : candidate_thresholds(data)) {
        const double acc = threshold_accuracy(data, tau);
        if (acc > best_accuracy) {  // strict: keeps the smallest tau on ties
            best_accuracy = acc;
            best_threshold = tau;
        }
    }
    return best_threshold;
}

std::vector<RocPoint> roc_curve(const std::vector<LabeledScore>& data) {
    check_two_classes(data);
    double positives = 0;
    double negatives = 0;
    for (const auto& d : data) {
        (d.positive ? positives : negatives) += 1;
    }
    std::vector<RocPoint> points;
    points.push_back({0.0, 0.0});
    points.push_back({1.0, 1.0});
    for (const double tau : candidate_thresholds(data)) {
        double tp = 0;
        double fp = 0;
        for (const auto& d : data) {
            if (d.score >= tau) {
                (d.positive ? tp : fp) += 1;
            }
        }
        points.push_back({fp / negatives, tp / positives});
    }
    std::sort(points.begin(), points.end(), [](const RocPoint& a, const RocPoint& b) {
        return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
    });
    points.erase(std::unique(points.begin(), points.end(),
                             [](const RocPoint& a, const RocPoint& b) {
                                 return a.fpr == b.fpr && a.tpr == b.tpr;
                             }),
                 points.end());
    return points;
}

double roc_auc(const std::vector<RocPoint>& points) {
    if (points.size() < 2) throw Error(Errc::invalid_argument, "ROC curve needs >= 2 points");
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double dx = points[i].fpr - points[i - 1].fpr;
        area += dx * (points[i].tpr + points[i - 1].tpr) / 2.0;
    }
    return area;
}

double apply_calibration(const CalibrationModel& model, double raw) {
    if (!(raw >= 0.0 && raw <= 1.0)) {
        throw Error(Errc::invalid_argument, "raw score " + std::to_string(raw) + " outside [0,1]");
    }
    // Degenerate endpoints would make the (0,0)/(tau,0.5)/(1,1) anchors
    // contradictory; keep the boundary strictly interior.
    const double tau = std::clamp(model.threshold, 1e-9, 1.0 - 1e-9);
    if (raw < tau) return 0.5 * raw / tau;
    return 0.5 + 0.5 * (raw - tau) / (1.0 - tau);
}

CalibrationModel CalibrationModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open calibration model " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::io_error, std::string("calibration model is not valid JSON: ") + e.what());
    }
    CalibrationModel m;
    m.threshold = j.at("threshold").get<double>();
    if (!(m.threshold >= 0.0 && m.threshold <= 1.0)) {
        throw Error(Errc::invalid_config, "calibration threshold outside [0,1]");
    }
    return m;
}

void CalibrationModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(Errc::io_error, "cannot write calibration model " + path.string());
    nlohmann::json j;
    j["threshold"] = threshold;
    out << j.dump(2) << "\n";
}

std::vector<LabeledScore> load_labeled_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open pairs file " + path.string());
    std::vector<LabeledScore> data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::stringstream row(line);
        std::string score_text;
        std::string label_text;
        if (!std::getline(row, score_text, ',') || !std::getline(row, label_text)) {
            throw Error(Errc::io_error,
                        "line " + std::to_string(line_no) + ": expected `score,label`");
        }
        try {
            const double score = std::stod(score_text);
            const int label = std::stoi(label_text);
            if (label != 0 && label != 1) {
                throw Error(Errc::io_error,
                            "line " + std::to_string(line_no) + ": label must be 0 or 1");
            }
            data.push_back({score, label == 1});
        } catch (const std::invalid_argument&) {
            if (line_no == 1) continue;  // header
            throw Error(Errc::io_error,
                        "line " + std::to_string(line_no) + ": not numeric: " + line);
        }
    }
    return data;
}

}  // namespace vidtl
