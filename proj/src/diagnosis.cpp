#include "vidtl/diagnosis.hpp"

#include <algorithm>
#include <random>

#include "json.hpp"

namespace vidtl {

ConfidenceMatrix forced_confidence_set(const ConfidenceMatrix& C, std::size_t prop) {
    if (prop >= C.n_props()) {
        throw Error(Errc::index_out_of_range,
                    "proposition index " + std::to_string(prop) + " out of range");
    }
    ConfidenceMatrix out = C;
    for (std::size_t frame = 0; frame < C.n_frames(); ++frame) out.set(prop, frame, 1.0);
    return out;
}

WeakestResult weakest_proposition(const PropositionSet& props, const ConfidenceMatrix& C,
                                  const Formula& f, const CheckOptions& options) {
    if (props.empty()) {
        throw Error(Errc::invalid_argument, "weakest_proposition needs at least one proposition");
    }
    WeakestResult result;
    result.base_probability = satisfaction_probability(props, C, f, options).probability;
    result.deltas.resize(props.size());
    for (std::size_t i = 0; i < props.size(); ++i) {
        const ConfidenceMatrix forced = forced_confidence_set(C, i);
        const double forced_p = satisfaction_probability(props, forced, f, options).probability;
        result.deltas[i] = forced_p - result.base_probability;
    }
    result.weakest = 0;
    for (std::size_t i = 1; i < result.deltas.size(); ++i) {
        if (result.deltas[i] > result.deltas[result.weakest]) result.weakest = i;
    }
    return result;
}

LocalizeResult localize_frame(const PropositionSet& props, const ConfidenceMatrix& C,
                              const Formula& f, std::size_t weakest, double gamma,
                              std::optional<std::uint64_t> noise_seed,
                              const CheckOptions& options) {
    if (weakest >= C.n_props()) {
        throw Error(Errc::index_out_of_range,
                    "proposition index " + std::to_string(weakest) + " out of range");
    }
    if (!(gamma >= 0.0 && gamma <= 0.01)) {
        throw Error(Errc::invalid_argument,
                    "gamma " + std::to_string(gamma) + " outside [0, 0.01]");
    }

    std::mt19937_64 rng(noise_seed.value_or(0));
    std::uniform_real_distribution<double> noise(0.0, gamma);
    auto nudge = [&](double c) {
        const double offset = noise_seed ? noise(rng) : gamma;
        return std::min(c + offset, 1.0);
    };

    LocalizeResult result;
    result.frame_scores.resize(C.n_frames());
    for (std::size_t n = 1; n <= C.n_frames(); ++n) {
        ConfidenceMatrix segment(C.n_props(), n);
        for (std::size_t i = 0; i < C.n_props(); ++i) {
            for (std::size_t j = 0; j < n; ++j) segment.set(i, j, nudge(C.at(i, j)));
        }
        segment.set(weakest, n - 1, 1.0);
        result.frame_scores[n - 1] =
            satisfaction_probability(props, segment, f, options).probability;
    }

    result.impacted_index = 1;
    for (std::size_t n = 1; n <= C.n_frames(); ++n) {
        if (result.frame_scores[n - 1] >= result.frame_scores[result.impacted_index - 1]) {
            result.impacted_index = n;  // >= keeps the largest n on ties
        }
    }
    return result;
}

DiagnosisReport diagnose(const PropositionSet& props, const ConfidenceMatrix& C,
                         const Formula& f, double gamma, const CheckOptions& options) {
    const WeakestResult weak = weakest_proposition(props, C, f, options);
    const LocalizeResult loc =
        localize_frame(props, C, f, weak.weakest, gamma, std::nullopt, options);
    DiagnosisReport report;
    report.base_probability = weak.base_probability;
    report.deltas = weak.deltas;
    report.weakest = weak.weakest;
    report.frame_scores = loc.frame_scores;
    report.impacted_index = loc.impacted_index;
    report.gamma = gamma;
    return report;
}

std::string DiagnosisReport::to_json() const {
    nlohmann::json j;
    j["base_probability"] = base_probability;
    j["deltas"] = deltas;
    j["weakest"] = weakest;
    j["frame_scores"] = frame_scores;
    j["impacted_index"] = impacted_index;
    j["gamma"] = gamma;
    return j.dump(2) + "\n";
}

DiagnosisReport DiagnosisReport::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::io_error, std::string("diagnosis report is not valid JSON: ") + e.what());
    }
    DiagnosisReport report;
    report.base_probability = j.at("base_probability").get<double>();
    report.deltas = j.at("deltas").get<std::vector<double>>();
    report.weakest = j.at("weakest").get<std::size_t>();
    report.frame_scores = j.at("frame_scores").get<std::vector<double>>();
    report.impacted_index = j.at("impacted_index").get<std::size_t>();
    report.gamma = j.at("gamma").get<double>();
    return report;
}

}  // namespace vidtl
