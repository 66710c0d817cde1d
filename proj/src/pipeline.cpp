#include "vidtl/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"

namespace vidtl {

namespace fs = std::filesystem;

void RefinementConfig::validate() const {
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw Error(Errc::invalid_config, "theta must lie in (0, 1]");
    }
    if (kappa && *kappa < 1) throw Error(Errc::invalid_config, "kappa must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 0.01)) {
        throw Error(Errc::invalid_config, "gamma must lie in [0, 0.01]");
    }
    if (sampling_rate <= 0.0) throw Error(Errc::invalid_config, "sampling rate must be positive");
    if (scoring_parallelism < 1) throw Error(Errc::invalid_config, "parallelism must be >= 1");
}

// ---------------------------------------------------------------------------
// Manifest serialization

namespace {

nlohmann::json record_to_json(const IterationRecord& r) {
    return nlohmann::json{
        {"iteration", r.iteration},
        {"scores", r.scores_path},
        {"probability", r.probability},
        {"diagnosis", nlohmann::json::parse(r.diagnosis.to_json())},
        {"t_new", r.t_new},
        {"keyframe_index", r.keyframe_index},
        {"keyframe_edited", r.keyframe_edited},
        {"segment", r.segment_path},
        {"video", r.video_path},
    };
}

IterationRecord record_from_json(const nlohmann::json& j) {
    IterationRecord r;
    r.iteration = j.at("iteration").get<std::size_t>();
    r.scores_path = j.at("scores").get<std::string>();
    r.probability = j.at("probability").get<double>();
    r.diagnosis = DiagnosisReport::from_json(j.at("diagnosis").dump());
    r.t_new = j.at("t_new").get<std::string>();
    r.keyframe_index = j.at("keyframe_index").get<std::size_t>();
    r.keyframe_edited = j.at("keyframe_edited").get<bool>();
    r.segment_path = j.at("segment").get<std::string>();
    r.video_path = j.at("video").get<std::string>();
    return r;
}

}  // namespace

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["prompt"] = prompt;
    j["propositions"] = propositions;
    j["formula"] = formula;
    j["theta"] = theta;
    j["kappa"] = kappa;
    j["gamma"] = gamma;
    j["sampling_rate"] = sampling_rate;
    j["keyframe_editing"] = keyframe_editing;
    j["feedback_template"] = feedback_template;
    auto iters = nlohmann::json::array();
    for (const auto& r : iterations) iters.push_back(record_to_json(r));
    j["iterations"] = std::move(iters);
    j["final_probability"] = final_probability;
    j["final_scores"] = final_scores_path;
    j["final_video"] = final_video_path;
    j["stop_reason"] = stop_reason;
    j["failure"] = failure;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::io_error, std::string("manifest is not valid JSON: ") + e.what());
    }
    RunManifest m;
    m.prompt = j.at("prompt").get<std::string>();
    m.propositions = j.at("propositions").get<std::vector<std::string>>();
    m.formula = j.at("formula").get<std::string>();
    m.theta = j.at("theta").get<double>();
    m.kappa = j.at("kappa").get<std::size_t>();
    m.gamma = j.at("gamma").get<double>();
    m.sampling_rate = j.at("sampling_rate").get<double>();
    m.keyframe_editing = j.at("keyframe_editing").get<bool>();
    m.feedback_template = j.at("feedback_template").get<std::string>();
    for (const auto& r : j.at("iterations")) m.iterations.push_back(record_from_json(r));
    m.final_probability = j.at("final_probability").get<double>();
    m.final_scores_path = j.at("final_scores").get<std::string>();
    m.final_video_path = j.at("final_video").get<std::string>();
    m.stop_reason = j.at("stop_reason").get<std::string>();
    m.failure = j.at("failure").get<std::string>();
    return m;
}

// ---------------------------------------------------------------------------
// verify_once

namespace {

std::string read_payload(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot read frame " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void score_frame_range(VisionClient& vision, const PropositionSet& props,
                       const FrameSequence& seq, const CalibrationModel& cal,
                       std::size_t first_frame, std::size_t last_frame, ConfidenceMatrix& out) {
    for (std::size_t frame = first_frame; frame < last_frame; ++frame) {
        const std::string payload = read_payload(seq.frames[frame].path);
        for (std::size_t prop = 0; prop < props.size(); ++prop) {
            out.set(prop, frame, score_frame(vision, props.at(prop), payload, cal));
        }
    }
}

}  // namespace

VerifyOutcome verify_once(const VideoHandle& video, const PropositionSet& props,
                          const Formula& formula, VisionClient& vision,
                          const CalibrationModel& cal, double sampling_rate, int parallelism,
                          const CheckOptions& check) {
    const FrameSequence seq = sample_frames(video, sampling_rate);
    ConfidenceMatrix scores(props.size(), seq.size());

    if (parallelism <= 1 || seq.size() < 2) {
        score_frame_range(vision, props, seq, cal, 0, seq.size(), scores);
    } else {
        const std::size_t chunks =
            std::min<std::size_t>(static_cast<std::size_t>(parallelism), seq.size());
        const std::size_t per_chunk = (seq.size() + chunks - 1) / chunks;
        std::vector<std::future<void>> futures;
        for (std::size_t c = 0; c < chunks; ++c) {
            const std::size_t first = c * per_chunk;
            const std::size_t last = std::min(seq.size(), first + per_chunk);
            if (first >= last) break;
            futures.push_back(std::async(std::launch::async, [&, first, last] {
                score_frame_range(vision, props, seq, cal, first, last, scores);
            }));
        }
        for (auto& f : futures) f.get();  // rethrows the first failure
    }

    const double probability =
        satisfaction_probability(props, scores, formula, check).probability;
    return VerifyOutcome{probability, std::move(scores)};
}

// ---------------------------------------------------------------------------
// refine

std::string derive_run_id(const std::string& prompt, const RefinementConfig& config) {
    // FNV-1a over the inputs that shape the run.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
        for (const unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    mix(prompt);
    mix(std::to_string(config.theta));
    mix(std::to_string(config.gamma));
    mix(std::to_string(config.sampling_rate));
    mix(config.keyframe_editing ? "edit" : "noedit");
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

namespace {

struct RunWorkspace {
    fs::path root;

    fs::path iter_dir(std::size_t k) const { return root / ("iter-" + std::to_string(k)); }

    std::string rel(const fs::path& p) const {
        return fs::relative(p, root).generic_string();
    }
};

/// Client-traffic audit trail, one JSON object per line under the run root.
/// Sequence numbers instead of timestamps keep reruns byte-identical.
class AuditLog {
  public:
    explicit AuditLog(const fs::path& path) : out_(path, std::ios::trunc) {}

    void note(const std::string& stage, const std::string& detail) {
        if (!out_) return;
        out_ << nlohmann::json{{"seq", seq_++}, {"stage", stage}, {"detail", detail}}.dump()
             << "\n";
        out_.flush();
    }

  private:
    std::ofstream out_;
    std::size_t seq_ = 0;
};

void persist_manifest(const RunWorkspace& ws, const RunManifest& manifest) {
    std::ofstream out(ws.root / "manifest.json");
    if (!out) throw Error(Errc::io_error, "cannot write manifest under " + ws.root.string());
    out << manifest.to_json();
}

void write_scores(const fs::path& path, const PropositionSet& props,
                  const ConfidenceMatrix& scores) {
    save_scores_file(path, props.texts(), scores);
}

}  // namespace

RefineResult refine(const std::string& prompt, const RefinementConfig& config,
                    ClientBundle& clients) {
    config.validate();
    if (prompt.empty()) throw Error(Errc::invalid_argument, "prompt must be non-empty");

    const std::string run_id = config.run_id.empty() ? derive_run_id(prompt, config)
                                                     : config.run_id;
    RunWorkspace ws{config.workspace / ("run-" + run_id)};
    fs::create_directories(ws.root);

    const CalibrationModel cal = config.calibration_model
                                     ? CalibrationModel::load(*config.calibration_model)
                                     : CalibrationModel::identity();

    RunManifest manifest;
    manifest.prompt = prompt;
    manifest.theta = config.theta;
    manifest.gamma = config.gamma;
    manifest.sampling_rate = config.sampling_rate;
    manifest.keyframe_editing = config.keyframe_editing;
    manifest.feedback_template = continuation_feedback_template();

    AuditLog audit(ws.root / "audit.jsonl");
    VideoHandle video;
    std::string stage = "generate";
    try {
        const fs::path initial_dir = ws.root / "initial" / "video";
        audit.note(stage, "prompt: " + prompt);
        video = clients.video->generate(GenerationRequest{prompt, std::nullopt}, initial_dir);
        audit.note(stage, "video: " + ws.rel(video.path));

        stage = "decompose";
        const DecompositionResult decomposition = decompose_prompt(*clients.chat, prompt);
        audit.note(stage, "formula: " + decomposition.formula_text);
        manifest.propositions = decomposition.props.texts();
        manifest.formula = decomposition.formula_text;

        const std::size_t kappa = config.kappa.value_or(decomposition.props.size());
        manifest.kappa = kappa;
        persist_manifest(ws, manifest);

        while (true) {
            stage = "score";
            const VerifyOutcome outcome =
                verify_once(video, decomposition.props, decomposition.formula, *clients.vision,
                            cal, config.sampling_rate, config.scoring_parallelism, config.check);
            audit.note(stage, "probability: " + std::to_string(outcome.probability));

            if (outcome.probability >= config.theta) {
                const fs::path scores_path = ws.root / "final" / "scores.json";
                fs::create_directories(scores_path.parent_path());
                write_scores(scores_path, decomposition.props, outcome.scores);
                manifest.final_probability = outcome.probability;
                manifest.final_scores_path = ws.rel(scores_path);
                manifest.final_video_path = ws.rel(video.path);
                manifest.stop_reason =
                    manifest.iterations.empty() ? "already_satisfied" : "threshold_met";
                persist_manifest(ws, manifest);
                return RefineResult{video, manifest, ws.root / "manifest.json"};
            }

            const std::size_t iteration = manifest.iterations.size() + 1;
            if (iteration > kappa) {
                const fs::path scores_path = ws.root / "final" / "scores.json";
                fs::create_directories(scores_path.parent_path());
                write_scores(scores_path, decomposition.props, outcome.scores);
                manifest.final_probability = outcome.probability;
                manifest.final_scores_path = ws.rel(scores_path);
                manifest.final_video_path = ws.rel(video.path);
                manifest.stop_reason = "iteration_cap";
                persist_manifest(ws, manifest);
                return RefineResult{video, manifest, ws.root / "manifest.json"};
            }

            const fs::path iter_dir = ws.iter_dir(iteration);
            fs::create_directories(iter_dir);
            const fs::path scores_path = iter_dir / "scores.json";
            write_scores(scores_path, decomposition.props, outcome.scores);

            stage = "diagnose";
            const DiagnosisReport report =
                diagnose(decomposition.props, outcome.scores, decomposition.formula,
                         config.gamma, config.check);
            audit.note(stage, "weakest: " + decomposition.props.at(report.weakest).text +
                                  ", impacted_index: " + std::to_string(report.impacted_index));
            {
                std::ofstream out(iter_dir / "diagnosis.json");
                out << report.to_json();
            }

            const bool no_gain =
                std::all_of(report.deltas.begin(), report.deltas.end(),
                            [](double d) { return d <= 0.0; });
            if (no_gain) {
                // Forcing any single proposition cannot improve; regeneration
                // would chase noise.
                manifest.final_probability = outcome.probability;
                manifest.final_scores_path = ws.rel(scores_path);
                manifest.final_video_path = ws.rel(video.path);
                manifest.stop_reason = "iteration_cap";
                persist_manifest(ws, manifest);
                return RefineResult{video, manifest, ws.root / "manifest.json"};
            }

            stage = "trim";
            const FrameSequence seq = sample_frames(video, config.sampling_rate);
            const fs::path trimmed_dir = iter_dir / "trimmed";
            const VideoHandle trimmed = trim(video, seq, report.impacted_index, trimmed_dir);

            fs::path keyframe = seq.frames[report.impacted_index - 1].path;
            bool edited = false;
            if (config.keyframe_editing) {
                stage = "edit_keyframe";
                keyframe = edit_keyframe(*clients.image_edit,
                                         keyframe, decomposition.props.at(report.weakest),
                                         iter_dir / ("keyframe" +
                                                     keyframe.extension().string()));
                edited = true;
            }

            stage = "continuation";
            const std::string t_new = continuation_prompt(
                *clients.chat, prompt, decomposition.props.at(report.weakest));
            audit.note(stage, "t_new: " + t_new);

            stage = "generate_segment";
            const fs::path segment_dir = iter_dir / "segment";
            const VideoHandle segment =
                clients.video->generate(GenerationRequest{t_new, keyframe}, segment_dir);
            audit.note(stage, "segment: " + ws.rel(segment.path));

            stage = "stitch";
            const fs::path stitched_dir = iter_dir / "video";
            video = stitch(trimmed, segment, stitched_dir);

            IterationRecord record;
            record.iteration = iteration;
            record.scores_path = ws.rel(scores_path);
            record.probability = outcome.probability;
            record.diagnosis = report;
            record.t_new = t_new;
            record.keyframe_index = report.impacted_index;
            record.keyframe_edited = edited;
            record.segment_path = ws.rel(segment.path);
            record.video_path = ws.rel(video.path);
            manifest.iterations.push_back(std::move(record));
            persist_manifest(ws, manifest);
        }
    } catch (const Error& e) {
        manifest.stop_reason = "client_failure";
        manifest.failure = stage + ": " + e.what();
        audit.note(stage, std::string("failure: ") + e.what());
        persist_manifest(ws, manifest);
        return RefineResult{video, manifest, ws.root / "manifest.json"};
    }
}

}  // namespace vidtl
