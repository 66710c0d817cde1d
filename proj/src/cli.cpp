#include "vidtl/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "vidtl/calibration.hpp"
#include "vidtl/checker.hpp"
#include "vidtl/diagnosis.hpp"
#include "vidtl/errors.hpp"
#include "vidtl/http_clients.hpp"
#include "vidtl/mock_clients.hpp"
#include "vidtl/pipeline.hpp"
#include "vidtl/video_io.hpp"

namespace vidtl {

namespace {

struct VerifyArgs {
    std::string scores_path;
    std::string spec_path;
    bool cross_check_oracle = false;
    std::string dot_path;
};

struct DiagnoseArgs {
    std::string scores_path;
    std::string spec_path;
    double gamma = 1e-4;
};

struct CalibrateArgs {
    std::string pairs_path;
    std::string model_out;
};

struct DecomposeArgs {
    std::string prompt;
    std::string mock_path;
    std::string config_path;
    std::string out_path;
};

struct ScoreArgs {
    std::string spec_path;
    std::string video_path;
    std::string mock_path;
    std::string config_path;
    std::string cal_path;
    double rate = 1.0;
    std::string out_path;
};

struct RefineArgs {
    std::string prompt;
    std::string config_path;
    std::string mock_path;
};

ClientConfig client_config_from_json(const nlohmann::json& j) {
    ClientConfig c;
    c.base_url = j.value("base_url", "");
    c.model = j.value("model", "");
    c.auth_env = j.value("auth_env", c.auth_env);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.parallelism = j.value("parallelism", c.parallelism);
    c.backoff_seconds = j.value("backoff_seconds", c.backoff_seconds);
    return c;
}

struct PipelineFileConfig {
    RefinementConfig refinement;
    std::optional<HttpClientConfigs> clients;
};

PipelineFileConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::invalid_config, std::string("config is not valid JSON: ") + e.what());
    }
    PipelineFileConfig cfg;
    auto& r = cfg.refinement;
    r.theta = j.value("theta", r.theta);
    if (j.contains("kappa") && !j["kappa"].is_null()) {
        r.kappa = j["kappa"].get<std::size_t>();
    }
    r.gamma = j.value("gamma", r.gamma);
    r.sampling_rate = j.value("sampling_rate", r.sampling_rate);
    r.keyframe_editing = j.value("keyframe_editing", r.keyframe_editing);
    r.workspace = j.value("workspace", r.workspace.string());
    if (j.contains("calibration_model") && !j["calibration_model"].is_null()) {
        r.calibration_model = j["calibration_model"].get<std::string>();
    }
    r.run_id = j.value("run_id", r.run_id);
    r.scoring_parallelism = j.value("scoring_parallelism", r.scoring_parallelism);
    if (j.contains("max_propositions")) {
        r.check.automaton.max_propositions = j["max_propositions"].get<std::size_t>();
    }
    if (j.contains("clients")) {
        HttpClientConfigs c;
        c.chat = client_config_from_json(j["clients"].value("chat", nlohmann::json::object()));
        c.vision =
            client_config_from_json(j["clients"].value("vision", nlohmann::json::object()));
        c.video = client_config_from_json(j["clients"].value("video", nlohmann::json::object()));
        c.image_edit =
            client_config_from_json(j["clients"].value("image_edit", nlohmann::json::object()));
        cfg.clients = c;
    }
    return cfg;
}

ClientBundle make_clients(const std::string& mock_path, const std::string& config_path) {
    if (!mock_path.empty()) return make_mock_clients(mock_path);
    if (!config_path.empty()) {
        const PipelineFileConfig cfg = load_pipeline_config(config_path);
        if (!cfg.clients) {
            throw Error(Errc::invalid_config, "config file has no \"clients\" section");
        }
        return make_http_clients(*cfg.clients);
    }
    throw Error(Errc::invalid_config, "either --mock or --config with clients is required");
}

void check_spec_matches_scores(const SpecFile& spec, const ScoresFile& scores) {
    PropositionSet from_scores(scores.propositions);
    if (!(spec.props == from_scores)) {
        throw Error(Errc::dimension_mismatch,
                    "scores file propositions do not match the spec file");
    }
}

void emit(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << "\n"; }

int cmd_verify(const VerifyArgs& args, std::ostream& out) {
    const SpecFile spec = load_spec_file(args.spec_path);
    const ScoresFile scores = load_scores_file(args.scores_path);
    check_spec_matches_scores(spec, scores);
    if (!args.dot_path.empty()) {
        std::ofstream dot(args.dot_path);
        if (!dot) throw Error(Errc::io_error, "cannot write " + args.dot_path);
        dot << to_dot(build_automaton(spec.props, scores.matrix), spec.props);
    }
    const SatisfactionResult result =
        satisfaction_probability(spec.props, scores.matrix, spec.formula);
    nlohmann::json j{{"probability", result.probability},
                     {"method", result.method},
                     {"n_frames", result.n_frames},
                     {"formula", result.formula}};
    if (args.cross_check_oracle) {
        const SatisfactionResult reference =
            oracle_satisfaction(spec.props, scores.matrix, spec.formula);
        j["oracle_probability"] = reference.probability;
        if (std::abs(reference.probability - result.probability) > 1e-9) {
            throw Error(Errc::invalid_argument,
                        "dp and oracle disagree: " + std::to_string(result.probability) +
                            " vs " + std::to_string(reference.probability));
        }
    }
    emit(out, j);
    return 0;
}

int cmd_oracle(const VerifyArgs& args, std::ostream& out) {
    const SpecFile spec = load_spec_file(args.spec_path);
    const ScoresFile scores = load_scores_file(args.scores_path);
    check_spec_matches_scores(spec, scores);
    const SatisfactionResult result =
        oracle_satisfaction(spec.props, scores.matrix, spec.formula);
    emit(out, nlohmann::json{{"probability", result.probability},
                             {"method", result.method},
                             {"n_frames", result.n_frames},
                             {"formula", result.formula}});
    return 0;
}

int cmd_diagnose(const DiagnoseArgs& args, std::ostream& out) {
    const SpecFile spec = load_spec_file(args.spec_path);
    const ScoresFile scores = load_scores_file(args.scores_path);
    check_spec_matches_scores(spec, scores);
    const DiagnosisReport report =
        diagnose(spec.props, scores.matrix, spec.formula, args.gamma);
    out << report.to_json();
    return 0;
}

int cmd_calibrate(const CalibrateArgs& args, std::ostream& out) {
    const auto data = load_labeled_scores_csv(args.pairs_path);
    const double tau = optimal_threshold(data);
    const double accuracy = threshold_accuracy(data, tau);
    const auto roc = roc_curve(data);
    auto roc_json = nlohmann::json::array();
    for (const auto& p : roc) roc_json.push_back({p.fpr, p.tpr});
    emit(out, nlohmann::json{{"threshold", tau},
                             {"accuracy", accuracy},
                             {"auc", roc_auc(roc)},
                             {"roc", roc_json}});
    if (!args.model_out.empty()) {
        CalibrationModel{tau}.save(args.model_out);
    }
    return 0;
}

int cmd_decompose(const DecomposeArgs& args, std::ostream& out) {
    ClientBundle clients = make_clients(args.mock_path, args.config_path);
    const DecompositionResult result = decompose_prompt(*clients.chat, args.prompt);
    const std::string spec_json = spec_to_json(result.props, result.formula);
    out << spec_json;
    if (!args.out_path.empty()) {
        std::ofstream file(args.out_path);
        if (!file) throw Error(Errc::io_error, "cannot write " + args.out_path);
        file << spec_json;
    }
    return 0;
}

int cmd_score(const ScoreArgs& args, std::ostream& out) {
    const SpecFile spec = load_spec_file(args.spec_path);
    ClientBundle clients = make_clients(args.mock_path, args.config_path);
    const CalibrationModel cal = args.cal_path.empty()
                                     ? CalibrationModel::identity()
                                     : CalibrationModel::load(args.cal_path);
    const VideoHandle video = open_video(args.video_path);
    const VerifyOutcome outcome =
        verify_once(video, spec.props, spec.formula, *clients.vision, cal, args.rate);
    const std::string scores_json = scores_to_json(spec.props.texts(), outcome.scores);
    out << scores_json;
    if (!args.out_path.empty()) {
        std::ofstream file(args.out_path);
        if (!file) throw Error(Errc::io_error, "cannot write " + args.out_path);
        file << scores_json;
    }
    return 0;
}

int cmd_refine(const RefineArgs& args, std::ostream& out, std::ostream& err) {
    PipelineFileConfig cfg;
    if (!args.config_path.empty()) cfg = load_pipeline_config(args.config_path);
    ClientBundle clients = !args.mock_path.empty()
                               ? make_mock_clients(args.mock_path)
                               : make_clients("", args.config_path);
    const RefineResult result = refine(args.prompt, cfg.refinement, clients);
    out << result.manifest_path.string() << "\n";
    err << "stop_reason=" << result.manifest.stop_reason
        << " final_probability=" << result.manifest.final_probability
        << " iterations=" << result.manifest.iterations.size() << "\n";
    return result.manifest.stop_reason == "client_failure" ? 1 : 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Temporal-logic verification and refinement for text-to-video outputs"};
    app.require_subcommand(1);

    VerifyArgs verify_args;
    auto* verify_cmd =
        app.add_subcommand("verify", "Satisfaction probability of scores against a spec");
    verify_cmd->add_option("--scores", verify_args.scores_path, "scores JSON file")->required();
    verify_cmd->add_option("--spec", verify_args.spec_path, "spec JSON file")->required();
    verify_cmd->add_flag("--oracle", verify_args.cross_check_oracle,
                         "also run the brute-force oracle and require agreement");
    verify_cmd->add_option("--dot", verify_args.dot_path,
                           "write the video automaton in Graphviz form");

    VerifyArgs oracle_args;
    auto* oracle_cmd =
        app.add_subcommand("oracle", "Brute-force satisfaction probability (small inputs)");
    oracle_cmd->add_option("--scores", oracle_args.scores_path, "scores JSON file")->required();
    oracle_cmd->add_option("--spec", oracle_args.spec_path, "spec JSON file")->required();

    DiagnoseArgs diagnose_args;
    auto* diagnose_cmd =
        app.add_subcommand("diagnose", "Weakest proposition and most-impacted frame");
    diagnose_cmd->add_option("--scores", diagnose_args.scores_path, "scores JSON file")
        ->required();
    diagnose_cmd->add_option("--spec", diagnose_args.spec_path, "spec JSON file")->required();
    diagnose_cmd->add_option("--gamma", diagnose_args.gamma,
                             "stability offset added to non-forced entries");

    CalibrateArgs calibrate_args;
    auto* calibrate_cmd =
        app.add_subcommand("calibrate", "Threshold search and ROC over labeled score pairs");
    calibrate_cmd->add_option("--pairs", calibrate_args.pairs_path, "CSV of score,label rows")
        ->required();
    calibrate_cmd->add_option("--out", calibrate_args.model_out, "write the calibration model");

    DecomposeArgs decompose_args;
    auto* decompose_cmd =
        app.add_subcommand("decompose", "Prompt to propositions and specification");
    decompose_cmd->add_option("--prompt", decompose_args.prompt, "video prompt")->required();
    decompose_cmd->add_option("--mock", decompose_args.mock_path, "mock scenario file");
    decompose_cmd->add_option("--config", decompose_args.config_path, "pipeline config file");
    decompose_cmd->add_option("--out", decompose_args.out_path, "also write the spec here");

    ScoreArgs score_args;
    auto* score_cmd = app.add_subcommand("score", "Score video frames against a spec");
    score_cmd->add_option("--spec", score_args.spec_path, "spec JSON file")->required();
    score_cmd->add_option("--video", score_args.video_path, "video file or frame directory")
        ->required();
    score_cmd->add_option("--mock", score_args.mock_path, "mock scenario file");
    score_cmd->add_option("--config", score_args.config_path, "pipeline config file");
    score_cmd->add_option("--cal", score_args.cal_path, "calibration model file");
    score_cmd->add_option("--rate", score_args.rate, "sampling rate (frames/second)");
    score_cmd->add_option("--out", score_args.out_path, "also write the scores here");

    RefineArgs refine_args;
    auto* refine_cmd = app.add_subcommand("refine", "Full verify/diagnose/regenerate loop");
    refine_cmd->add_option("--prompt", refine_args.prompt, "video prompt")->required();
    refine_cmd->add_option("--config", refine_args.config_path, "pipeline config file");
    refine_cmd->add_option("--mock", refine_args.mock_path, "mock scenario file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (verify_cmd->parsed()) return cmd_verify(verify_args, out);
        if (oracle_cmd->parsed()) return cmd_oracle(oracle_args, out);
        if (diagnose_cmd->parsed()) return cmd_diagnose(diagnose_args, out);
        if (calibrate_cmd->parsed()) return cmd_calibrate(calibrate_args, out);
        if (decompose_cmd->parsed()) return cmd_decompose(decompose_args, out);
        if (score_cmd->parsed()) return cmd_score(score_args, out);
        if (refine_cmd->parsed()) return cmd_refine(refine_args, out, err);
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
    err << "no subcommand\n";
    return 2;
}

}  // namespace vidtl
