#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "support/fixtures.hpp"
#include "vidtl/http_clients.hpp"
#include "vidtl/mock_clients.hpp"

using namespace vidtl;
using vidtl::testing::temp_dir;
using vidtl::testing::write_meditation_scenario;

TEST_CASE("decomposition of the scripted meditation reply") {
    const auto dir = temp_dir("decomp");
    const auto scenario = write_meditation_scenario(dir, testing::MeditationVariant::success);
    MockChatClient chat(MockScenario::load(scenario));

    const DecompositionResult result =
        decompose_prompt(chat, testing::kMeditationPrompt);
    CHECK(chat.calls() == 1);

    REQUIRE(result.props.size() == 4);
    CHECK(result.props.at(0).text == "person is meditating");
    CHECK(result.props.at(1).text == "lake shore");
    CHECK(result.props.at(2).text == "person is standing");
    CHECK(result.props.at(3).text == "person is walking away");

    // (A & B) X (C X D), binary X right-chained.
    const Formula& f = result.formula;
    REQUIRE(f.kind() == FormulaKind::seq);
    REQUIRE(f.left().kind() == FormulaKind::conjunction);
    CHECK(f.left().left().prop_index() == 0);
    CHECK(f.left().right().prop_index() == 1);
    REQUIRE(f.right().kind() == FormulaKind::seq);
    CHECK(f.right().left().prop_index() == 2);
    CHECK(f.right().right().prop_index() == 3);
}

TEST_CASE("unparseable decompositions get one retry then fail") {
    MockScenario scenario;
    scenario.chat.push_back({"Input Prompt:", "word salad with no fields"});
    MockChatClient chat(scenario);
    try {
        decompose_prompt(chat, "anything");
        FAIL("expected MalformedDecomposition");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::malformed_decomposition);
    }
    CHECK(chat.calls() == 2);

    // The retry carries an explanation of the failure.
    CHECK(chat.requests()[1].find("failed to parse") != std::string::npos);
}

TEST_CASE("normalize_specification quotes propositions longest-first") {
    PropositionSet props({"person is standing", "person is standing still"});
    const std::string normalized = normalize_specification(
        "person is standing still ∧ person is standing", props);
    CHECK(normalized == "\"person is standing still\"  &  \"person is standing\"");
}

TEST_CASE("frame scoring applies polarity and calibration") {
    const CalibrationModel identity = CalibrationModel::identity();
    CHECK(frame_score_from_response({"Yes", {{"Yes", 0.9}}}, identity) ==
          doctest::Approx(0.9).epsilon(1e-12));
    CHECK(frame_score_from_response({"No", {{"No", 1.0}}}, identity) == 0.0);
    CHECK(frame_score_from_response({" yes \n", {{"yes", 0.8}}}, identity) ==
          doctest::Approx(0.8).epsilon(1e-12));
    try {
        frame_score_from_response({"Yes No", {{"Yes", 0.5}, {"No", 0.5}}}, identity);
        FAIL("expected AmbiguousVerdict");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ambiguous_verdict);
    }

    // Calibration with tau=0.8 recenters the verdict boundary.
    const CalibrationModel strict{0.8};
    CHECK(frame_score_from_response({"Yes", {{"Yes", 0.8}}}, strict) == 0.5);
}

TEST_CASE("mock vision scoring is keyed by proposition and frame content") {
    const auto dir = temp_dir("vision");
    const auto scenario = write_meditation_scenario(dir, testing::MeditationVariant::success);
    MockVisionClient vision(MockScenario::load(scenario));
    const CalibrationModel identity = CalibrationModel::identity();

    const Proposition lake{1, "lake shore"};
    CHECK(score_frame(vision, lake, "init:f1", identity) ==
          doctest::Approx(0.95).epsilon(1e-12));
    // Unscripted pairs use the default miss.
    const Proposition stand{2, "person is standing"};
    CHECK(score_frame(vision, stand, "good:f2", identity) ==
          doctest::Approx(0.02).epsilon(1e-12));
    CHECK(vision.calls() == 2);
    CHECK_THROWS_AS(score_frame(vision, lake, "", identity), Error);
}

TEST_CASE("score_frame stays in range whatever the service reports") {
    MockVisionClient vision{MockScenario{}};
    vision.script("thing", "frame", "Yes", 1.0);
    const CalibrationModel identity = CalibrationModel::identity();
    const double s = score_frame(vision, Proposition{0, "thing"}, "frame", identity);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
}

TEST_CASE("continuation prompts are deterministic and validated") {
    const auto dir = temp_dir("cont");
    const auto scenario = write_meditation_scenario(dir, testing::MeditationVariant::success);
    MockChatClient chat(MockScenario::load(scenario));
    const Proposition weakest{2, "person is standing"};

    const std::string a = continuation_prompt(chat, testing::kMeditationPrompt, weakest);
    const std::string b = continuation_prompt(chat, testing::kMeditationPrompt, weakest);
    CHECK(a == b);
    CHECK(!a.empty());
    REQUIRE(chat.requests().size() == 2);
    CHECK(chat.requests()[0] == chat.requests()[1]);  // identical payloads
    CHECK(chat.requests()[0].find("person is standing") != std::string::npos);

    MockChatClient empty_chat(MockScenario{});
    CHECK_THROWS_AS(continuation_prompt(empty_chat, "p", Proposition{0, ""}), Error);
}

TEST_CASE("mock generation consumes the scripted clips in order") {
    const auto dir = temp_dir("gen");
    const auto scenario = write_meditation_scenario(dir, testing::MeditationVariant::success);
    MockVideoGenClient video(MockScenario::load(scenario));

    const VideoHandle first = video.generate({"prompt", std::nullopt}, dir / "out1");
    CHECK(list_frame_files(first.path).size() == 3);
    const VideoHandle second = video.generate({"prompt 2", dir / "out1" / "frame_00001.png"},
                                              dir / "out2");
    CHECK(list_frame_files(second.path).size() == 2);
    // Exhausted scripts repeat the last clip.
    const VideoHandle third = video.generate({"prompt 3", std::nullopt}, dir / "out3");
    CHECK(list_frame_files(third.path).size() == 2);
    CHECK(video.calls() == 3);
    CHECK(video.requests()[1].image.has_value());

    CHECK_THROWS_AS(video.generate({"", std::nullopt}, dir / "out4"), Error);
}

TEST_CASE("keyframe editing passes through when unscripted and guards size") {
    const auto dir = temp_dir("edit");
    testing::write_file(dir / "frame.png", "frame-bytes");
    MockImageEditClient editor{MockScenario{}};
    const Proposition weakest{2, "person is standing"};
    const auto out = edit_keyframe(editor, dir / "frame.png", weakest, dir / "edited.png");
    CHECK(editor.calls() == 1);
    std::ifstream in(out, std::ios::binary);
    const std::string bytes{std::istreambuf_iterator<char>(in),
                            std::istreambuf_iterator<char>()};
    CHECK(bytes == "frame-bytes");
    CHECK_THROWS_AS(edit_keyframe(editor, dir / "missing.png", weakest, dir / "x.png"), Error);

    try {
        edit_keyframe(editor, dir / "frame.png", weakest, dir / "y.png", 4);
        FAIL("expected the byte-budget guard");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_argument);
    }
    CHECK(editor.calls() == 1);  // the oversized frame never reached the service
}

TEST_CASE("http chat client retries a transient failure then succeeds") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = ++hits;
        if (n == 1) {
            res.status = 500;
            res.set_content("try again", "text/plain");
            return;
        }
        const auto body = nlohmann::json::parse(req.body);
        CHECK(body.at("logprobs").get<bool>());
        CHECK(body.at("messages").size() == 2);
        nlohmann::json reply = {
            {"choices",
             nlohmann::json::array(
                 {{{"message", {{"role", "assistant"}, {"content", "No"}}},
                   {"logprobs",
                    {{"content", nlohmann::json::array({{{"token", "No"},
                                                         {"logprob", -0.10536051565782628}}})}}}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ClientConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    config.model = "test-model";
    config.max_retries = 2;
    config.backoff_seconds = 0.0;
    HttpChatClient chat(config);
    const ChatResponse response = chat.complete({{"system", "s"}, {"user", "u"}});
    CHECK(response.content == "No");
    REQUIRE(response.tokens.size() == 1);
    CHECK(response.tokens[0].probability == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(hits.load() == 2);

    // Stubborn failures surface as ServiceError after the retry budget.
    hits.store(0);
    ClientConfig no_retry = config;
    no_retry.max_retries = 0;
    HttpChatClient failing(no_retry);
    try {
        failing.complete({{"user", "u"}});
        FAIL("expected ServiceError");
    } catch (const ServiceError& e) {
        CHECK(e.status() == 500);
    }

    server.stop();
    serving.join();
}

TEST_CASE("http vision client attaches the frame as a data url") {
    httplib::Server server;
    std::string seen_url;
    server.Post("/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        seen_url = body["messages"][0]["content"][1]["image_url"]["url"].get<std::string>();
        nlohmann::json reply = {
            {"choices", nlohmann::json::array({{{"message", {{"content", "Yes"}}},
                                                {"logprobs", nullptr}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ClientConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    config.model = "vlm";
    config.backoff_seconds = 0.0;
    HttpVisionClient vision(config);
    const ChatResponse response = vision.ask("Is there a cat?", "raw-bytes");
    CHECK(response.content == "Yes");
    CHECK(response.tokens.empty());
    CHECK(seen_url == "data:image/png;base64," + base64_encode("raw-bytes"));

    server.stop();
    serving.join();
}

TEST_CASE("http video client submits, polls and downloads frames") {
    httplib::Server server;
    std::atomic<int> polls{0};
    server.Post("/videos", [&](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        CHECK(body.at("prompt") == "make a clip");
        res.set_content(nlohmann::json{{"id", "job-1"}}.dump(), "application/json");
    });
    server.Get("/videos/job-1", [&](const httplib::Request&, httplib::Response& res) {
        if (++polls < 2) {
            res.set_content(nlohmann::json{{"status", "pending"}}.dump(), "application/json");
            return;
        }
        nlohmann::json done = {{"status", "succeeded"},
                               {"fps", 1.0},
                               {"frames", nlohmann::json::array({"/frames/1", "/frames/2"})}};
        res.set_content(done.dump(), "application/json");
    });
    server.Get("/frames/1", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("frame-one", "image/png");
    });
    server.Get("/frames/2", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("frame-two", "image/png");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ClientConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    config.model = "t2v";
    config.backoff_seconds = 0.01;
    config.timeout_seconds = 10.0;
    HttpVideoGenClient video(config);
    const auto dir = temp_dir("httpgen");
    const VideoHandle v = video.generate({"make a clip", std::nullopt}, dir / "clip");
    CHECK(v.backing == VideoBacking::frame_dir);
    CHECK(list_frame_files(v.path).size() == 2);
    CHECK(polls.load() >= 2);

    server.stop();
    serving.join();
}

TEST_CASE("generation timeout surfaces as GenerationTimeout") {
    httplib::Server server;
    server.Post("/videos", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(nlohmann::json{{"id", "job-slow"}}.dump(), "application/json");
    });
    server.Get("/videos/job-slow", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(nlohmann::json{{"status", "pending"}}.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ClientConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    config.model = "t2v";
    config.backoff_seconds = 0.01;
    config.timeout_seconds = 0.05;
    HttpVideoGenClient video(config);
    const auto dir = temp_dir("httptimeout");
    try {
        video.generate({"never finishes", std::nullopt}, dir / "clip");
        FAIL("expected GenerationTimeout");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::generation_timeout);
    }

    server.stop();
    serving.join();
}

TEST_CASE("client config validation") {
    ClientConfig bad;
    bad.timeout_seconds = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = ClientConfig{};
    bad.parallelism = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
}
