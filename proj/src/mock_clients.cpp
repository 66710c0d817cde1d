#include "vidtl/mock_clients.hpp"

#include <fstream>

#include "json.hpp"

namespace vidtl {

namespace fs = std::filesystem;

MockScenario MockScenario::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open scenario file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::io_error, std::string("scenario file is not valid JSON: ") + e.what());
    }

    MockScenario s;
    const fs::path base = path.parent_path();
    for (const auto& rule : j.value("chat", nlohmann::json::array())) {
        s.chat.push_back({rule.at("match").get<std::string>(),
                          rule.at("response").get<std::string>()});
    }
    for (const auto& entry : j.value("frame_scores", nlohmann::json::array())) {
        const auto key = std::make_pair(
            PropositionSet::normalize(entry.at("proposition").get<std::string>()),
            entry.at("frame").get<std::string>());
        s.frame_scores[key] = {entry.at("verdict").get<std::string>(),
                               entry.at("probability").get<double>()};
    }
    if (j.contains("frame_score_default")) {
        s.frame_score_default = FrameScore{
            j["frame_score_default"].at("verdict").get<std::string>(),
            j["frame_score_default"].at("probability").get<double>()};
    }
    for (const auto& gen : j.value("generations", nlohmann::json::array())) {
        s.generations.push_back({base / gen.at("frames").get<std::string>()});
    }
    for (const auto& edit : j.value("edits", nlohmann::json::array())) {
        s.edits.push_back(base / edit.at("output").get<std::string>());
    }
    return s;
}

ChatResponse MockChatClient::complete(const std::vector<ChatMessage>& messages) {
    ++calls_;
    std::string request;
    for (const auto& m : messages) request += m.role + ": " + m.content + "\n";
    requests_.push_back(request);
    for (const auto& rule : scenario_.chat) {
        if (request.find(rule.match) != std::string::npos) {
            return ChatResponse{rule.response, {{rule.response, 1.0}}};
        }
    }
    throw ServiceError(404, "no scripted chat response matches the request");
}

void MockVisionClient::script(const std::string& proposition, const std::string& frame_key,
                              const std::string& verdict, double probability) {
    scenario_.frame_scores[{PropositionSet::normalize(proposition), frame_key}] = {verdict,
                                                                                   probability};
}

void MockVisionClient::script_default(const std::string& verdict, double probability) {
    scenario_.frame_score_default = MockScenario::FrameScore{verdict, probability};
}

ChatResponse MockVisionClient::ask(const std::string& prompt, const std::string& image_payload) {
    std::lock_guard lock(mutex_);
    ++calls_;
    // The scoring prompt embeds the proposition between the fixed framing.
    const std::string prefix = "Is there ";
    const std::string suffix = " present in the sequence of frames?";
    const auto start = prompt.find(prefix);
    const auto end = prompt.find(suffix);
    if (start != 0 || end == std::string::npos) {
        throw ServiceError(400, "unexpected scoring prompt shape");
    }
    const std::string proposition =
        PropositionSet::normalize(prompt.substr(prefix.size(), end - prefix.size()));

    // Frame files in scenarios carry their lookup key as content.
    std::string key = image_payload;
    while (!key.empty() && (key.back() == '\n' || key.back() == '\r')) key.pop_back();

    const auto it = scenario_.frame_scores.find({proposition, key});
    const MockScenario::FrameScore* score = nullptr;
    if (it != scenario_.frame_scores.end()) {
        score = &it->second;
    } else if (scenario_.frame_score_default) {
        score = &*scenario_.frame_score_default;
    } else {
        throw ServiceError(404, "no scripted score for (" + proposition + ", " + key + ")");
    }
    return ChatResponse{score->verdict, {{score->verdict, score->probability}}};
}

VideoHandle MockVideoGenClient::generate(const GenerationRequest& request,
                                         const fs::path& dest_dir) {
    request.validate();
    ++calls_;
    requests_.push_back(request);
    if (scenario_.generations.empty()) {
        throw ServiceError(404, "no scripted generations");
    }
    const std::size_t index = std::min(calls_ - 1, scenario_.generations.size() - 1);
    const fs::path& source = scenario_.generations[index].frames_dir;
    if (!fs::is_directory(source)) {
        throw ServiceError(500, "scripted frame directory missing: " + source.string());
    }
    fs::create_directories(dest_dir);
    fs::copy(source, dest_dir,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    return open_video(dest_dir);
}

fs::path MockImageEditClient::edit(const fs::path& image, const std::string& /*instruction*/,
                                   const fs::path& dest) {
    ++calls_;
    fs::create_directories(dest.parent_path());
    if (calls_ <= scenario_.edits.size()) {
        fs::copy_file(scenario_.edits[calls_ - 1], dest, fs::copy_options::overwrite_existing);
    } else {
        // No scripted edit: pass the keyframe through unchanged.
        fs::copy_file(image, dest, fs::copy_options::overwrite_existing);
    }
    return dest;
}

ClientBundle make_mock_clients(const fs::path& scenario_file) {
    const MockScenario scenario = MockScenario::load(scenario_file);
    ClientBundle bundle;
    bundle.chat = std::make_unique<MockChatClient>(scenario);
    bundle.vision = std::make_unique<MockVisionClient>(scenario);
    bundle.video = std::make_unique<MockVideoGenClient>(scenario);
    bundle.image_edit = std::make_unique<MockImageEditClient>(scenario);
    return bundle;
}

}  // namespace vidtl
