#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vidtl/clients.hpp"

namespace vidtl {

/// Table-driven stand-ins for the four services, loaded from a scenario file
/// so end-to-end runs are hermetic and reproducible.
///
/// Scenario JSON:
///   {
///     "chat":         [ {"match": "<substring of the last user message>",
///                        "response": "<reply text>"} ],
///     "frame_scores": [ {"proposition": "...", "frame": "<frame file content>",
///                        "verdict": "Yes"|"No", "probability": 0.95} ],
///     "frame_score_default": {"verdict": "No", "probability": 0.98},
///     "generations":  [ {"frames": "<frame-dir relative to this file>"} ],
///     "edits":        [ {"output": "<image file relative to this file>"} ]
///   }
///
/// Chat matchers are consulted in order; the first hit wins. Generations are
/// consumed in order, repeating the last entry once exhausted.
struct MockScenario {
    struct ChatRule {
        std::string match;
        std::string response;
    };
    struct FrameScore {
        std::string verdict;
        double probability = 1.0;
    };
    struct Generation {
        std::filesystem::path frames_dir;
    };

    std::vector<ChatRule> chat;
    std::map<std::pair<std::string, std::string>, FrameScore> frame_scores;
    std::optional<FrameScore> frame_score_default;
    std::vector<Generation> generations;
    std::vector<std::filesystem::path> edits;

    static MockScenario load(const std::filesystem::path& path);
};

class MockChatClient : public ChatClient {
  public:
    explicit MockChatClient(MockScenario scenario) : scenario_(std::move(scenario)) {}

    ChatResponse complete(const std::vector<ChatMessage>& messages) override;

    std::size_t calls() const { return calls_; }
    const std::vector<std::string>& requests() const { return requests_; }

  private:
    MockScenario scenario_;
    std::size_t calls_ = 0;
    std::vector<std::string> requests_;
};

class MockVisionClient : public VisionClient {
  public:
    explicit MockVisionClient(MockScenario scenario) : scenario_(std::move(scenario)) {}

    /// Direct table entry for in-code setups (no scenario file).
    void script(const std::string& proposition, const std::string& frame_key,
                const std::string& verdict, double probability);
    void script_default(const std::string& verdict, double probability);

    ChatResponse ask(const std::string& prompt, const std::string& image_payload) override;

    std::size_t calls() const {
        std::lock_guard lock(mutex_);
        return calls_;
    }

  private:
    MockScenario scenario_;
    mutable std::mutex mutex_;  // ask() may run from parallel scoring workers
    std::size_t calls_ = 0;
};

class MockVideoGenClient : public VideoGenClient {
  public:
    explicit MockVideoGenClient(MockScenario scenario) : scenario_(std::move(scenario)) {}

    VideoHandle generate(const GenerationRequest& request,
                         const std::filesystem::path& dest_dir) override;

    std::size_t calls() const { return calls_; }
    const std::vector<GenerationRequest>& requests() const { return requests_; }

  private:
    MockScenario scenario_;
    std::size_t calls_ = 0;
    std::vector<GenerationRequest> requests_;
};

class MockImageEditClient : public ImageEditClient {
  public:
    explicit MockImageEditClient(MockScenario scenario) : scenario_(std::move(scenario)) {}

    std::filesystem::path edit(const std::filesystem::path& image,
                               const std::string& instruction,
                               const std::filesystem::path& dest) override;

    std::size_t calls() const { return calls_; }

  private:
    MockScenario scenario_;
    std::size_t calls_ = 0;
};

/// All four mocks wired from one scenario file.
ClientBundle make_mock_clients(const std::filesystem::path& scenario_file);

}  // namespace vidtl
