#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vidtl/calibration.hpp"
#include "vidtl/errors.hpp"
#include "vidtl/tl.hpp"
#include "vidtl/video_io.hpp"

namespace vidtl {

struct ClientConfig {
    std::string base_url;
    std::string model;
    std::string auth_env = "NSE_API_KEY";  // name of the env var holding the credential
    double timeout_seconds = 60.0;
    int max_retries = 2;
    int parallelism = 4;
    double backoff_seconds = 0.25;

    void validate() const;
};

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

/// A completion plus the per-token probabilities of the response, when the
/// service reports them.
struct ChatResponse {
    std::string content;
    std::vector<TokenProb> tokens;
};

/// Text-only chat service (prompt decomposition, continuation prompts).
class ChatClient {
  public:
    virtual ~ChatClient() = default;
    virtual ChatResponse complete(const std::vector<ChatMessage>& messages) = 0;
};

/// Vision service: one frame plus a question, answered with token
/// probabilities.
class VisionClient {
  public:
    virtual ~VisionClient() = default;
    virtual ChatResponse ask(const std::string& prompt, const std::string& image_payload) = 0;
};

struct GenerationRequest {
    std::string prompt;
    std::optional<std::filesystem::path> image;  // first-frame conditioning

    void validate() const;
};

/// Video generation service; the artifact is downloaded under dest_dir.
class VideoGenClient {
  public:
    virtual ~VideoGenClient() = default;
    virtual VideoHandle generate(const GenerationRequest& request,
                                 const std::filesystem::path& dest_dir) = 0;
};

/// Prompt-guided image editing service.
class ImageEditClient {
  public:
    virtual ~ImageEditClient() = default;
    virtual std::filesystem::path edit(const std::filesystem::path& image,
                                       const std::string& instruction,
                                       const std::filesystem::path& dest) = 0;
};

struct ClientBundle {
    std::unique_ptr<ChatClient> chat;
    std::unique_ptr<VisionClient> vision;
    std::unique_ptr<VideoGenClient> video;
    std::unique_ptr<ImageEditClient> image_edit;
};

// ---------------------------------------------------------------------------
// Protocol operations over the abstract clients

struct DecompositionResult {
    PropositionSet props;
    Formula formula;
    std::string formula_text;  // concrete syntax, parses against props
};

/// Ask the chat service to decompose a prompt into propositions and a
/// specification, then parse and validate the reply. One retry with an
/// error-explaining suffix if the reply fails to parse.
DecompositionResult decompose_prompt(ChatClient& chat, const std::string& prompt);

/// Score one (proposition, frame) pair: ask the vision service, take the
/// product of the response-token probabilities as confidence in the verdict,
/// flip for "No", then calibrate. Always lands in [0,1].
double score_frame(VisionClient& vision, const Proposition& p, const std::string& image_payload,
                   const CalibrationModel& cal);

/// Ask the chat service for a continuation prompt given the missing content.
std::string continuation_prompt(ChatClient& chat, const std::string& original_prompt,
                                const Proposition& weakest);

/// Have the image service add the weakest proposition to a keyframe. Frames
/// beyond the byte budget are rejected before any wire traffic.
std::filesystem::path edit_keyframe(ImageEditClient& editor, const std::filesystem::path& frame,
                                    const Proposition& weakest,
                                    const std::filesystem::path& dest,
                                    std::uintmax_t max_image_bytes = 64ull * 1024 * 1024);

// Pure helpers behind the operations, exposed for tests.
std::vector<ChatMessage> build_decomposition_messages(const std::string& prompt);
std::vector<ChatMessage> build_continuation_messages(const std::string& original_prompt,
                                                     const Proposition& weakest);
/// The fixed feedback phrasing used in continuation requests, with {weakest}
/// as the placeholder; recorded in run manifests.
std::string continuation_feedback_template();
std::string build_scoring_prompt(const Proposition& p);
std::string build_edit_instruction(const Proposition& weakest);

struct RawDecomposition {
    std::vector<std::string> propositions;
    std::string specification;
};

/// Extract the "Output Propositions" list and "Output Specification" line
/// from a decomposition reply.
RawDecomposition parse_decomposition_reply(const std::string& reply);

/// Rewrite a model-written specification into the concrete grammar: unicode
/// operators become their ASCII forms and bare proposition texts are quoted
/// (longest match first, case-insensitive).
std::string normalize_specification(const std::string& raw, const PropositionSet& props);

/// Polarity + calibration applied to a scoring response. Pure.
double frame_score_from_response(const ChatResponse& response, const CalibrationModel& cal);

}  // namespace vidtl
