#pragma once

#include "vidtl/clients.hpp"

namespace vidtl {

/// Chat-completions style endpoint: POST {base}/chat/completions with a
/// messages array and logprobs requested. Credentials come from the env var
/// named in the config; retries use exponential backoff.
class HttpChatClient : public ChatClient {
  public:
    explicit HttpChatClient(ClientConfig config);
    ChatResponse complete(const std::vector<ChatMessage>& messages) override;

  private:
    ClientConfig config_;
};

/// Same endpoint with the frame attached as a data URL image part.
class HttpVisionClient : public VisionClient {
  public:
    explicit HttpVisionClient(ClientConfig config);
    ChatResponse ask(const std::string& prompt, const std::string& image_payload) override;

  private:
    ClientConfig config_;
};

/// Submit-and-poll job protocol: POST {base}/videos returns an id, GET
/// {base}/videos/{id} reports pending/succeeded/failed, and a succeeded job
/// lists frame URLs (downloaded into a frame directory) or a single video
/// URL (downloaded as a container file).
class HttpVideoGenClient : public VideoGenClient {
  public:
    explicit HttpVideoGenClient(ClientConfig config);
    VideoHandle generate(const GenerationRequest& request,
                         const std::filesystem::path& dest_dir) override;

  private:
    ClientConfig config_;
};

/// POST {base}/images/edits with the image and instruction; the reply carries
/// the edited image base64-encoded.
class HttpImageEditClient : public ImageEditClient {
  public:
    explicit HttpImageEditClient(ClientConfig config);
    std::filesystem::path edit(const std::filesystem::path& image,
                               const std::string& instruction,
                               const std::filesystem::path& dest) override;

  private:
    ClientConfig config_;
};

struct HttpClientConfigs {
    ClientConfig chat;
    ClientConfig vision;
    ClientConfig video;
    ClientConfig image_edit;
};

ClientBundle make_http_clients(const HttpClientConfigs& configs);

// Exposed for tests.
std::string base64_encode(const std::string& bytes);

}  // namespace vidtl
