#include "vidtl/http_clients.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace vidtl {

namespace {

struct Endpoint {
    std::string origin;     // scheme://host[:port]
    std::string base_path;  // leading path, no trailing slash
};

Endpoint split_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(Errc::invalid_config, "base_url needs a scheme: " + base_url);
    }
    const auto path_start = base_url.find('/', scheme_end + 3);
    Endpoint ep;
    if (path_start == std::string::npos) {
        ep.origin = base_url;
    } else {
        ep.origin = base_url.substr(0, path_start);
        ep.base_path = base_url.substr(path_start);
        while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
    }
    return ep;
}

void apply_auth(httplib::Client& client, const ClientConfig& config) {
    if (config.auth_env.empty()) return;
    if (const char* key = std::getenv(config.auth_env.c_str())) {
        client.set_bearer_token_auth(key);
    }
}

httplib::Client make_client(const ClientConfig& config, const Endpoint& ep) {
    httplib::Client client(ep.origin);
    const auto seconds = static_cast<time_t>(config.timeout_seconds);
    const auto micros =
        static_cast<time_t>((config.timeout_seconds - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    apply_auth(client, config);
    return client;
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

/// Run a wire call with exponential backoff on connection failures and
/// retryable statuses.
template <typename Call>
httplib::Result with_retries(const ClientConfig& config, Call&& call) {
    int attempts = 0;
    while (true) {
        httplib::Result result = call();
        if (result && !retryable_status(result->status)) return result;
        if (attempts >= config.max_retries) {
            if (result) return result;
            throw ServiceError(0, "connection to " + config.base_url + " failed after " +
                                      std::to_string(attempts + 1) + " attempts");
        }
        const double delay = config.backoff_seconds * std::pow(2.0, attempts);
        if (delay > 0.0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        ++attempts;
    }
}

ChatResponse parse_chat_response(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
        throw ServiceError(200, "response body is not JSON: " + body);
    }
    try {
        const auto& choice = j.at("choices").at(0);
        ChatResponse out;
        out.content = choice.at("message").at("content").get<std::string>();
        if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
            choice["logprobs"].contains("content")) {
            for (const auto& tok : choice["logprobs"]["content"]) {
                const double logprob = tok.at("logprob").get<double>();
                out.tokens.push_back(
                    {tok.at("token").get<std::string>(), std::exp(logprob)});
            }
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ServiceError(200, std::string("unexpected completion shape: ") + e.what());
    }
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

nlohmann::json chat_payload(const ClientConfig& config,
                            const std::vector<ChatMessage>& messages) {
    nlohmann::json payload;
    payload["model"] = config.model;
    payload["logprobs"] = true;
    auto array = nlohmann::json::array();
    for (const auto& m : messages) {
        array.push_back({{"role", m.role}, {"content", m.content}});
    }
    payload["messages"] = std::move(array);
    return payload;
}

}  // namespace

std::string base64_encode(const std::string& bytes) {
    static const char* kAlphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < bytes.size()) {
        const std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                                (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                                static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(kAlphabet[(n >> 18) & 63]);
        out.push_back(kAlphabet[(n >> 12) & 63]);
        out.push_back(kAlphabet[(n >> 6) & 63]);
        out.push_back(kAlphabet[n & 63]);
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(kAlphabet[(n >> 18) & 63]);
        out.push_back(kAlphabet[(n >> 12) & 63]);
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                                (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(kAlphabet[(n >> 18) & 63]);
        out.push_back(kAlphabet[(n >> 12) & 63]);
        out.push_back(kAlphabet[(n >> 6) & 63]);
        out += "=";
    }
    return out;
}

HttpChatClient::HttpChatClient(ClientConfig config) : config_(std::move(config)) {
    config_.validate();
}

ChatResponse HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
    const Endpoint ep = split_base_url(config_.base_url);
    auto client = make_client(config_, ep);
    const std::string body = chat_payload(config_, messages).dump();
    auto result = with_retries(config_, [&] {
        return client.Post(ep.base_path + "/chat/completions", body, "application/json");
    });
    if (result->status != 200) throw ServiceError(result->status, result->body);
    return parse_chat_response(result->body);
}

HttpVisionClient::HttpVisionClient(ClientConfig config) : config_(std::move(config)) {
    config_.validate();
}

ChatResponse HttpVisionClient::ask(const std::string& prompt, const std::string& image_payload) {
    const Endpoint ep = split_base_url(config_.base_url);
    auto client = make_client(config_, ep);

    nlohmann::json payload;
    payload["model"] = config_.model;
    payload["logprobs"] = true;
    payload["messages"] = nlohmann::json::array(
        {{{"role", "user"},
          {"content",
           nlohmann::json::array(
               {{{"type", "text"}, {"text", prompt}},
                {{"type", "image_url"},
                 {"image_url",
                  {{"url", "data:image/png;base64," + base64_encode(image_payload)}}}}})}}});
    const std::string body = payload.dump();
    auto result = with_retries(config_, [&] {
        return client.Post(ep.base_path + "/chat/completions", body, "application/json");
    });
    if (result->status != 200) throw ServiceError(result->status, result->body);
    return parse_chat_response(result->body);
}

HttpVideoGenClient::HttpVideoGenClient(ClientConfig config) : config_(std::move(config)) {
    config_.validate();
}

VideoHandle HttpVideoGenClient::generate(const GenerationRequest& request,
                                         const std::filesystem::path& dest_dir) {
    request.validate();
    const Endpoint ep = split_base_url(config_.base_url);
    auto client = make_client(config_, ep);

    nlohmann::json payload;
    payload["model"] = config_.model;
    payload["prompt"] = request.prompt;
    if (request.image) {
        payload["image_b64"] = base64_encode(read_file_bytes(*request.image));
    }
    auto submit = with_retries(config_, [&] {
        return client.Post(ep.base_path + "/videos", payload.dump(), "application/json");
    });
    if (submit->status != 200) throw ServiceError(submit->status, submit->body);

    std::string job_id;
    try {
        job_id = nlohmann::json::parse(submit->body).at("id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ServiceError(200, std::string("job submission reply lacks an id: ") + e.what());
    }

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(config_.timeout_seconds);
    const auto poll_interval =
        std::chrono::duration<double>(std::max(config_.backoff_seconds, 0.01));
    while (true) {
        auto poll = with_retries(config_, [&] {
            return client.Get(ep.base_path + "/videos/" + job_id);
        });
        if (poll->status != 200) throw ServiceError(poll->status, poll->body);
        nlohmann::json status;
        try {
            status = nlohmann::json::parse(poll->body);
        } catch (const nlohmann::json::exception&) {
            throw ServiceError(200, "poll reply is not JSON");
        }
        const std::string state = status.value("status", "");
        if (state == "succeeded") {
            std::filesystem::create_directories(dest_dir);
            if (status.contains("frames")) {
                std::size_t index = 1;
                for (const auto& url : status["frames"]) {
                    auto frame = with_retries(config_, [&] {
                        return client.Get(url.get<std::string>());
                    });
                    if (frame->status != 200) throw ServiceError(frame->status, frame->body);
                    char name[32];
                    std::snprintf(name, sizeof(name), "frame_%05zu.png", index++);
                    std::ofstream out(dest_dir / name, std::ios::binary);
                    out << frame->body;
                }
                const double fps = status.value("fps", 1.0);
                {
                    std::ofstream meta(dest_dir / "meta.json");
                    meta << nlohmann::json{{"fps", fps},
                                           {"duration", static_cast<double>(index - 1) / fps}}
                                .dump(2)
                         << "\n";
                }
                return open_video(dest_dir);
            }
            if (status.contains("video_url")) {
                auto file = with_retries(config_, [&] {
                    return client.Get(status["video_url"].get<std::string>());
                });
                if (file->status != 200) throw ServiceError(file->status, file->body);
                const auto out_path = dest_dir / "video.mp4";
                std::ofstream out(out_path, std::ios::binary);
                out << file->body;
                out.close();
                return open_video(out_path);
            }
            throw ServiceError(200, "succeeded job reports neither frames nor video_url");
        }
        if (state == "failed") {
            throw ServiceError(200, "generation job failed: " + poll->body);
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            throw Error(Errc::generation_timeout,
                        "job " + job_id + " still pending after " +
                            std::to_string(config_.timeout_seconds) + "s");
        }
        std::this_thread::sleep_for(poll_interval);
    }
}

HttpImageEditClient::HttpImageEditClient(ClientConfig config) : config_(std::move(config)) {
    config_.validate();
}

std::filesystem::path HttpImageEditClient::edit(const std::filesystem::path& image,
                                                const std::string& instruction,
                                                const std::filesystem::path& dest) {
    const Endpoint ep = split_base_url(config_.base_url);
    auto client = make_client(config_, ep);

    nlohmann::json payload;
    payload["model"] = config_.model;
    payload["prompt"] = instruction;
    payload["image_b64"] = base64_encode(read_file_bytes(image));
    auto result = with_retries(config_, [&] {
        return client.Post(ep.base_path + "/images/edits", payload.dump(), "application/json");
    });
    if (result->status != 200) throw ServiceError(result->status, result->body);

    try {
        const auto j = nlohmann::json::parse(result->body);
        const std::string b64 = j.at("image_b64").get<std::string>();
        // Minimal base64 decode; tolerant of padding.
        static const auto decode_table = [] {
            std::array<int, 256> t;
            t.fill(-1);
            const char* alphabet =
                "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
            for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(alphabet[i])] = i;
            return t;
        }();
        std::string bytes;
        std::uint32_t acc = 0;
        int bits = 0;
        for (const char c : b64) {
            const int v = decode_table[static_cast<unsigned char>(c)];
            if (v < 0) continue;
            acc = (acc << 6) | static_cast<std::uint32_t>(v);
            bits += 6;
            if (bits >= 8) {
                bits -= 8;
                bytes.push_back(static_cast<char>((acc >> bits) & 0xFF));
            }
        }
        std::filesystem::create_directories(dest.parent_path());
        std::ofstream out(dest, std::ios::binary);
        if (!out) throw Error(Errc::io_error, "cannot write " + dest.string());
        out << bytes;
        return dest;
    } catch (const nlohmann::json::exception& e) {
        throw ServiceError(200, std::string("unexpected edit reply shape: ") + e.what());
    }
}

ClientBundle make_http_clients(const HttpClientConfigs& configs) {
    ClientBundle bundle;
    bundle.chat = std::make_unique<HttpChatClient>(configs.chat);
    bundle.vision = std::make_unique<HttpVisionClient>(configs.vision);
    bundle.video = std::make_unique<HttpVideoGenClient>(configs.video);
    bundle.image_edit = std::make_unique<HttpImageEditClient>(configs.image_edit);
    return bundle;
}

}  // namespace vidtl
