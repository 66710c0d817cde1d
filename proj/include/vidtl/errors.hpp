#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vidtl {

enum class Errc {
    syntax_error,
    unknown_proposition,
    index_out_of_range,
    layer_out_of_range,
    dimension_mismatch,
    too_many_propositions,
    monitor_blowup,
    too_large_for_oracle,
    degenerate_dataset,
    empty_response,
    service_error,
    malformed_decomposition,
    ambiguous_verdict,
    generation_timeout,
    unreadable_video,
    resample_error,
    incompatible_streams,
    client_failure,
    invalid_argument,
    invalid_config,
    io_error,
};

const char* errc_name(Errc code);

/// Domain error carrying a machine-checkable code alongside the message.
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

/// Formula parse failure: byte offset of the offending token plus what was
/// expected there.
class SyntaxError : public Error {
  public:
    SyntaxError(std::size_t position, std::string expected, const std::string& what)
        : Error(Errc::syntax_error, what + " (at offset " + std::to_string(position) + ")"),
          position_(position),
          expected_(std::move(expected)) {}

    std::size_t position() const { return position_; }
    const std::string& expected() const { return expected_; }

  private:
    std::size_t position_;
    std::string expected_;
};

/// Failure reported by a remote service (HTTP status + response body).
class ServiceError : public Error {
  public:
    ServiceError(int status, std::string body)
        : Error(Errc::service_error, "status " + std::to_string(status) + ": " + body),
          status_(status),
          body_(std::move(body)) {}

    int status() const { return status_; }
    const std::string& body() const { return body_; }

  private:
    int status_;
    std::string body_;
};

}  // namespace vidtl
