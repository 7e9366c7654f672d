#pragma once

// Neural path: LoRA fine-tuning configuration export and a client for an
// external completion service that inserts disfluencies.

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "disfluency/annotation.hpp"

namespace disfl {

struct FinetuneConfig {
  std::string base_model = "Llama-2-7b-chat-hf";
  int lora_rank = 32;
  int lora_alpha = 64;
  double lora_dropout = 0.1;
  double learning_rate = 2e-4;
  int max_seq_len = 200;
  int batch_size = 2;
  int grad_accum_steps = 4;
};

class InvalidOverride : public Error {
 public:
  InvalidOverride(std::string field, const std::string& why)
      : Error("invalid override for '" + field + "': " + why), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Defaults with `overrides` (a JSON object of FinetuneConfig fields) applied
/// field by field. Unknown fields and out-of-range values throw InvalidOverride.
FinetuneConfig export_finetune_config(const nlohmann::json& overrides);
nlohmann::ordered_json to_json(const FinetuneConfig& config);

// --- remote insertion ----------------------------------------------------

inline constexpr std::string_view kEndpointEnv = "DISFLUENCY_ENDPOINT";
inline constexpr std::string_view kTokenEnv = "DISFLUENCY_API_TOKEN";
inline constexpr int kPromptTemplateVersion = 1;

struct RemoteEndpoint {
  std::string base_url;  // scheme://host[:port][/path]; the request is POSTed to the path
  std::chrono::duration<double> timeout{30.0};
  std::size_t max_retries = 2;
  std::optional<std::string> bearer_token;
  std::size_t max_in_flight = 4;

  /// Endpoint from DISFLUENCY_ENDPOINT (and DISFLUENCY_API_TOKEN when set).
  static std::optional<RemoteEndpoint> from_env();
};

class RemoteError : public DataError {
 public:
  enum class Kind { Timeout, HttpError, UnparseableCompletion, RoundTripViolation, InvalidEndpoint };

  RemoteError(Kind kind, const std::string& what, int status = 0) : DataError(what), kind_(kind), status_(status) {}
  Kind kind() const noexcept { return kind_; }
  /// HTTP status for HttpError (0 for transport failures).
  int status() const noexcept { return status_; }

 private:
  Kind kind_;
  int status_;
};

/// Versioned instruction + the fluent utterance; the completion is expected
/// to be the disfluent utterance.
std::string build_prompt(std::span<const Token> fluent);

/// Rewrites a plain-text completion into markup: bare filler words become
/// {F ...}, "..." becomes <sil>. Existing markup is left alone.
std::string normalize_completion(std::string_view completion);

/// Parses a completion against its fluent source. Plain-text insertions that
/// leave the fluent words in order are annotated through alignment; anything
/// that changes the fluent content throws RoundTripViolation.
AnnotatedUtterance annotate_completion(std::span<const Token> fluent, std::string_view completion);

/// HTTP client for a completion service: POST {"prompt": ...}, response
/// {"completion": ...}. Safe to share between threads; at most
/// max_in_flight requests run at once.
class RemoteInserter {
 public:
  explicit RemoteInserter(RemoteEndpoint endpoint);
  ~RemoteInserter();
  RemoteInserter(const RemoteInserter&) = delete;
  RemoteInserter& operator=(const RemoteInserter&) = delete;

  const RemoteEndpoint& endpoint() const noexcept { return endpoint_; }

  /// Raw completion text for a prompt, with retries on transport errors and
  /// 5xx/429 responses. Every attempt sends the same body.
  std::string complete(const std::string& prompt) const;

  AnnotatedUtterance insert(std::span<const Token> fluent) const;

 private:
  struct Impl;
  RemoteEndpoint endpoint_;
  std::unique_ptr<Impl> impl_;
};

/// insert_remote: one-shot convenience around RemoteInserter.
AnnotatedUtterance insert_remote(const RemoteEndpoint& endpoint, std::span<const Token> fluent);

}  // namespace disfl
