#include "disfluency/llm_backend.hpp"

#include <cstdlib>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <semaphore>
#include <sstream>
#include <stdexcept>

#include "disfluency/alignment.hpp"
#include "disfluency/corpus.hpp"
#include "disfluency/inserter.hpp"

namespace disfl {

namespace {

int positive_int(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number_integer()) throw InvalidOverride(field, "expected an integer");
  const auto x = v.get<long long>();
  if (x < 1 || x > 1'000'000'000) throw InvalidOverride(field, "must be a positive integer");
  return static_cast<int>(x);
}

double number(const nlohmann::json& v, const std::string& field) {
  if (!v.is_number()) throw InvalidOverride(field, "expected a number");
  return v.get<double>();
}

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

std::vector<std::string> texts(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw RemoteError(RemoteError::Kind::InvalidEndpoint, "endpoint URL needs a scheme: " + url);
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw RemoteError(RemoteError::Kind::InvalidEndpoint, "unsupported URL scheme: " + scheme);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (out.origin.size() <= scheme_end + 3) {
    throw RemoteError(RemoteError::Kind::InvalidEndpoint, "endpoint URL has no host: " + url);
  }
  return out;
}

bool plain_annotation(const AnnotatedUtterance& u) {
  for (const auto& s : u.spans) {
    const bool fragment_wrap = s.kind == SpanKind::Reparandum && s.size() == 1 &&
                               u.tokens[s.start].kind == TokenKind::FalseStartFragment;
    if (s.kind != SpanKind::Filler && s.kind != SpanKind::SilentPause && !fragment_wrap) return false;
  }
  return true;
}

}  // namespace

FinetuneConfig export_finetune_config(const nlohmann::json& overrides) {
  FinetuneConfig c;
  if (overrides.is_null()) return c;
  if (!overrides.is_object()) throw InvalidOverride("<root>", "overrides must be a JSON object");
  for (const auto& [key, v] : overrides.items()) {
    if (key == "base_model") {
      if (!v.is_string() || v.get<std::string>().empty()) throw InvalidOverride(key, "expected a non-empty string");
      c.base_model = v.get<std::string>();
    } else if (key == "lora_rank") {
      c.lora_rank = positive_int(v, key);
    } else if (key == "lora_alpha") {
      c.lora_alpha = positive_int(v, key);
    } else if (key == "lora_dropout") {
      c.lora_dropout = number(v, key);
      if (!(c.lora_dropout >= 0.0 && c.lora_dropout < 1.0)) throw InvalidOverride(key, "must lie in [0, 1)");
    } else if (key == "learning_rate") {
      c.learning_rate = number(v, key);
      if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) throw InvalidOverride(key, "must be positive");
    } else if (key == "max_seq_len") {
      c.max_seq_len = positive_int(v, key);
    } else if (key == "batch_size") {
      c.batch_size = positive_int(v, key);
    } else if (key == "grad_accum_steps") {
      c.grad_accum_steps = positive_int(v, key);
    } else {
      throw InvalidOverride(key, "unknown field");
    }
  }
  return c;
}

nlohmann::ordered_json to_json(const FinetuneConfig& c) {
  nlohmann::ordered_json doc;
  doc["base_model"] = c.base_model;
  doc["lora_rank"] = c.lora_rank;
  doc["lora_alpha"] = c.lora_alpha;
  doc["lora_dropout"] = c.lora_dropout;
  doc["learning_rate"] = c.learning_rate;
  doc["max_seq_len"] = c.max_seq_len;
  doc["batch_size"] = c.batch_size;
  doc["grad_accum_steps"] = c.grad_accum_steps;
  return doc;
}

std::optional<RemoteEndpoint> RemoteEndpoint::from_env() {
  const char* url = std::getenv(std::string(kEndpointEnv).c_str());
  if (url == nullptr || *url == '\0') return std::nullopt;
  RemoteEndpoint e;
  e.base_url = url;
  if (const char* token = std::getenv(std::string(kTokenEnv).c_str()); token != nullptr && *token != '\0') {
    e.bearer_token = token;
  }
  return e;
}

std::string build_prompt(std::span<const Token> fluent) {
  // Template version 1. Changing the wording requires bumping kPromptTemplateVersion.
  std::string prompt =
      "Rewrite the utterance below as natural spontaneous speech by inserting disfluencies: "
      "filled pauses such as \"um\" and \"uh\", repetitions, false starts such as \"b- birthday\", "
      "and silent pauses written as <sil>. Keep every original word, in the original order. "
      "Reply with the disfluent utterance only.\n\nUtterance: ";
  prompt += join_tokens(fluent);
  prompt += "\nDisfluent:";
  return prompt;
}

std::string normalize_completion(std::string_view completion) {
  std::string out;
  int brace_depth = 0;
  for (const auto& w : split_ws(completion)) {
    std::string piece = w;
    if (brace_depth == 0 && is_filler_word(w)) {
      piece = "{F " + w + "}";
    } else if (w == "..." || w == "…") {
      piece = std::string(kSilenceToken);
    }
    for (char c : w) {
      if (c == '{') ++brace_depth;
      if (c == '}') --brace_depth;
    }
    if (!out.empty()) out += ' ';
    out += piece;
  }
  return out;
}

AnnotatedUtterance annotate_completion(std::span<const Token> fluent, std::string_view completion) {
  AnnotatedUtterance parsed;
  try {
    parsed = parse_annotated(normalize_completion(completion));
  } catch (const DataError& e) {
    throw RemoteError(RemoteError::Kind::UnparseableCompletion, std::string("completion: ") + e.what());
  }
  const auto fluent_texts = texts(fluent);
  if (texts(strip_disfluencies(parsed)) == fluent_texts) return parsed;

  auto violation = [&] {
    return RemoteError(RemoteError::Kind::RoundTripViolation,
                       "completion changes the fluent content: \"" + std::string(completion) + "\"");
  };
  if (!plain_annotation(parsed)) throw violation();

  ParallelPair pair;
  pair.fluent.assign(fluent.begin(), fluent.end());
  pair.disfluent.tokens = parsed.tokens;
  try {
    pair.alignment = align_pair(pair.fluent, pair.disfluent.tokens);
  } catch (const NonMonotonicPair&) {
    throw violation();
  }
  auto events = extract_events(pair);
  AnnotatedUtterance out;
  try {
    out = realize_events(fluent, events);
  } catch (const std::invalid_argument&) {
    // Overlapping repetitions cannot nest; mark them as plain reparanda.
    for (auto& ev : events) {
      if (const auto* rep = std::get_if<event::Repetition>(&ev.payload)) {
        std::vector<std::string> run;
        for (std::size_t k = 0; k < rep->length; ++k) run.push_back(fluent[ev.anchor + k].text);
        ev.payload = event::Substitution{std::move(run), {}};
      }
    }
    out = realize_events(fluent, events);
  }
  if (texts(out.tokens) != texts(parsed.tokens)) throw violation();
  return out;
}

struct RemoteInserter::Impl {
  explicit Impl(const RemoteEndpoint& e) : url(parse_url(e.base_url)), slots(static_cast<std::ptrdiff_t>(e.max_in_flight)) {}

  ParsedUrl url;
  mutable std::counting_semaphore<> slots;
};

RemoteInserter::RemoteInserter(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (!(endpoint_.timeout.count() > 0.0)) throw RemoteError(RemoteError::Kind::InvalidEndpoint, "timeout must be > 0");
  if (endpoint_.max_in_flight == 0) endpoint_.max_in_flight = 1;
  impl_ = std::make_unique<Impl>(endpoint_);
}

RemoteInserter::~RemoteInserter() = default;

std::string RemoteInserter::complete(const std::string& prompt) const {
  const std::string body = nlohmann::json{{"prompt", prompt}}.dump();
  httplib::Headers headers;
  if (endpoint_.bearer_token) headers.emplace("Authorization", "Bearer " + *endpoint_.bearer_token);

  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout).count();
  const time_t sec = static_cast<time_t>(micros / 1'000'000);
  const time_t usec = static_cast<time_t>(micros % 1'000'000);

  std::optional<RemoteError> last;
  for (std::size_t attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    httplib::Result res{nullptr, httplib::Error::Unknown};
    {
      impl_->slots.acquire();
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{impl_->slots};
      httplib::Client client(impl_->url.origin);
      client.set_connection_timeout(sec, usec);
      client.set_read_timeout(sec, usec);
      client.set_write_timeout(sec, usec);
      res = client.Post(impl_->url.path, headers, body, "application/json");
    }
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read || err == httplib::Error::Write) {
        last.emplace(RemoteError::Kind::Timeout, "request timed out (" + httplib::to_string(err) + ")");
      } else {
        last.emplace(RemoteError::Kind::HttpError, "transport error: " + httplib::to_string(err), 0);
      }
      continue;
    }
    const int status = res->status;
    if (status >= 200 && status < 300) {
      const auto doc = nlohmann::json::parse(res->body, nullptr, false);
      if (doc.is_discarded() || !doc.is_object() || !doc.contains("completion") || !doc["completion"].is_string()) {
        throw RemoteError(RemoteError::Kind::UnparseableCompletion, "response lacks a string 'completion'");
      }
      return doc["completion"].get<std::string>();
    }
    RemoteError error(RemoteError::Kind::HttpError, "HTTP status " + std::to_string(status), status);
    if (status < 500 && status != 429) throw error;
    last = std::move(error);
  }
  throw *last;
}

AnnotatedUtterance RemoteInserter::insert(std::span<const Token> fluent) const {
  if (fluent.empty()) throw RemoteError(RemoteError::Kind::RoundTripViolation, "empty fluent utterance");
  return annotate_completion(fluent, complete(build_prompt(fluent)));
}

AnnotatedUtterance insert_remote(const RemoteEndpoint& endpoint, std::span<const Token> fluent) {
  return RemoteInserter(endpoint).insert(fluent);
}

}  // namespace disfl
