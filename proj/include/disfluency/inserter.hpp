#pragma once

// Statistical disfluency insertion: event extraction from parallel pairs,
// model training, and rate-controlled generation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "disfluency/annotation.hpp"
#include "disfluency/corpus.hpp"

namespace disfl {

enum class EventKind { Repetition, Filler, FalseStart, SilentPause, Substitution };
inline constexpr std::size_t kEventKindCount = 5;
inline constexpr std::array<EventKind, kEventKindCount> kAllEventKinds = {
    EventKind::Repetition, EventKind::Filler, EventKind::FalseStart, EventKind::SilentPause,
    EventKind::Substitution};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

namespace event {

/// The `length` fluent tokens after the anchor, spoken twice.
struct Repetition {
  std::size_t length = 1;
  friend bool operator==(const Repetition&, const Repetition&) = default;
};

struct Filler {
  std::vector<std::string> tokens;
  friend bool operator==(const Filler&, const Filler&) = default;
};

/// `fragment` is a strict prefix of the anchor token followed by '-'.
struct FalseStart {
  std::string fragment;
  friend bool operator==(const FalseStart&, const FalseStart&) = default;
};

struct SilentPause {
  std::size_t count = 1;
  friend bool operator==(const SilentPause&, const SilentPause&) = default;
};

/// Abandoned material followed by optional editing terms.
struct Substitution {
  std::vector<std::string> reparandum;
  std::vector<std::string> editing;
  friend bool operator==(const Substitution&, const Substitution&) = default;
};

}  // namespace event

using EventPayload =
    std::variant<event::Repetition, event::Filler, event::FalseStart, event::SilentPause, event::Substitution>;

/// Material inserted immediately before fluent token `anchor` (anchor == n
/// means the end of the utterance).
struct DisfluencyEvent {
  EventPayload payload;
  std::size_t anchor = 0;

  EventKind kind() const noexcept { return static_cast<EventKind>(payload.index()); }
  /// Number of disfluent tokens the event adds.
  std::size_t inserted_tokens() const;

  friend bool operator==(const DisfluencyEvent&, const DisfluencyEvent&) = default;
};

/// Each maximal run of unaligned disfluent tokens becomes one event,
/// classified FalseStart > SilentPause > Repetition > Filler > Substitution.
/// Adjacent insertions with no fluent token between them merge into one run.
std::vector<DisfluencyEvent> extract_events(const ParallelPair& pair);

/// Builds the disfluent utterance for known events. Repetitions become a
/// reparandum copy plus a repair over the original tokens; events inside a
/// repetition's repair must not extend past it. Throws std::invalid_argument
/// for events that cannot be realized.
AnnotatedUtterance realize_events(std::span<const Token> fluent, std::span<const DisfluencyEvent> events);

// --- model ---------------------------------------------------------------

enum class PositionBucket { Start, Early, Mid, Late };
enum class PrevClass { None, Word, Filler, Pause };
inline constexpr std::size_t kContextCount = 16;

/// Context of the boundary before fluent token `anchor`: relative position
/// and the class of the fluent token just before the boundary.
std::size_t boundary_context(std::span<const Token> fluent, std::size_t anchor);
std::string context_name(std::size_t context);

inline constexpr int kModelVersion = 1;
inline constexpr std::size_t kMaxRepetition = 3;

struct InsertionModel {
  std::array<double, kContextCount> boundary_prob{};
  std::array<double, kEventKindCount> type_dist{};
  std::map<std::string, double> filler_lexicon;
  std::array<double, kMaxRepetition> repetition_len_dist{};  // index k-1
  double trained_rate = 0.0;

  double type_prob(EventKind kind) const { return type_dist[static_cast<std::size_t>(kind)]; }
};

class ModelError : public DataError {
 public:
  enum class Kind { EmptyTrainingSet, VersionMismatch, InvalidModel };

  ModelError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Laplace-smoothed boundary probabilities per context and empirical
/// event-type, filler and repetition-length distributions.
InsertionModel train_model(std::span<const ParallelPair> pairs);

/// Throws ModelError(InvalidModel) when a distribution is off.
void validate(const InsertionModel& model);

nlohmann::json model_to_json(const InsertionModel& model);
InsertionModel model_from_json(const nlohmann::json& doc);
std::string dump_model(const InsertionModel& model);
InsertionModel parse_model(std::string_view text);

// --- generation ----------------------------------------------------------

inline constexpr double kMaxTargetRate = 0.9;

struct GenerationConfig {
  std::uint64_t seed = 0;
  double target_rate = 0.0;
  std::size_t max_events_per_utterance = 32;
  std::array<bool, kEventKindCount> allow_kinds{true, true, true, true, true};

  bool allows(EventKind kind) const { return allow_kinds[static_cast<std::size_t>(kind)]; }
};

class GenerationError : public DataError {
 public:
  enum class Kind { EmptyInput, RateUnreachable, InvalidConfig };

  GenerationError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Scale factor c such that sum_b min(1, c * p_b) * e_b equals the inserted
/// token count that yields config.target_rate, where e_b is the expected
/// number of tokens an event at boundary b adds.
double calibration_factor(const InsertionModel& model, std::span<const Token> fluent, const GenerationConfig& config);

/// Events sampled for one utterance. `ordinal` selects the random stream, so
/// batch results do not depend on scheduling.
std::vector<DisfluencyEvent> plan_events(const InsertionModel& model, std::span<const Token> fluent,
                                         const GenerationConfig& config, std::uint64_t ordinal = 0);

/// strip_disfluencies(insert(...)) == fluent.
AnnotatedUtterance insert(const InsertionModel& model, std::span<const Token> fluent,
                          const GenerationConfig& config, std::uint64_t ordinal = 0);

/// insert() over many utterances, utterance i on stream i; output order
/// matches input order for any thread count.
std::vector<AnnotatedUtterance> insert_batch(const InsertionModel& model,
                                             std::span<const std::vector<Token>> fluent,
                                             const GenerationConfig& config, unsigned threads = 1);

}  // namespace disfl
