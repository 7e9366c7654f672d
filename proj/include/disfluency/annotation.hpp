#pragma once

// Disfluency-annotated utterances: the markup grammar, BIO conversion,
// stripping and disfluency rates.
//
// Markup grammar (one utterance per string, whitespace-separated):
//
//   {F uh}            filler            {E I mean}   editing term
//   {D well}          discourse marker  <sil>        silent pause
//   [ RM + RP ]       reparandum RM, interruption point '+', repair RP
//
// Constructs nest. A repair may be empty (`[ x + ]`, a deletion restart).
// Braces and <sil> tokens directly after '+' form the interregnum and are
// not part of the repair. A bare false-start fragment ("b-") outside any
// removable region is wrapped in its own single-token reparandum.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disfluency/error.hpp"

namespace disfl {

inline constexpr std::string_view kSilenceToken = "<sil>";

enum class TokenKind { Word, FilledPause, SilentPause, FalseStartFragment };

struct Token {
  std::string text;
  TokenKind kind = TokenKind::Word;

  static Token word(std::string text) { return {std::move(text), TokenKind::Word}; }

  friend bool operator==(const Token&, const Token&) = default;
};

enum class SpanKind {
  Filler,
  Reparandum,
  Repair,
  SilentPause,
  EditingTerm,
  DiscourseMarker
};

/// Half-open token range [start, end) at a nesting depth.
struct DisfluencySpan {
  SpanKind kind = SpanKind::Filler;
  std::size_t start = 0;
  std::size_t end = 0;
  int depth = 0;

  std::size_t size() const noexcept { return end - start; }
  bool contains(std::size_t token) const noexcept { return token >= start && token < end; }

  friend bool operator==(const DisfluencySpan&, const DisfluencySpan&) = default;
};

struct AnnotatedUtterance {
  std::vector<Token> tokens;
  std::vector<DisfluencySpan> spans;  // document order

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }

  friend bool operator==(const AnnotatedUtterance&, const AnnotatedUtterance&) = default;
};

class ParseError : public DataError {
 public:
  enum class Kind {
    UnbalancedBracket,
    MissingInterruptionPoint,
    EmptyBrace,
    StrayInterruptionPoint,
    UnknownBrace
  };

  ParseError(Kind kind, std::size_t offset, const std::string& what);

  Kind kind() const noexcept { return kind_; }
  /// Byte offset into the markup string.
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// An utterance violates a structural invariant (bad span ranges, overlap,
/// orphaned repair, unspanned pause or fragment tokens).
class InvalidUtterance : public DataError {
 public:
  using DataError::DataError;
};

class EmptyUtterance : public DataError {
 public:
  EmptyUtterance() : DataError("utterance has no tokens") {}
};

std::string_view to_string(TokenKind kind);
std::string_view to_string(SpanKind kind);
std::optional<SpanKind> span_kind_from_string(std::string_view name);

/// "b-", "Th-": at least one character before a single trailing hyphen.
bool is_fragment_text(std::string_view text);
/// Lexical filled pauses (um, uh, erm, ...), case-insensitive.
bool is_filler_word(std::string_view text);

/// Token kind from surface text. `in_filler` marks tokens inside a Filler span.
Token make_token(std::string text, bool in_filler = false);

/// Whitespace tokenization of plain fluent text; every token is a Word.
std::vector<Token> tokenize_fluent(std::string_view text);

/// Token texts joined by single spaces.
std::string join_tokens(std::span<const Token> tokens);

AnnotatedUtterance parse_annotated(std::string_view markup);

/// Inverse of parse_annotated: parse_annotated(serialize(u)) == u for every
/// utterance produced by the parser.
std::string serialize(const AnnotatedUtterance& utterance);

/// Throws InvalidUtterance if any invariant fails.
void validate(const AnnotatedUtterance& utterance);

/// Sorts spans into document order, recomputes depth from containment and
/// validates. Spans with identical extents keep their given relative depth.
AnnotatedUtterance make_utterance(std::vector<Token> tokens, std::vector<DisfluencySpan> spans);

/// Rebuilds token kinds from surface strings (used by JSONL and BIO readers).
AnnotatedUtterance utterance_from_strings(const std::vector<std::string>& words,
                                          std::vector<DisfluencySpan> spans);

// --- BIO tags -------------------------------------------------------------

enum class BioPosition { B, I, O };
enum class BioLabel { RM, RP, FL, SP };

struct BioTag {
  BioPosition position = BioPosition::O;
  std::optional<BioLabel> label;

  static BioTag outside() { return {}; }
  static BioTag begin(BioLabel l) { return {BioPosition::B, l}; }
  static BioTag inside(BioLabel l) { return {BioPosition::I, l}; }

  std::string str() const;
  static std::optional<BioTag> parse(std::string_view text);

  friend bool operator==(const BioTag&, const BioTag&) = default;
};

class BioError : public DataError {
 public:
  enum class Kind { LengthMismatch, IllFormedTagSequence };

  BioError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// One tag per token. Nested spans flatten innermost-wins; editing terms map
/// to FL and discourse markers to O, so the conversion is lossy for them.
std::vector<BioTag> to_bio(const AnnotatedUtterance& utterance);

/// Spans rebuilt from flat tags. A repair directly following another repair
/// makes the earlier reparandum+repair an outer reparandum, so simple nested
/// restarts survive; an unpaired repair tag is dropped.
AnnotatedUtterance from_bio(std::vector<Token> tokens, std::span<const BioTag> tags);

/// The utterance BIO can represent: innermost-wins spans, editing terms as
/// fillers, discourse markers removed. from_bio(u.tokens, to_bio(u)) == flatten(u).
AnnotatedUtterance flatten(const AnnotatedUtterance& utterance);

// --- stripping and rates -------------------------------------------------

/// True for span kinds whose tokens are removed when stripping.
bool is_removable(SpanKind kind) noexcept;

/// mask[i] is true when token i lies inside any removable span.
std::vector<bool> disfluent_mask(const AnnotatedUtterance& utterance);
std::size_t disfluent_token_count(const AnnotatedUtterance& utterance);

std::vector<Token> strip_disfluencies(const AnnotatedUtterance& utterance);

/// Disfluent tokens over all tokens. Throws EmptyUtterance.
double disfluency_rate(const AnnotatedUtterance& utterance);

}  // namespace disfl
