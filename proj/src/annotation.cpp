#include "disfluency/annotation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <tuple>

namespace disfl {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_structural(char c) { return c == '[' || c == ']' || c == '{' || c == '}'; }

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// ---------------------------------------------------------------------------
// Lexer

struct Lexeme {
  enum class Type { Word, LBracket, RBracket, Plus, LBrace, RBrace };
  Type type;
  std::string_view text;
  std::size_t offset;
  SpanKind brace_kind = SpanKind::Filler;
};

std::vector<Lexeme> lex(std::string_view markup) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  const std::size_t n = markup.size();
  while (i < n) {
    const char c = markup[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    switch (c) {
      case '[':
        out.push_back({Lexeme::Type::LBracket, markup.substr(i, 1), i});
        ++i;
        continue;
      case ']':
        out.push_back({Lexeme::Type::RBracket, markup.substr(i, 1), i});
        ++i;
        continue;
      case '}':
        out.push_back({Lexeme::Type::RBrace, markup.substr(i, 1), i});
        ++i;
        continue;
      case '{': {
        const char tag = i + 1 < n ? markup[i + 1] : '\0';
        const bool delimited = i + 2 >= n || is_space(markup[i + 2]) || markup[i + 2] == '}';
        SpanKind kind;
        if (tag == 'F') {
          kind = SpanKind::Filler;
        } else if (tag == 'E') {
          kind = SpanKind::EditingTerm;
        } else if (tag == 'D') {
          kind = SpanKind::DiscourseMarker;
        } else {
          throw ParseError(ParseError::Kind::UnknownBrace, i, "expected {F, {E or {D");
        }
        if (!delimited) {
          throw ParseError(ParseError::Kind::UnknownBrace, i, "brace tag must be followed by whitespace");
        }
        out.push_back({Lexeme::Type::LBrace, markup.substr(i, 2), i, kind});
        i += 2;
        continue;
      }
      default:
        break;
    }
    std::size_t j = i;
    while (j < n && !is_space(markup[j]) && !is_structural(markup[j])) ++j;
    const std::string_view word = markup.substr(i, j - i);
    out.push_back({word == "+" ? Lexeme::Type::Plus : Lexeme::Type::Word, word, i});
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Span ordering and depth

// `level` breaks ties between spans with identical extents: lower is outer.
struct RawSpan {
  SpanKind kind;
  std::size_t start;
  std::size_t end;
  int level;
};

bool contains(const RawSpan& outer, const RawSpan& inner) {
  return outer.start <= inner.start && inner.end <= outer.end;
}

std::vector<DisfluencySpan> order_spans(std::vector<RawSpan> raw) {
  std::stable_sort(raw.begin(), raw.end(), [](const RawSpan& a, const RawSpan& b) {
    return std::tuple(a.start, b.end, a.level) < std::tuple(b.start, a.end, b.level);
  });
  std::vector<DisfluencySpan> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    int depth = 0;
    for (std::size_t j = 0; j < i; ++j) {
      if (raw[j].end <= raw[i].start) continue;
      if (!contains(raw[j], raw[i])) {
        throw InvalidUtterance("spans " + std::to_string(raw[j].start) + ".." + std::to_string(raw[j].end) + " and " +
                               std::to_string(raw[i].start) + ".." + std::to_string(raw[i].end) + " overlap");
      }
      if (raw[j].start == raw[i].start && raw[j].end == raw[i].end && raw[j].level == raw[i].level) {
        throw InvalidUtterance("duplicate span extent at one depth");
      }
      ++depth;
    }
    out.push_back({raw[i].kind, raw[i].start, raw[i].end, depth});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view markup) : lexemes_(lex(markup)) {}

  AnnotatedUtterance run() {
    while (pos_ < lexemes_.size()) element(0);
    AnnotatedUtterance u{std::move(tokens_), order_spans(std::move(spans_))};
    return u;
  }

 private:
  enum class Element { Token, Pause, Brace, Bracket };

  Element element(int level) {
    const Lexeme& lx = lexemes_[pos_];
    switch (lx.type) {
      case Lexeme::Type::Word:
        ++pos_;
        add_word(lx.text, level);
        return lx.text == kSilenceToken ? Element::Pause : Element::Token;
      case Lexeme::Type::LBracket:
        bracket(level);
        return Element::Bracket;
      case Lexeme::Type::LBrace:
        brace(level);
        return Element::Brace;
      case Lexeme::Type::RBracket:
      case Lexeme::Type::RBrace:
        throw ParseError(ParseError::Kind::UnbalancedBracket, lx.offset, "unmatched closing bracket");
      case Lexeme::Type::Plus:
        break;
    }
    throw ParseError(ParseError::Kind::StrayInterruptionPoint, lx.offset, "'+' outside a reparandum bracket");
  }

  void add_word(std::string_view text, int level) {
    const std::size_t index = tokens_.size();
    tokens_.push_back(make_token(std::string(text), filler_depth_ > 0));
    const TokenKind kind = tokens_.back().kind;
    if (kind == TokenKind::SilentPause) {
      spans_.push_back({SpanKind::SilentPause, index, index + 1, level});
    } else if (kind == TokenKind::FalseStartFragment && removable_depth_ == 0) {
      spans_.push_back({SpanKind::Reparandum, index, index + 1, level});
    }
  }

  void brace(int level) {
    const Lexeme open = lexemes_[pos_++];
    const bool removable = open.brace_kind == SpanKind::Filler || open.brace_kind == SpanKind::EditingTerm;
    const std::size_t start = tokens_.size();
    if (open.brace_kind == SpanKind::Filler) ++filler_depth_;
    if (removable) ++removable_depth_;
    for (;;) {
      if (pos_ >= lexemes_.size()) {
        throw ParseError(ParseError::Kind::UnbalancedBracket, open.offset, "unclosed brace");
      }
      if (lexemes_[pos_].type == Lexeme::Type::RBrace) {
        ++pos_;
        break;
      }
      element(level + 1);
    }
    if (open.brace_kind == SpanKind::Filler) --filler_depth_;
    if (removable) --removable_depth_;
    if (tokens_.size() == start) {
      throw ParseError(ParseError::Kind::EmptyBrace, open.offset, "empty brace");
    }
    spans_.push_back({open.brace_kind, start, tokens_.size(), level});
  }

  void bracket(int level) {
    const Lexeme open = lexemes_[pos_++];
    const std::size_t start = tokens_.size();
    ++removable_depth_;
    for (;;) {
      if (pos_ >= lexemes_.size()) {
        throw ParseError(ParseError::Kind::UnbalancedBracket, open.offset, "unclosed bracket");
      }
      const auto type = lexemes_[pos_].type;
      if (type == Lexeme::Type::Plus) break;
      if (type == Lexeme::Type::RBracket) {
        throw ParseError(ParseError::Kind::MissingInterruptionPoint, open.offset, "bracket has no '+'");
      }
      element(level + 1);
    }
    --removable_depth_;
    const std::size_t reparandum_end = tokens_.size();
    if (reparandum_end == start) {
      throw ParseError(ParseError::Kind::EmptyBrace, open.offset, "empty reparandum");
    }
    ++pos_;  // '+'

    std::optional<std::size_t> repair_start;
    for (;;) {
      if (pos_ >= lexemes_.size()) {
        throw ParseError(ParseError::Kind::UnbalancedBracket, open.offset, "unclosed bracket");
      }
      const Lexeme& lx = lexemes_[pos_];
      if (lx.type == Lexeme::Type::RBracket) {
        ++pos_;
        break;
      }
      if (lx.type == Lexeme::Type::Plus) {
        throw ParseError(ParseError::Kind::StrayInterruptionPoint, lx.offset, "second '+' in one bracket");
      }
      const std::size_t before = tokens_.size();
      const Element e = element(level + 1);
      if (!repair_start && (e == Element::Token || e == Element::Bracket)) repair_start = before;
    }
    spans_.push_back({SpanKind::Reparandum, start, reparandum_end, level});
    if (repair_start && tokens_.size() > *repair_start) {
      spans_.push_back({SpanKind::Repair, *repair_start, tokens_.size(), level});
    }
  }

  std::vector<Lexeme> lexemes_;
  std::size_t pos_ = 0;
  std::vector<Token> tokens_;
  std::vector<RawSpan> spans_;
  int filler_depth_ = 0;
  int removable_depth_ = 0;
};

// ---------------------------------------------------------------------------
// Serializer

bool is_interregnum(SpanKind kind) {
  return kind == SpanKind::Filler || kind == SpanKind::EditingTerm || kind == SpanKind::SilentPause ||
         kind == SpanKind::DiscourseMarker;
}

class Serializer {
 public:
  explicit Serializer(const AnnotatedUtterance& u) : u_(u) {}

  std::string run() {
    emit_range(0, u_.tokens.size(), 0);
    return std::move(out_);
  }

 private:
  void put(std::string_view piece) {
    if (!out_.empty() && piece != "}") out_ += ' ';
    out_ += piece;
  }

  std::vector<const DisfluencySpan*> at_depth(std::size_t begin, std::size_t end, int depth) const {
    std::vector<const DisfluencySpan*> out;
    for (const auto& s : u_.spans) {
      if (s.depth == depth && s.start >= begin && s.end <= end) out.push_back(&s);
    }
    return out;
  }

  void emit_range(std::size_t begin, std::size_t end, int depth) {
    const auto level = at_depth(begin, end, depth);
    std::size_t p = begin;
    std::size_t idx = 0;
    while (p < end) {
      if (idx < level.size() && level[idx]->start == p) {
        const DisfluencySpan& s = *level[idx];
        if (s.kind == SpanKind::Reparandum) {
          std::size_t k = idx + 1;
          std::size_t q = s.end;
          while (k < level.size() && level[k]->start == q && is_interregnum(level[k]->kind)) q = level[k++]->end;
          const bool has_repair = k < level.size() && level[k]->start == q && level[k]->kind == SpanKind::Repair;
          if (!has_repair && auto_wrapped(s)) {
            // The parser wraps a bare fragment by itself.
            put(u_.tokens[s.start].text);
            p = s.end;
            ++idx;
            continue;
          }
          put("[");
          emit_range(s.start, s.end, depth + 1);
          put("+");
          for (std::size_t m = idx + 1; m < k; ++m) emit_span(*level[m], depth);
          if (has_repair) {
            emit_range(level[k]->start, level[k]->end, depth + 1);
            p = level[k]->end;
            idx = k + 1;
          } else {
            p = q;
            idx = k;
          }
          put("]");
        } else if (s.kind == SpanKind::Repair) {
          throw InvalidUtterance("repair span without a reparandum");
        } else {
          emit_span(s, depth);
          p = s.end;
          ++idx;
        }
      } else {
        put(u_.tokens[p].text);
        ++p;
      }
    }
  }

  bool auto_wrapped(const DisfluencySpan& s) const {
    if (s.size() != 1 || u_.tokens[s.start].kind != TokenKind::FalseStartFragment) return false;
    return std::none_of(u_.spans.begin(), u_.spans.end(), [&](const DisfluencySpan& o) {
      return &o != &s && is_removable(o.kind) && o.start <= s.start && o.end >= s.end;
    });
  }

  void emit_span(const DisfluencySpan& s, int depth) {
    switch (s.kind) {
      case SpanKind::Filler:
        put("{F");
        break;
      case SpanKind::EditingTerm:
        put("{E");
        break;
      case SpanKind::DiscourseMarker:
        put("{D");
        break;
      default:
        emit_range(s.start, s.end, depth + 1);
        return;
    }
    emit_range(s.start, s.end, depth + 1);
    put("}");
  }

  const AnnotatedUtterance& u_;
  std::string out_;
};

bool covered_by(const AnnotatedUtterance& u, std::size_t token, SpanKind kind) {
  return std::any_of(u.spans.begin(), u.spans.end(),
                     [&](const DisfluencySpan& s) { return s.kind == kind && s.contains(token); });
}

std::optional<BioLabel> bio_label(SpanKind kind) {
  switch (kind) {
    case SpanKind::Reparandum:
      return BioLabel::RM;
    case SpanKind::Repair:
      return BioLabel::RP;
    case SpanKind::Filler:
    case SpanKind::EditingTerm:
      return BioLabel::FL;
    case SpanKind::SilentPause:
      return BioLabel::SP;
    case SpanKind::DiscourseMarker:
      break;
  }
  return std::nullopt;
}

SpanKind span_kind(BioLabel label) {
  switch (label) {
    case BioLabel::RM:
      return SpanKind::Reparandum;
    case BioLabel::RP:
      return SpanKind::Repair;
    case BioLabel::FL:
      return SpanKind::Filler;
    case BioLabel::SP:
      break;
  }
  return SpanKind::SilentPause;
}

constexpr std::array<std::string_view, 4> kBioLabelNames = {"RM", "RP", "FL", "SP"};

}  // namespace

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : DataError("markup error at byte " + std::to_string(offset) + ": " + what), kind_(kind), offset_(offset) {}

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Word:
      return "Word";
    case TokenKind::FilledPause:
      return "FilledPause";
    case TokenKind::SilentPause:
      return "SilentPause";
    case TokenKind::FalseStartFragment:
      return "FalseStartFragment";
  }
  return "?";
}

std::string_view to_string(SpanKind kind) {
  switch (kind) {
    case SpanKind::Filler:
      return "Filler";
    case SpanKind::Reparandum:
      return "Reparandum";
    case SpanKind::Repair:
      return "Repair";
    case SpanKind::SilentPause:
      return "SilentPause";
    case SpanKind::EditingTerm:
      return "EditingTerm";
    case SpanKind::DiscourseMarker:
      return "DiscourseMarker";
  }
  return "?";
}

std::optional<SpanKind> span_kind_from_string(std::string_view name) {
  for (SpanKind k : {SpanKind::Filler, SpanKind::Reparandum, SpanKind::Repair, SpanKind::SilentPause,
                     SpanKind::EditingTerm, SpanKind::DiscourseMarker}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

bool is_fragment_text(std::string_view text) {
  return text.size() >= 2 && text.back() == '-' && text[text.size() - 2] != '-';
}

bool is_filler_word(std::string_view text) {
  static constexpr std::array<std::string_view, 13> kFillers = {"uh", "um",  "erm", "er",  "ah",  "eh",  "hmm",
                                                                "hm", "mm",  "uhm", "umm", "uhh", "ehm"};
  const std::string lower = ascii_lower(text);
  return std::find(kFillers.begin(), kFillers.end(), lower) != kFillers.end();
}

Token make_token(std::string text, bool in_filler) {
  TokenKind kind = TokenKind::Word;
  if (text == kSilenceToken) {
    kind = TokenKind::SilentPause;
  } else if (in_filler) {
    kind = TokenKind::FilledPause;
  } else if (is_fragment_text(text)) {
    kind = TokenKind::FalseStartFragment;
  }
  return {std::move(text), kind};
}

std::vector<Token> tokenize_fluent(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.push_back(Token::word(std::string(text.substr(i, j - i))));
    i = j;
  }
  return out;
}

std::string join_tokens(std::span<const Token> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.text;
  }
  return out;
}

AnnotatedUtterance parse_annotated(std::string_view markup) {
  AnnotatedUtterance u = Parser(markup).run();
  validate(u);
  return u;
}

std::string serialize(const AnnotatedUtterance& utterance) { return Serializer(utterance).run(); }

void validate(const AnnotatedUtterance& u) {
  const std::size_t n = u.tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Token& t = u.tokens[i];
    if (t.text.empty() || std::any_of(t.text.begin(), t.text.end(), is_space)) {
      throw InvalidUtterance("token " + std::to_string(i) + " is empty or contains whitespace");
    }
    if (t.text == "+" || std::any_of(t.text.begin(), t.text.end(), is_structural)) {
      throw InvalidUtterance("token " + std::to_string(i) + " contains markup characters: " + t.text);
    }
    if ((t.kind == TokenKind::SilentPause) != (t.text == kSilenceToken)) {
      throw InvalidUtterance("token " + std::to_string(i) + ": <sil> must be exactly the silent-pause tokens");
    }
    if (t.kind == TokenKind::FalseStartFragment && !is_fragment_text(t.text)) {
      throw InvalidUtterance("token " + std::to_string(i) + " is not a valid fragment: " + t.text);
    }
  }

  std::vector<RawSpan> raw;
  raw.reserve(u.spans.size());
  for (const auto& s : u.spans) {
    if (!(s.start < s.end && s.end <= n)) {
      throw InvalidUtterance("span " + std::to_string(s.start) + ".." + std::to_string(s.end) + " out of range");
    }
    if (s.depth < 0) throw InvalidUtterance("negative span depth");
    raw.push_back({s.kind, s.start, s.end, s.depth});
  }
  if (order_spans(raw) != u.spans) {
    throw InvalidUtterance("spans are not in document order or depths are inconsistent");
  }

  const auto mask = disfluent_mask(u);
  for (std::size_t i = 0; i < n; ++i) {
    const Token& t = u.tokens[i];
    if (t.kind == TokenKind::FilledPause && !covered_by(u, i, SpanKind::Filler)) {
      throw InvalidUtterance("filled pause outside a filler span at token " + std::to_string(i));
    }
    if (t.kind == TokenKind::SilentPause && !covered_by(u, i, SpanKind::SilentPause)) {
      throw InvalidUtterance("silent pause outside a pause span at token " + std::to_string(i));
    }
    if (t.kind == TokenKind::FalseStartFragment && !mask[i]) {
      throw InvalidUtterance("fragment outside a removable span at token " + std::to_string(i));
    }
  }
  for (const auto& s : u.spans) {
    if (s.kind == SpanKind::SilentPause) {
      for (std::size_t i = s.start; i < s.end; ++i) {
        if (u.tokens[i].kind != TokenKind::SilentPause) {
          throw InvalidUtterance("silent-pause span covers a non-pause token");
        }
      }
    }
    if (s.kind != SpanKind::Repair) continue;
    // Walk back over interregnum spans to the paired reparandum.
    std::size_t p = s.start;
    bool paired = false;
    while (p > 0) {
      const auto prev = std::find_if(u.spans.begin(), u.spans.end(), [&](const DisfluencySpan& o) {
        return o.end == p && o.depth == s.depth;
      });
      if (prev == u.spans.end()) break;
      if (prev->kind == SpanKind::Reparandum) {
        paired = true;
        break;
      }
      if (!is_interregnum(prev->kind)) break;
      p = prev->start;
    }
    if (!paired) {
      throw InvalidUtterance("repair at " + std::to_string(s.start) + " has no preceding reparandum");
    }
  }
}

AnnotatedUtterance make_utterance(std::vector<Token> tokens, std::vector<DisfluencySpan> spans) {
  std::vector<RawSpan> raw;
  raw.reserve(spans.size());
  for (const auto& s : spans) {
    if (!(s.start < s.end && s.end <= tokens.size())) {
      throw InvalidUtterance("span " + std::to_string(s.start) + ".." + std::to_string(s.end) + " out of range");
    }
    raw.push_back({s.kind, s.start, s.end, s.depth});
  }
  AnnotatedUtterance u{std::move(tokens), order_spans(std::move(raw))};
  validate(u);
  return u;
}

AnnotatedUtterance utterance_from_strings(const std::vector<std::string>& words, std::vector<DisfluencySpan> spans) {
  std::vector<bool> in_filler(words.size(), false);
  for (const auto& s : spans) {
    if (s.kind != SpanKind::Filler) continue;
    for (std::size_t i = s.start; i < s.end && i < words.size(); ++i) in_filler[i] = true;
  }
  std::vector<Token> tokens;
  tokens.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) tokens.push_back(make_token(words[i], in_filler[i]));
  return make_utterance(std::move(tokens), std::move(spans));
}

// ---------------------------------------------------------------------------
// BIO

std::string BioTag::str() const {
  if (position == BioPosition::O || !label) return "O";
  std::string out = position == BioPosition::B ? "B-" : "I-";
  out += kBioLabelNames[static_cast<std::size_t>(*label)];
  return out;
}

std::optional<BioTag> BioTag::parse(std::string_view text) {
  if (text == "O") return outside();
  if (text.size() != 4 || text[1] != '-') return std::nullopt;
  BioPosition pos;
  if (text[0] == 'B') {
    pos = BioPosition::B;
  } else if (text[0] == 'I') {
    pos = BioPosition::I;
  } else {
    return std::nullopt;
  }
  for (std::size_t i = 0; i < kBioLabelNames.size(); ++i) {
    if (text.substr(2) == kBioLabelNames[i]) return BioTag{pos, static_cast<BioLabel>(i)};
  }
  return std::nullopt;
}

namespace {

/// Deepest non-discourse-marker span containing token i, or null.
const DisfluencySpan* innermost_span(const AnnotatedUtterance& u, std::size_t i) {
  const DisfluencySpan* innermost = nullptr;
  for (const auto& s : u.spans) {
    if (!s.contains(i) || s.kind == SpanKind::DiscourseMarker) continue;
    if (innermost == nullptr || s.depth > innermost->depth) innermost = &s;
  }
  return innermost;
}

}  // namespace

std::vector<BioTag> to_bio(const AnnotatedUtterance& u) {
  std::vector<BioTag> tags;
  tags.reserve(u.tokens.size());
  const DisfluencySpan* previous = nullptr;
  for (std::size_t i = 0; i < u.tokens.size(); ++i) {
    const DisfluencySpan* innermost = innermost_span(u, i);
    if (innermost == nullptr) {
      tags.push_back(BioTag::outside());
    } else {
      const BioLabel label = *bio_label(innermost->kind);
      tags.push_back(innermost == previous ? BioTag::inside(label) : BioTag::begin(label));
    }
    previous = innermost;
  }
  return tags;
}

namespace {

// Flat BIO spans -> paired structure. A repair that directly follows another
// repair (interregnum allowed in between) repairs the whole earlier
// reparandum+repair complex, which becomes an outer reparandum; this restores
// nested restarts such as "[ [ I + I ] + I ]". A repair with nothing to pair
// with is dropped: its tokens are retained either way.
std::vector<DisfluencySpan> pair_repairs(const std::vector<DisfluencySpan>& flat) {
  std::vector<DisfluencySpan> out;
  std::vector<std::size_t> complex_start;  // per kept flat span: start of its RM..RP complex
  std::vector<const DisfluencySpan*> kept;
  for (const auto& s : flat) {
    std::size_t start = s.start;
    if (s.kind == SpanKind::Repair) {
      std::size_t j = kept.size();
      std::size_t pos = s.start;
      while (j > 0 && kept[j - 1]->end == pos && is_interregnum(kept[j - 1]->kind)) pos = kept[--j]->start;
      if (j == 0 || kept[j - 1]->end != pos ||
          (kept[j - 1]->kind != SpanKind::Reparandum && kept[j - 1]->kind != SpanKind::Repair)) {
        continue;
      }
      if (kept[j - 1]->kind == SpanKind::Repair) {
        out.push_back({SpanKind::Reparandum, complex_start[j - 1], pos, 0});
      }
      start = complex_start[j - 1];
    }
    out.push_back(s);
    kept.push_back(&s);
    complex_start.push_back(start);
  }
  return out;
}

}  // namespace

AnnotatedUtterance from_bio(std::vector<Token> tokens, std::span<const BioTag> tags) {
  if (tokens.size() != tags.size()) {
    throw BioError(BioError::Kind::LengthMismatch, "BIO: " + std::to_string(tokens.size()) + " tokens but " +
                                                       std::to_string(tags.size()) + " tags");
  }
  std::vector<DisfluencySpan> spans;
  std::optional<BioLabel> open;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const BioTag& tag = tags[i];
    if (tag.position != BioPosition::O && !tag.label) {
      throw BioError(BioError::Kind::IllFormedTagSequence, "BIO: missing label at token " + std::to_string(i));
    }
    // Filler tokens are filled pauses, whatever the source annotation said.
    if (tag.label == BioLabel::FL && tag.position != BioPosition::O) tokens[i] = make_token(tokens[i].text, true);
    switch (tag.position) {
      case BioPosition::O:
        open.reset();
        break;
      case BioPosition::B:
        spans.push_back({span_kind(*tag.label), i, i + 1, 0});
        open = tag.label;
        break;
      case BioPosition::I:
        if (open != tag.label) {
          throw BioError(BioError::Kind::IllFormedTagSequence,
                         "BIO: " + tag.str() + " at token " + std::to_string(i) + " does not continue a span");
        }
        spans.back().end = i + 1;
        break;
    }
  }
  try {
    return make_utterance(std::move(tokens), pair_repairs(spans));
  } catch (const InvalidUtterance& e) {
    throw BioError(BioError::Kind::IllFormedTagSequence, std::string("BIO: ") + e.what());
  }
}

AnnotatedUtterance flatten(const AnnotatedUtterance& u) {
  std::vector<Token> tokens = u.tokens;
  std::vector<DisfluencySpan> flat;
  const DisfluencySpan* previous = nullptr;
  for (std::size_t i = 0; i < u.tokens.size(); ++i) {
    const DisfluencySpan* innermost = innermost_span(u, i);
    if (innermost != nullptr && innermost == previous) {
      flat.back().end = i + 1;
    } else if (innermost != nullptr) {
      const SpanKind kind = innermost->kind == SpanKind::EditingTerm ? SpanKind::Filler : innermost->kind;
      flat.push_back({kind, i, i + 1, 0});
    }
    // Editing terms become fillers, whose tokens are filled pauses.
    if (innermost != nullptr && innermost->kind == SpanKind::EditingTerm) tokens[i] = make_token(tokens[i].text, true);
    previous = innermost;
  }
  return make_utterance(std::move(tokens), pair_repairs(flat));
}

// ---------------------------------------------------------------------------
// Stripping and rates

bool is_removable(SpanKind kind) noexcept {
  return kind == SpanKind::Filler || kind == SpanKind::Reparandum || kind == SpanKind::EditingTerm ||
         kind == SpanKind::SilentPause;
}

std::vector<bool> disfluent_mask(const AnnotatedUtterance& u) {
  std::vector<bool> mask(u.tokens.size(), false);
  for (const auto& s : u.spans) {
    if (!is_removable(s.kind)) continue;
    for (std::size_t i = s.start; i < s.end && i < mask.size(); ++i) mask[i] = true;
  }
  return mask;
}

std::size_t disfluent_token_count(const AnnotatedUtterance& u) {
  const auto mask = disfluent_mask(u);
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

std::vector<Token> strip_disfluencies(const AnnotatedUtterance& u) {
  const auto mask = disfluent_mask(u);
  std::vector<Token> out;
  out.reserve(u.tokens.size());
  for (std::size_t i = 0; i < u.tokens.size(); ++i) {
    if (!mask[i]) out.push_back(u.tokens[i]);
  }
  return out;
}

double disfluency_rate(const AnnotatedUtterance& u) {
  if (u.tokens.empty()) throw EmptyUtterance();
  return static_cast<double>(disfluent_token_count(u)) / static_cast<double>(u.tokens.size());
}

}  // namespace disfl
