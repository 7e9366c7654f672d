#include "disfluency/inserter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "disfluency/random.hpp"

namespace disfl {

namespace {

constexpr std::array<std::string_view, kEventKindCount> kEventKindNames = {"Repetition", "Filler", "FalseStart",
                                                                           "SilentPause", "Substitution"};
constexpr std::array<std::string_view, 4> kBucketNames = {"start", "early", "mid", "late"};
constexpr std::array<std::string_view, 4> kPrevNames = {"none", "word", "filler", "pause"};
constexpr std::string_view kModelFormat = "disfluency-insertion-model";
constexpr double kSumTolerance = 1e-9;

bool filler_class(const Token& t) { return t.kind == TokenKind::FilledPause || is_filler_word(t.text); }

bool iequal_prefix(std::string_view prefix, std::string_view text) {
  if (prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(prefix[i])) != std::tolower(static_cast<unsigned char>(text[i]))) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> texts(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

/// First ceil(len/2) code points plus '-', or empty when no valid strict
/// prefix fragment exists.
std::string false_start_fragment(std::string_view word) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if ((static_cast<unsigned char>(word[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  const std::size_t len = starts.size();
  if (len < 2) return {};
  const std::size_t keep = (len + 1) / 2;
  std::string fragment(word.substr(0, starts[keep]));
  fragment += '-';
  return is_fragment_text(fragment) ? fragment : std::string{};
}

EventPayload classify_run(std::span<const Token> run, std::span<const Token> fluent, std::size_t anchor) {
  const std::size_t n = fluent.size();
  if (run.size() == 1 && is_fragment_text(run[0].text) && anchor < n) {
    const std::string_view stem = std::string_view(run[0].text).substr(0, run[0].text.size() - 1);
    if (iequal_prefix(stem, fluent[anchor].text)) return event::FalseStart{run[0].text};
  }
  if (std::all_of(run.begin(), run.end(), [](const Token& t) { return t.text == kSilenceToken; })) {
    return event::SilentPause{run.size()};
  }
  if (anchor + run.size() <= n &&
      std::equal(run.begin(), run.end(), fluent.begin() + static_cast<std::ptrdiff_t>(anchor),
                 [](const Token& a, const Token& b) { return a.text == b.text; })) {
    return event::Repetition{run.size()};
  }
  if (std::all_of(run.begin(), run.end(), filler_class)) return event::Filler{texts(run)};

  std::size_t cut = run.size();
  while (cut > 1 && filler_class(run[cut - 1])) --cut;
  return event::Substitution{texts(run.first(cut)), texts(run.subspan(cut))};
}

struct Boundary {
  double prob = 0.0;
  std::array<double, kEventKindCount> weight{};
  double total_weight = 0.0;
  double expected_tokens = 0.0;
  std::size_t max_repetition = 0;
  std::string fragment;
};

double expected_repetition(const InsertionModel& model, std::size_t max_k) {
  double mass = 0.0;
  double mean = 0.0;
  for (std::size_t k = 1; k <= std::min(max_k, kMaxRepetition); ++k) {
    mass += model.repetition_len_dist[k - 1];
    mean += static_cast<double>(k) * model.repetition_len_dist[k - 1];
  }
  return mass > 0.0 ? mean / mass : 0.0;
}

std::vector<Boundary> boundaries(const InsertionModel& model, std::span<const Token> fluent,
                                 const GenerationConfig& config) {
  const std::size_t n = fluent.size();
  std::vector<Boundary> out(n + 1);
  const bool has_lexicon = !model.filler_lexicon.empty();
  for (std::size_t b = 0; b <= n; ++b) {
    Boundary& bd = out[b];
    bd.prob = model.boundary_prob[boundary_context(fluent, b)];
    bd.max_repetition = std::min(kMaxRepetition, n - b);
    if (b < n) bd.fragment = false_start_fragment(fluent[b].text);

    std::array<double, kEventKindCount> tokens{};
    tokens[static_cast<std::size_t>(EventKind::Repetition)] = expected_repetition(model, bd.max_repetition);
    tokens[static_cast<std::size_t>(EventKind::Filler)] = 1.0;
    tokens[static_cast<std::size_t>(EventKind::FalseStart)] = 1.0;
    tokens[static_cast<std::size_t>(EventKind::SilentPause)] = 1.0;
    tokens[static_cast<std::size_t>(EventKind::Substitution)] = 2.0;

    for (EventKind kind : kAllEventKinds) {
      const auto i = static_cast<std::size_t>(kind);
      bool eligible = config.allows(kind) && model.type_dist[i] > 0.0;
      switch (kind) {
        case EventKind::Repetition:
          eligible = eligible && b < n && tokens[i] > 0.0;
          break;
        case EventKind::FalseStart:
          eligible = eligible && !bd.fragment.empty();
          break;
        case EventKind::Substitution:
          eligible = eligible && b < n && has_lexicon;
          break;
        case EventKind::Filler:
          eligible = eligible && has_lexicon;
          break;
        case EventKind::SilentPause:
          break;
      }
      if (!eligible) continue;
      bd.weight[i] = model.type_dist[i];
      bd.total_weight += model.type_dist[i];
      bd.expected_tokens += model.type_dist[i] * tokens[i];
    }
    if (bd.total_weight > 0.0) bd.expected_tokens /= bd.total_weight;
  }
  return out;
}

double solve_scale(std::span<const Boundary> bds, double target_tokens, std::size_t max_events) {
  if (target_tokens <= 0.0) return 0.0;
  std::vector<const Boundary*> active;
  for (const auto& b : bds) {
    if (b.total_weight > 0.0 && b.expected_tokens > 0.0 && b.prob > 0.0) active.push_back(&b);
  }
  std::vector<double> yields;
  for (const auto* b : active) yields.push_back(b->expected_tokens);
  std::sort(yields.begin(), yields.end(), std::greater<>());
  if (yields.size() > max_events) yields.resize(max_events);
  const double ceiling = std::accumulate(yields.begin(), yields.end(), 0.0);
  if (target_tokens > ceiling * (1.0 + 1e-12)) {
    throw GenerationError(GenerationError::Kind::RateUnreachable,
                          "target rate needs " + std::to_string(target_tokens) + " inserted tokens but at most " +
                              std::to_string(ceiling) + " are possible");
  }

  // Water-filling: boundaries with larger p saturate (c * p >= 1) first.
  std::sort(active.begin(), active.end(), [](const Boundary* a, const Boundary* b) { return a->prob > b->prob; });
  double saturated = 0.0;
  double slope = 0.0;
  for (const auto* b : active) slope += b->prob * b->expected_tokens;
  for (const auto* b : active) {
    const double c = (target_tokens - saturated) / slope;
    if (c * b->prob <= 1.0) return c;
    saturated += b->expected_tokens;
    slope -= b->prob * b->expected_tokens;
    if (slope <= 0.0) break;
  }
  return 1.0 / active.back()->prob;
}

void check_config(const GenerationConfig& config) {
  if (!(config.target_rate >= 0.0 && config.target_rate <= kMaxTargetRate)) {
    throw GenerationError(GenerationError::Kind::InvalidConfig, "target rate must lie in [0, 0.9]");
  }
}

std::size_t pick(std::span<const double> weights, double total, double u) {
  double acc = 0.0;
  const double x = u * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (x < acc) return i;
  }
  return last;
}

std::string pick_word(const std::map<std::string, double>& lexicon, double u) {
  std::vector<double> w;
  w.reserve(lexicon.size());
  double total = 0.0;
  for (const auto& [token, p] : lexicon) {
    w.push_back(p);
    total += p;
  }
  auto it = lexicon.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(pick(w, total, u)));
  return it->first;
}

}  // namespace

std::string_view to_string(EventKind kind) { return kEventKindNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kEventKindNames.size(); ++i) {
    if (kEventKindNames[i] == name) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

std::size_t DisfluencyEvent::inserted_tokens() const {
  return std::visit(
      [](const auto& e) -> std::size_t {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, event::Repetition>) {
          return e.length;
        } else if constexpr (std::is_same_v<T, event::Filler>) {
          return e.tokens.size();
        } else if constexpr (std::is_same_v<T, event::FalseStart>) {
          return 1;
        } else if constexpr (std::is_same_v<T, event::SilentPause>) {
          return e.count;
        } else {
          return e.reparandum.size() + e.editing.size();
        }
      },
      payload);
}

std::vector<DisfluencyEvent> extract_events(const ParallelPair& pair) {
  const auto& dis = pair.disfluent.tokens;
  const std::size_t n = pair.fluent.size();
  std::vector<DisfluencyEvent> out;
  std::size_t prev = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t next = i < n ? pair.alignment.map.at(i) : dis.size();
    if (next > prev) {
      const std::span<const Token> run(dis.data() + prev, next - prev);
      out.push_back({classify_run(run, pair.fluent, i), i});
    }
    prev = next + 1;
  }
  return out;
}

AnnotatedUtterance realize_events(std::span<const Token> fluent, std::span<const DisfluencyEvent> events) {
  struct OpenRepair {
    std::size_t fluent_end;
    std::size_t out_start;
    int level;
  };
  const std::size_t n = fluent.size();
  std::vector<Token> out;
  std::vector<DisfluencySpan> spans;
  std::vector<OpenRepair> open;
  std::size_t e = 0;

  auto add = [&](Token t) { out.push_back(std::move(t)); };
  auto span_over = [&](SpanKind kind, std::size_t from, int level) {
    spans.push_back({kind, from, out.size(), level});
  };

  for (std::size_t b = 0; b <= n; ++b) {
    while (!open.empty() && open.back().fluent_end == b) {
      spans.push_back({SpanKind::Repair, open.back().out_start, out.size(), open.back().level});
      open.pop_back();
    }
    if (e < events.size() && events[e].anchor < b) throw std::invalid_argument("events must have increasing anchors");
    if (e < events.size() && events[e].anchor == b) {
      const DisfluencyEvent& ev = events[e++];
      const int level = static_cast<int>(open.size());
      const std::size_t limit = open.empty() ? n : open.back().fluent_end;
      const std::size_t from = out.size();
      std::visit(
          [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, event::Repetition>) {
              if (p.length == 0 || b + p.length > limit) throw std::invalid_argument("repetition out of range");
              for (std::size_t k = 0; k < p.length; ++k) add(Token::word(fluent[b + k].text));
              span_over(SpanKind::Reparandum, from, level);
              open.push_back({b + p.length, out.size(), level});
            } else if constexpr (std::is_same_v<T, event::Filler>) {
              if (p.tokens.empty()) throw std::invalid_argument("empty filler event");
              for (const auto& f : p.tokens) {
                const std::size_t at = out.size();
                add(make_token(f, true));
                span_over(SpanKind::Filler, at, level);
              }
            } else if constexpr (std::is_same_v<T, event::FalseStart>) {
              if (!is_fragment_text(p.fragment)) throw std::invalid_argument("bad fragment " + p.fragment);
              add({p.fragment, TokenKind::FalseStartFragment});
              span_over(SpanKind::Reparandum, from, level);
            } else if constexpr (std::is_same_v<T, event::SilentPause>) {
              if (p.count == 0) throw std::invalid_argument("empty pause event");
              for (std::size_t k = 0; k < p.count; ++k) {
                const std::size_t at = out.size();
                add(make_token(std::string(kSilenceToken)));
                span_over(SpanKind::SilentPause, at, level);
              }
            } else {
              if (p.reparandum.empty()) throw std::invalid_argument("substitution without reparandum");
              for (const auto& t : p.reparandum) add(make_token(t));
              span_over(SpanKind::Reparandum, from, level);
              if (!p.editing.empty()) {
                const std::size_t at = out.size();
                for (const auto& t : p.editing) add(make_token(t));
                span_over(SpanKind::EditingTerm, at, level);
              }
              if (b < n) open.push_back({b + 1, out.size(), level});
            }
          },
          ev.payload);
    }
    if (b < n) out.push_back(fluent[b]);
  }
  if (e != events.size()) throw std::invalid_argument("event anchor beyond the utterance");
  try {
    return make_utterance(std::move(out), std::move(spans));
  } catch (const InvalidUtterance& err) {
    throw std::invalid_argument(std::string("events cannot be realized: ") + err.what());
  }
}

// ---------------------------------------------------------------------------
// Model

std::size_t boundary_context(std::span<const Token> fluent, std::size_t anchor) {
  const std::size_t n = fluent.size();
  PositionBucket bucket;
  if (anchor == 0) {
    bucket = PositionBucket::Start;
  } else if (3 * anchor < n) {
    bucket = PositionBucket::Early;
  } else if (3 * anchor < 2 * n) {
    bucket = PositionBucket::Mid;
  } else {
    bucket = PositionBucket::Late;
  }
  PrevClass prev = PrevClass::None;
  if (anchor > 0) {
    const Token& t = fluent[anchor - 1];
    if (t.text == kSilenceToken) {
      prev = PrevClass::Pause;
    } else if (filler_class(t)) {
      prev = PrevClass::Filler;
    } else {
      prev = PrevClass::Word;
    }
  }
  return static_cast<std::size_t>(bucket) * 4 + static_cast<std::size_t>(prev);
}

std::string context_name(std::size_t context) {
  return std::string(kBucketNames.at(context / 4)) + "/" + std::string(kPrevNames.at(context % 4));
}

InsertionModel train_model(std::span<const ParallelPair> pairs) {
  std::array<double, kContextCount> seen{};
  std::array<double, kContextCount> hits{};
  std::array<double, kEventKindCount> kinds{};
  std::array<double, kMaxRepetition> lengths{};
  std::map<std::string, double> fillers;
  std::size_t used = 0;
  std::size_t disfluent_tokens = 0;
  std::size_t total_tokens = 0;

  for (const auto& pair : pairs) {
    const std::size_t n = pair.fluent.size();
    if (n == 0) continue;
    ++used;
    disfluent_tokens += disfluent_token_count(pair.disfluent);
    total_tokens += pair.disfluent.size();
    for (std::size_t b = 0; b <= n; ++b) seen[boundary_context(pair.fluent, b)] += 1.0;
    for (const auto& ev : extract_events(pair)) {
      hits[boundary_context(pair.fluent, ev.anchor)] += 1.0;
      kinds[static_cast<std::size_t>(ev.kind())] += 1.0;
      if (const auto* rep = std::get_if<event::Repetition>(&ev.payload)) {
        lengths[std::min(rep->length, kMaxRepetition) - 1] += 1.0;
      } else if (const auto* fill = std::get_if<event::Filler>(&ev.payload)) {
        for (const auto& f : fill->tokens) fillers[f] += 1.0;
      }
    }
  }
  if (used == 0) throw ModelError(ModelError::Kind::EmptyTrainingSet, "no training pair has fluent tokens");

  InsertionModel m;
  for (std::size_t c = 0; c < kContextCount; ++c) m.boundary_prob[c] = (hits[c] + 1.0) / (seen[c] + 2.0);

  auto normalize = [](auto& counts) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total > 0.0) {
      for (auto& c : counts) c /= total;
    }
    return total > 0.0;
  };
  if (!normalize(kinds)) kinds.fill(1.0 / static_cast<double>(kEventKindCount));
  m.type_dist = kinds;
  if (!normalize(lengths)) lengths = {1.0, 0.0, 0.0};
  m.repetition_len_dist = lengths;

  auto to_dist = [](const std::map<std::string, double>& counts) {
    double total = 0.0;
    for (const auto& [_, c] : counts) total += c;
    std::map<std::string, double> dist;
    for (const auto& [token, c] : counts) dist[token] = c / total;
    return dist;
  };
  m.filler_lexicon = fillers.empty() ? std::map<std::string, double>{{"uh", 0.5}, {"um", 0.5}} : to_dist(fillers);
  m.trained_rate = static_cast<double>(disfluent_tokens) / static_cast<double>(total_tokens);
  validate(m);
  return m;
}

void validate(const InsertionModel& m) {
  auto bad = [](const std::string& what) { throw ModelError(ModelError::Kind::InvalidModel, what); };
  auto unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  for (double p : m.boundary_prob) {
    if (!unit(p)) bad("boundary probability outside [0, 1]");
  }
  auto check_dist = [&](const auto& values, const char* name) {
    double total = 0.0;
    for (double p : values) {
      if (!unit(p)) bad(std::string(name) + " has a probability outside [0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > kSumTolerance) bad(std::string(name) + " does not sum to 1");
  };
  check_dist(m.type_dist, "type_dist");
  check_dist(m.repetition_len_dist, "repetition_len_dist");
  std::vector<double> lex;
  for (const auto& [token, p] : m.filler_lexicon) {
    if (token.empty()) bad("empty filler token");
    lex.push_back(p);
  }
  check_dist(lex, "filler_lexicon");
  if (!unit(m.trained_rate)) bad("trained_rate outside [0, 1]");
}

nlohmann::json model_to_json(const InsertionModel& m) {
  nlohmann::json doc;
  doc["format"] = kModelFormat;
  doc["version"] = kModelVersion;
  for (std::size_t c = 0; c < kContextCount; ++c) doc["boundary_prob"][context_name(c)] = m.boundary_prob[c];
  for (EventKind k : kAllEventKinds) doc["type_dist"][std::string(to_string(k))] = m.type_prob(k);
  doc["filler_lexicon"] = m.filler_lexicon;
  for (std::size_t k = 1; k <= kMaxRepetition; ++k) {
    doc["repetition_len_dist"][std::to_string(k)] = m.repetition_len_dist[k - 1];
  }
  doc["trained_rate"] = m.trained_rate;
  return doc;
}

InsertionModel model_from_json(const nlohmann::json& doc) {
  auto bad = [](const std::string& what) { throw ModelError(ModelError::Kind::InvalidModel, "model: " + what); };
  if (!doc.is_object()) bad("not a JSON object");
  if (!doc.contains("version") || !doc["version"].is_number_integer()) bad("missing integer 'version'");
  if (doc["version"].get<int>() != kModelVersion) {
    throw ModelError(ModelError::Kind::VersionMismatch, "model version " + doc["version"].dump() +
                                                            " is not supported (expected " +
                                                            std::to_string(kModelVersion) + ")");
  }
  if (doc.value("format", std::string{}) != kModelFormat) bad("unexpected 'format'");

  auto number = [&](const nlohmann::json& obj, const std::string& key) {
    if (!obj.is_object() || !obj.contains(key) || !obj[key].is_number()) bad("missing number '" + key + "'");
    return obj[key].get<double>();
  };
  InsertionModel m;
  try {
    for (std::size_t c = 0; c < kContextCount; ++c) m.boundary_prob[c] = number(doc.at("boundary_prob"), context_name(c));
    for (EventKind k : kAllEventKinds) {
      m.type_dist[static_cast<std::size_t>(k)] = number(doc.at("type_dist"), std::string(to_string(k)));
    }
    for (const auto& [token, p] : doc.at("filler_lexicon").items()) {
      if (!p.is_number()) bad("filler_lexicon values must be numbers");
      m.filler_lexicon[token] = p.get<double>();
    }
    for (std::size_t k = 1; k <= kMaxRepetition; ++k) {
      m.repetition_len_dist[k - 1] = number(doc.at("repetition_len_dist"), std::to_string(k));
    }
    m.trained_rate = number(doc, "trained_rate");
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
  validate(m);
  return m;
}

std::string dump_model(const InsertionModel& model) { return model_to_json(model).dump(2) + "\n"; }

InsertionModel parse_model(std::string_view text) {
  const auto doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ModelError(ModelError::Kind::InvalidModel, "model: invalid JSON");
  return model_from_json(doc);
}

// ---------------------------------------------------------------------------
// Generation

double calibration_factor(const InsertionModel& model, std::span<const Token> fluent, const GenerationConfig& config) {
  check_config(config);
  if (fluent.empty()) throw GenerationError(GenerationError::Kind::EmptyInput, "empty fluent utterance");
  const double rho = config.target_rate;
  const double target_tokens = rho * static_cast<double>(fluent.size()) / (1.0 - rho);
  return solve_scale(boundaries(model, fluent, config), target_tokens, config.max_events_per_utterance);
}

std::vector<DisfluencyEvent> plan_events(const InsertionModel& model, std::span<const Token> fluent,
                                         const GenerationConfig& config, std::uint64_t ordinal) {
  check_config(config);
  if (fluent.empty()) throw GenerationError(GenerationError::Kind::EmptyInput, "empty fluent utterance");
  const std::size_t n = fluent.size();
  const auto bds = boundaries(model, fluent, config);
  const double rho = config.target_rate;
  const double scale =
      solve_scale(bds, rho * static_cast<double>(n) / (1.0 - rho), config.max_events_per_utterance);

  Rng rng(stream_seed(config.seed, ordinal));
  std::vector<DisfluencyEvent> events;
  std::vector<std::size_t> repair_ends;  // interior anchors of open repetitions
  for (std::size_t b = 0; b <= n; ++b) {
    while (!repair_ends.empty() && repair_ends.back() <= b) repair_ends.pop_back();
    // Draws are consumed at every boundary so raising the rate only adds events.
    const double u_fire = rng.uniform();
    const double u_kind = rng.uniform();
    const double u_detail = rng.uniform();

    const Boundary& bd = bds[b];
    if (events.size() >= config.max_events_per_utterance || bd.total_weight <= 0.0) continue;
    if (!(u_fire < std::min(1.0, scale * bd.prob))) continue;

    const std::size_t limit = repair_ends.empty() ? n : repair_ends.back();
    const std::size_t max_k = std::min(bd.max_repetition, limit - std::min(limit, b));
    auto weights = bd.weight;
    auto& rep_weight = weights[static_cast<std::size_t>(EventKind::Repetition)];
    if (rep_weight > 0.0 && expected_repetition(model, max_k) <= 0.0) rep_weight = 0.0;
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total <= 0.0) continue;

    switch (static_cast<EventKind>(pick(weights, total, u_kind))) {
      case EventKind::Repetition: {
        std::array<double, kMaxRepetition> w{};
        for (std::size_t k = 1; k <= max_k; ++k) w[k - 1] = model.repetition_len_dist[k - 1];
        const std::size_t k = pick(w, std::accumulate(w.begin(), w.end(), 0.0), u_detail) + 1;
        events.push_back({event::Repetition{k}, b});
        if (k > 1) repair_ends.push_back(b + k);
        break;
      }
      case EventKind::Filler:
        events.push_back({event::Filler{{pick_word(model.filler_lexicon, u_detail)}}, b});
        break;
      case EventKind::FalseStart:
        events.push_back({event::FalseStart{bd.fragment}, b});
        break;
      case EventKind::SilentPause:
        events.push_back({event::SilentPause{1}, b});
        break;
      case EventKind::Substitution:
        events.push_back({event::Substitution{{fluent[b].text}, {pick_word(model.filler_lexicon, u_detail)}}, b});
        break;
    }
  }
  return events;
}

AnnotatedUtterance insert(const InsertionModel& model, std::span<const Token> fluent, const GenerationConfig& config,
                          std::uint64_t ordinal) {
  const auto events = plan_events(model, fluent, config, ordinal);
  return realize_events(fluent, events);
}

std::vector<AnnotatedUtterance> insert_batch(const InsertionModel& model, std::span<const std::vector<Token>> fluent,
                                             const GenerationConfig& config, unsigned threads) {
  std::vector<AnnotatedUtterance> out(fluent.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, fluent.size()))));
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < fluent.size(); i += threads) out[i] = insert(model, fluent[i], config, i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace disfl
