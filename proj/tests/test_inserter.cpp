#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <set>

#include "disfluency/inserter.hpp"
#include "support.hpp"

namespace disfl {
namespace {

using testing::words;

ParallelPair pair_of(const std::string& markup) {
  const auto u = parse_annotated(markup);
  const std::vector<AnnotatedUtterance> one{u};
  auto set = build_pairs(one);
  return std::move(set.pairs.at(0));
}

ParallelPair plain_pair(const std::string& fluent, const std::string& disfluent) {
  ParallelPair p;
  p.fluent = tokenize_fluent(fluent);
  for (const auto& w : tokenize_fluent(disfluent)) p.disfluent.tokens.push_back(make_token(w.text));
  p.alignment = align_pair(p.fluent, p.disfluent.tokens);
  return p;
}

// --- extraction -------------------------------------------------------------

TEST(Extract, RepetitionThenFiller) {
  const auto events = extract_events(plain_pair("I like it", "I I um like it"));
  const std::vector<DisfluencyEvent> want = {{event::Repetition{1}, 0}, {event::Filler{{"um"}}, 1}};
  EXPECT_EQ(events, want);
}

TEST(Extract, FalseStart) {
  const auto events = extract_events(plain_pair("birthday party", "b- birthday party"));
  const std::vector<DisfluencyEvent> want = {{event::FalseStart{"b-"}, 0}};
  EXPECT_EQ(events, want);
}

TEST(Extract, Substitution) {
  // Rightmost alignment keeps the second "we"; "we need" is the run.
  const auto events = extract_events(plain_pair("we want", "we need we want"));
  const std::vector<DisfluencyEvent> want = {{event::Substitution{{"we", "need"}, {}}, 0}};
  EXPECT_EQ(events, want);
}

TEST(Extract, PriorityOrder) {
  // A repeated filler is a filler, not a repetition of a fluent token.
  EXPECT_EQ(extract_events(plain_pair("a b", "a uh uh b")).at(0).kind(), EventKind::Filler);
  EXPECT_EQ(extract_events(plain_pair("a b", "a <sil> <sil> b")).at(0),
            (DisfluencyEvent{event::SilentPause{2}, 1}));
  // Fragment that does not prefix the next word falls through to Substitution.
  EXPECT_EQ(extract_events(plain_pair("go home", "go x- home")).at(0).kind(), EventKind::Substitution);
  // Case-insensitive stem match, as in "Th- they".
  EXPECT_EQ(extract_events(plain_pair("they went", "Th- they went")).at(0), (DisfluencyEvent{event::FalseStart{"Th-"}, 0}));
  EXPECT_EQ(extract_events(plain_pair("a b c", "a b c b c")).size(), 1u);
  EXPECT_EQ(extract_events(plain_pair("a b c", "a b c b c")).at(0), (DisfluencyEvent{event::Repetition{2}, 1}));
  // Trailing filler material becomes the editing part of a substitution.
  EXPECT_EQ(extract_events(plain_pair("a b", "a x uh b")).at(0),
            (DisfluencyEvent{event::Substitution{{"x"}, {"uh"}}, 1}));
}

TEST(Extract, EndOfUtteranceAnchor) {
  const auto events = extract_events(plain_pair("a b", "a b uh"));
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].anchor, 2u);
  EXPECT_EQ(events[0].kind(), EventKind::Filler);
}

TEST(Extract, FromAnnotatedMarkup) {
  const auto events = extract_events(pair_of("{F uh} so [ we + {E I mean} we ] left"));
  const std::vector<DisfluencyEvent> want = {{event::Filler{{"uh"}}, 0},
                                             {event::Substitution{{"we", "I", "mean"}, {}}, 1}};
  EXPECT_EQ(events, want);
}

TEST(Realize, EventsBuildTheExpectedMarkup) {
  const auto fluent = tokenize_fluent("I like it");
  const std::vector<DisfluencyEvent> events = {{event::Repetition{1}, 0}, {event::Filler{{"um"}}, 1}};
  EXPECT_EQ(serialize(realize_events(fluent, events)), "[ I + I ] {F um} like it");

  const auto party = tokenize_fluent("birthday party");
  const std::vector<DisfluencyEvent> fs = {{event::FalseStart{"b-"}, 0}, {event::SilentPause{1}, 2}};
  EXPECT_EQ(serialize(realize_events(party, fs)), "b- birthday party <sil>");

  const std::vector<DisfluencyEvent> sub = {{event::Substitution{{"birthday"}, {"uh"}}, 0}};
  EXPECT_EQ(serialize(realize_events(party, sub)), "[ birthday + {E uh} birthday ] party");

  // Events inside a longer repetition's repair nest.
  const auto abc = tokenize_fluent("a b c");
  const std::vector<DisfluencyEvent> nested = {{event::Repetition{2}, 0}, {event::Filler{{"uh"}}, 1}};
  EXPECT_EQ(serialize(realize_events(abc, nested)), "[ a b + a {F uh} b ] c");
}

TEST(Realize, RejectsUnrealizableEvents) {
  const auto ab = tokenize_fluent("a b");
  EXPECT_THROW(realize_events(ab, std::vector<DisfluencyEvent>{{event::Repetition{3}, 0}}), std::invalid_argument);
  EXPECT_THROW(realize_events(ab, std::vector<DisfluencyEvent>{{event::FalseStart{"nope"}, 0}}),
               std::invalid_argument);
  EXPECT_THROW(realize_events(ab, std::vector<DisfluencyEvent>{{event::Filler{{"uh"}}, 3}}), std::invalid_argument);
  EXPECT_THROW(realize_events(ab, std::vector<DisfluencyEvent>{{event::Filler{{"uh"}}, 1}, {event::Filler{{"um"}}, 0}}),
               std::invalid_argument);
}

// --- training ---------------------------------------------------------------

TEST(Train, FillerOnlyCorpus) {
  std::vector<ParallelPair> pairs = {pair_of("{F um} a b"), pair_of("c {F um} d e")};
  const auto m = train_model(pairs);
  EXPECT_EQ(m.filler_lexicon, (std::map<std::string, double>{{"um", 1.0}}));
  EXPECT_DOUBLE_EQ(m.type_prob(EventKind::Filler), 1.0);
  for (EventKind k : kAllEventKinds) {
    if (k != EventKind::Filler) EXPECT_EQ(m.type_prob(k), 0.0);
  }
  EXPECT_DOUBLE_EQ(m.trained_rate, 2.0 / 7.0);
}

TEST(Train, EmptyTrainingSet) {
  try {
    train_model({});
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.kind(), ModelError::Kind::EmptyTrainingSet);
  }
}

TEST(Train, LaplaceSmoothedStartProbability) {
  // 20 utterances: one start boundary each, 4 of them with a start event.
  std::vector<ParallelPair> pairs;
  for (int i = 0; i < 20; ++i) {
    const bool start_event = i < 4;
    pairs.push_back(plain_pair("x y z", start_event ? "uh x y z" : "x y uh z"));
  }
  const auto m = train_model(pairs);
  const auto start_none = boundary_context(pairs[0].fluent, 0);
  EXPECT_EQ(context_name(start_none), "start/none");
  EXPECT_DOUBLE_EQ(m.boundary_prob[start_none], 5.0 / 22.0);
  // Contexts never observed fall back to 1/2.
  EXPECT_DOUBLE_EQ(m.boundary_prob[boundary_context(tokenize_fluent("a uh b c d e f"), 2)], 0.5);
}

TEST(Train, RepetitionLengthsAndFallbackLexicon) {
  std::vector<ParallelPair> pairs = {plain_pair("a b c", "a a b c"), plain_pair("a b c", "a b c a b c"),
                                     plain_pair("a b c", "a b b c"), plain_pair("a b c", "a a b c")};
  const auto m = train_model(pairs);
  EXPECT_DOUBLE_EQ(m.repetition_len_dist[0], 0.75);
  EXPECT_DOUBLE_EQ(m.repetition_len_dist[1], 0.0);
  EXPECT_DOUBLE_EQ(m.repetition_len_dist[2], 0.25);
  EXPECT_EQ(m.filler_lexicon, (std::map<std::string, double>{{"uh", 0.5}, {"um", 0.5}}));
}

TEST(Train, ContextBuckets) {
  const auto f = tokenize_fluent("a uh <sil> b c d");  // n = 6
  EXPECT_EQ(context_name(boundary_context(f, 0)), "start/none");
  EXPECT_EQ(context_name(boundary_context(f, 1)), "early/word");
  EXPECT_EQ(context_name(boundary_context(f, 2)), "mid/filler");
  EXPECT_EQ(context_name(boundary_context(f, 3)), "mid/pause");
  EXPECT_EQ(context_name(boundary_context(f, 4)), "late/word");
  EXPECT_EQ(context_name(boundary_context(f, 6)), "late/word");
}

InsertionModel toy_model() {
  InsertionModel m;
  m.boundary_prob.fill(0.2);
  m.type_dist = {0.3, 0.3, 0.1, 0.1, 0.2};
  m.filler_lexicon = {{"uh", 0.6}, {"um", 0.3}, {"you-know", 0.1}};
  m.repetition_len_dist = {0.7, 0.2, 0.1};
  m.trained_rate = 0.245;
  return m;
}

TEST(Model, JsonRoundTrip) {
  const auto m = toy_model();
  const auto back = parse_model(dump_model(m));
  EXPECT_EQ(back.boundary_prob, m.boundary_prob);
  EXPECT_EQ(back.type_dist, m.type_dist);
  EXPECT_EQ(back.filler_lexicon, m.filler_lexicon);
  EXPECT_EQ(back.repetition_len_dist, m.repetition_len_dist);
  EXPECT_EQ(back.trained_rate, m.trained_rate);
  const auto doc = nlohmann::json::parse(dump_model(m));
  EXPECT_EQ(doc["version"], kModelVersion);
  EXPECT_EQ(doc["format"], "disfluency-insertion-model");
}

TEST(Model, RefusesOtherVersions) {
  auto doc = model_to_json(toy_model());
  doc["version"] = kModelVersion + 1;
  try {
    model_from_json(doc);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.kind(), ModelError::Kind::VersionMismatch);
  }
}

TEST(Model, RejectsBrokenDistributions) {
  auto doc = model_to_json(toy_model());
  doc["type_dist"]["Filler"] = 0.9;
  EXPECT_THROW(model_from_json(doc), ModelError);
  doc = model_to_json(toy_model());
  doc["boundary_prob"].erase("mid/word");
  EXPECT_THROW(model_from_json(doc), ModelError);
  EXPECT_THROW(parse_model("{"), ModelError);
}

// --- generation -------------------------------------------------------------

TEST(Generate, ZeroRateIsIdentity) {
  const auto fluent = tokenize_fluent("we need a more innovative approach");
  GenerationConfig cfg;
  cfg.target_rate = 0.0;
  const auto u = insert(toy_model(), fluent, cfg);
  EXPECT_EQ(u.tokens, fluent);
  EXPECT_TRUE(u.spans.empty());
}

TEST(Generate, Deterministic) {
  const auto fluent = tokenize_fluent("we need a more innovative approach to this problem today");
  GenerationConfig cfg;
  cfg.seed = 42;
  cfg.target_rate = 0.3;
  EXPECT_EQ(serialize(insert(toy_model(), fluent, cfg, 5)), serialize(insert(toy_model(), fluent, cfg, 5)));
  // Different streams give different output somewhere.
  bool differs = false;
  for (std::uint64_t ord = 0; ord < 20 && !differs; ++ord) {
    differs = serialize(insert(toy_model(), fluent, cfg, ord)) != serialize(insert(toy_model(), fluent, cfg, ord + 1));
  }
  EXPECT_TRUE(differs);
}

TEST(Generate, RoundTripAndLexiconSupport) {
  Rng rng(11);
  const auto vocab = testing::synthetic_vocabulary();
  const auto model = toy_model();
  for (int i = 0; i < 300; ++i) {
    const auto fluent = testing::random_fluent(rng, vocab, 1, 30);
    GenerationConfig cfg;
    cfg.seed = rng.next();
    cfg.target_rate = 0.5 * rng.uniform();
    const auto u = insert(model, fluent, cfg, static_cast<std::uint64_t>(i));
    ASSERT_EQ(strip_disfluencies(u), fluent) << serialize(u);
    EXPECT_EQ(parse_annotated(serialize(u)), u);
    for (const auto& s : u.spans) {
      if (s.kind == SpanKind::Filler || s.kind == SpanKind::EditingTerm) {
        for (std::size_t t = s.start; t < s.end; ++t) EXPECT_TRUE(model.filler_lexicon.count(u.tokens[t].text));
      }
    }
  }
}

TEST(Generate, RaisingTheRateNeverRemovesEvents) {
  Rng rng(5);
  const auto vocab = testing::synthetic_vocabulary();
  for (int i = 0; i < 200; ++i) {
    const auto fluent = testing::random_fluent(rng, vocab, 3, 25);
    GenerationConfig cfg;
    cfg.seed = rng.next();
    std::size_t prev = 0;
    for (double r : {0.0, 0.05, 0.1, 0.2, 0.3, 0.45}) {
      cfg.target_rate = r;
      const auto n = plan_events(toy_model(), fluent, cfg).size();
      EXPECT_GE(n, prev) << "rate " << r;
      prev = n;
    }
  }
}

TEST(Generate, CalibrationHitsTheExpectedRate) {
  // With every boundary unsaturated, the expected inserted token count is
  // c * sum(p_b * e_b); check the achieved mean over many streams.
  const auto model = toy_model();
  const auto fluent = tokenize_fluent("a b c d e f g h i j k l m n o p q r s t");
  GenerationConfig cfg;
  cfg.target_rate = 0.2;
  double inserted = 0.0;
  const int runs = 4000;
  for (int i = 0; i < runs; ++i) {
    inserted += static_cast<double>(insert(model, fluent, cfg, static_cast<std::uint64_t>(i)).size() - fluent.size());
  }
  const double want = 0.2 * 20.0 / 0.8;
  EXPECT_NEAR(inserted / runs, want, 0.05 * want);
}

TEST(Generate, KindsCanBeRestricted) {
  const auto fluent = tokenize_fluent("alpha beta gamma delta epsilon zeta eta theta");
  GenerationConfig cfg;
  cfg.target_rate = 0.4;
  cfg.allow_kinds = {false, true, false, false, false};
  for (std::uint64_t ord = 0; ord < 50; ++ord) {
    for (const auto& ev : plan_events(toy_model(), fluent, cfg, ord)) EXPECT_EQ(ev.kind(), EventKind::Filler);
  }
}

TEST(Generate, Errors) {
  const auto fluent = tokenize_fluent("a b c d e f g h i j");
  GenerationConfig cfg;
  cfg.target_rate = 0.9;
  cfg.max_events_per_utterance = 1;
  try {
    insert(toy_model(), fluent, cfg);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationError::Kind::RateUnreachable);
  }
  cfg.target_rate = 0.95;
  EXPECT_THROW(insert(toy_model(), fluent, cfg), GenerationError);
  cfg.target_rate = 0.1;
  try {
    insert(toy_model(), {}, cfg);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationError::Kind::EmptyInput);
  }
}

TEST(Generate, BatchIsIndependentOfThreadCount) {
  Rng rng(99);
  const auto vocab = testing::synthetic_vocabulary();
  std::vector<std::vector<Token>> fluent;
  for (int i = 0; i < 64; ++i) fluent.push_back(testing::random_fluent(rng, vocab, 4, 20));
  GenerationConfig cfg;
  cfg.seed = 2024;
  cfg.target_rate = 0.25;
  const auto one = insert_batch(toy_model(), fluent, cfg, 1);
  EXPECT_EQ(insert_batch(toy_model(), fluent, cfg, 4), one);
  EXPECT_EQ(insert_batch(toy_model(), fluent, cfg, 7), one);
  for (std::size_t i = 0; i < fluent.size(); ++i) EXPECT_EQ(one[i], insert(toy_model(), fluent[i], cfg, i));
}

TEST(Generate, TrainedModelGeneratesFromItsOwnCorpus) {
  std::vector<AnnotatedUtterance> corpus;
  for (const char* l : {"{F uh} I think [ we + we ] need it", "b- birthday party <sil> today",
                        "[ the + {E uh} the ] cat sat", "I- I think we need a a more innova- innovative approach"}) {
    corpus.push_back(parse_annotated(l));
  }
  const auto model = train_model(build_pairs(corpus).pairs);
  EXPECT_NO_THROW(validate(model));
  GenerationConfig cfg;
  cfg.target_rate = model.trained_rate;
  const auto fluent = tokenize_fluent("so we should plan the birthday party together");
  EXPECT_EQ(strip_disfluencies(insert(model, fluent, cfg)), fluent);
}

}  // namespace
}  // namespace disfl
