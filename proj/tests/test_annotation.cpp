#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "disfluency/annotation.hpp"
#include "support.hpp"

namespace disfl {
namespace {

using testing::fixture;
using testing::slurp;
using testing::words;

std::vector<std::string> tag_strings(const std::vector<BioTag>& tags) {
  std::vector<std::string> out;
  for (const auto& t : tags) out.push_back(t.str());
  return out;
}

std::vector<BioTag> tags_from(const std::vector<std::string>& strs) {
  std::vector<BioTag> out;
  for (const auto& s : strs) out.push_back(*BioTag::parse(s));
  return out;
}

ParseError::Kind parse_error_kind(const std::string& name) {
  if (name == "UnbalancedBracket") return ParseError::Kind::UnbalancedBracket;
  if (name == "MissingInterruptionPoint") return ParseError::Kind::MissingInterruptionPoint;
  if (name == "EmptyBrace") return ParseError::Kind::EmptyBrace;
  if (name == "StrayInterruptionPoint") return ParseError::Kind::StrayInterruptionPoint;
  return ParseError::Kind::UnknownBrace;
}

// One golden fixture; prints as its name so test names stay short.
struct GoldenCase : nlohmann::json {
  friend void PrintTo(const GoldenCase& c, std::ostream* os) { *os << c["name"].get<std::string>(); }
};

class Golden : public ::testing::TestWithParam<GoldenCase> {};

TEST_P(Golden, ParsesToHandDerivedStructure) {
  const auto& c = GetParam();
  const auto u = parse_annotated(c["markup"].get<std::string>());
  EXPECT_EQ(words(u.tokens), c["tokens"].get<std::vector<std::string>>());
  std::vector<std::string> kinds;
  for (const auto& t : u.tokens) kinds.emplace_back(to_string(t.kind));
  EXPECT_EQ(kinds, c["kinds"].get<std::vector<std::string>>());
  ASSERT_EQ(u.spans.size(), c["spans"].size());
  for (std::size_t i = 0; i < u.spans.size(); ++i) {
    const auto& e = c["spans"][i];
    EXPECT_EQ(to_string(u.spans[i].kind), e[0].get<std::string>()) << "span " << i;
    EXPECT_EQ(u.spans[i].start, e[1].get<std::size_t>()) << "span " << i;
    EXPECT_EQ(u.spans[i].end, e[2].get<std::size_t>()) << "span " << i;
    EXPECT_EQ(u.spans[i].depth, e[3].get<int>()) << "span " << i;
  }
}

TEST_P(Golden, SerializesBackToTheSameMarkup) {
  const auto markup = GetParam()["markup"].get<std::string>();
  const auto u = parse_annotated(markup);
  EXPECT_EQ(serialize(u), markup);
  EXPECT_EQ(parse_annotated(serialize(u)), u);
}

TEST_P(Golden, BioTagsAndRoundTrip) {
  const auto& c = GetParam();
  const auto u = parse_annotated(c["markup"].get<std::string>());
  const auto tags = to_bio(u);
  EXPECT_EQ(tag_strings(tags), c["bio"].get<std::vector<std::string>>());

  const auto back = from_bio(u.tokens, tags);
  EXPECT_EQ(back, flatten(u));
  EXPECT_EQ(to_bio(back), tags);
  EXPECT_EQ(strip_disfluencies(back), strip_disfluencies(u));
  if (c["flat"].get<bool>()) EXPECT_EQ(back, u);
}

TEST_P(Golden, StripAndRate) {
  const auto& c = GetParam();
  const auto u = parse_annotated(c["markup"].get<std::string>());
  EXPECT_EQ(words(strip_disfluencies(u)), c["stripped"].get<std::vector<std::string>>());
  const double expected = c["rate"][0].get<double>() / c["rate"][1].get<double>();
  EXPECT_DOUBLE_EQ(disfluency_rate(u), expected);
}

std::vector<GoldenCase> golden_cases() {
  const auto doc = nlohmann::json::parse(slurp(fixture("grammar/golden.json")));
  std::vector<GoldenCase> cases;
  for (const auto& c : doc["cases"]) cases.push_back(GoldenCase{c});
  return cases;
}

INSTANTIATE_TEST_SUITE_P(Grammar, Golden, ::testing::ValuesIn(golden_cases()),
                         [](const ::testing::TestParamInfo<GoldenCase>& info) {
                           std::string name = info.param["name"].get<std::string>();
                           for (char& ch : name) {
                             if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                           }
                           return name;
                         });

TEST(ParseErrors, GoldenKindsAndOffsets) {
  const auto doc = nlohmann::json::parse(slurp(fixture("grammar/golden.json")));
  for (const auto& e : doc["errors"]) {
    const auto markup = e["markup"].get<std::string>();
    try {
      parse_annotated(markup);
      ADD_FAILURE() << "no error for " << markup;
    } catch (const ParseError& err) {
      EXPECT_EQ(err.kind(), parse_error_kind(e["kind"].get<std::string>())) << markup;
      EXPECT_EQ(err.offset(), e["offset"].get<std::size_t>()) << markup;
    }
  }
}

TEST(ParseErrors, AreDataErrors) { EXPECT_THROW(parse_annotated("[ a b ]"), DataError); }

// --- spec examples ---------------------------------------------------------

TEST(Parse, FillerExample) {
  const auto u = parse_annotated("{F uh} I like it");
  EXPECT_EQ(words(u.tokens), (std::vector<std::string>{"uh", "I", "like", "it"}));
  ASSERT_EQ(u.spans.size(), 1u);
  EXPECT_EQ(u.spans[0], (DisfluencySpan{SpanKind::Filler, 0, 1, 0}));
}

TEST(Parse, RepairWithInterregnumExample) {
  const auto u = parse_annotated("[ I + {F uh} I ] like it");
  const std::vector<DisfluencySpan> expected = {
      {SpanKind::Reparandum, 0, 1, 0}, {SpanKind::Filler, 1, 2, 0}, {SpanKind::Repair, 2, 3, 0}};
  EXPECT_EQ(u.spans, expected);
}

TEST(Parse, FluentExample) {
  const auto u = parse_annotated("I like it");
  EXPECT_EQ(u.size(), 3u);
  EXPECT_TRUE(u.spans.empty());
}

TEST(Parse, WhitespaceIsNormalized) {
  EXPECT_EQ(parse_annotated("  I   like\tit "), parse_annotated("I like it"));
}

TEST(Parse, BareFillerWordStaysAWord) {
  const auto u = parse_annotated("I um like it");
  EXPECT_EQ(u.tokens[1].kind, TokenKind::Word);
  EXPECT_TRUE(u.spans.empty());
}

TEST(Parse, FragmentInsideRemovableRegionIsNotRewrapped) {
  const auto u = parse_annotated("[ b- + ] birthday");
  ASSERT_EQ(u.spans.size(), 1u);
  EXPECT_EQ(u.tokens[0].kind, TokenKind::FalseStartFragment);
  EXPECT_EQ(serialize(u), "b- birthday");
}

TEST(Bio, SpecExamples) {
  EXPECT_EQ(tag_strings(to_bio(parse_annotated("{F uh} I like it"))),
            (std::vector<std::string>{"B-FL", "O", "O", "O"}));
  EXPECT_EQ(tag_strings(to_bio(parse_annotated("I like it"))), (std::vector<std::string>{"O", "O", "O"}));
  EXPECT_EQ(tag_strings(to_bio(parse_annotated("[ I + I ] go"))), (std::vector<std::string>{"B-RM", "B-RP", "O"}));
}

TEST(Bio, FromBioSpecExamples) {
  const auto filler = from_bio({make_token("uh", true), Token::word("I")}, tags_from({"B-FL", "O"}));
  EXPECT_EQ(filler.spans, (std::vector<DisfluencySpan>{{SpanKind::Filler, 0, 1, 0}}));

  const auto none = from_bio({Token::word("I"), Token::word("go")}, tags_from({"O", "O"}));
  EXPECT_TRUE(none.spans.empty());

  const auto rep =
      from_bio({Token::word("I"), Token::word("I"), Token::word("go")}, tags_from({"B-RM", "B-RP", "O"}));
  EXPECT_EQ(rep.spans, (std::vector<DisfluencySpan>{{SpanKind::Reparandum, 0, 1, 0}, {SpanKind::Repair, 1, 2, 0}}));
}

TEST(Bio, Errors) {
  try {
    from_bio({Token::word("a")}, tags_from({"O", "O"}));
    ADD_FAILURE();
  } catch (const BioError& e) {
    EXPECT_EQ(e.kind(), BioError::Kind::LengthMismatch);
  }
  for (const auto& bad : std::vector<std::vector<std::string>>{{"O", "I-RM"}, {"B-RM", "I-FL"}, {"I-SP", "O"}}) {
    try {
      from_bio({Token::word("a"), Token::word("b")}, tags_from(bad));
      ADD_FAILURE() << bad[0] << " " << bad[1];
    } catch (const BioError& e) {
      EXPECT_EQ(e.kind(), BioError::Kind::IllFormedTagSequence);
    }
  }
}

TEST(Bio, UnpairedRepairTagIsDropped) {
  const auto u = from_bio({Token::word("a"), Token::word("b")}, tags_from({"O", "B-RP"}));
  EXPECT_TRUE(u.spans.empty());
}

TEST(Bio, TagParsing) {
  EXPECT_EQ(BioTag::parse("B-RM"), BioTag::begin(BioLabel::RM));
  EXPECT_EQ(BioTag::parse("I-SP"), BioTag::inside(BioLabel::SP));
  EXPECT_EQ(BioTag::parse("O"), BioTag::outside());
  EXPECT_FALSE(BioTag::parse("B-XX"));
  EXPECT_FALSE(BioTag::parse("b-RM"));
  EXPECT_FALSE(BioTag::parse(""));
}

TEST(Strip, SpecExamples) {
  EXPECT_EQ(words(strip_disfluencies(parse_annotated("[ I + {F uh} I ] like it"))),
            (std::vector<std::string>{"I", "like", "it"}));
  EXPECT_EQ(words(strip_disfluencies(parse_annotated("b- birthday <sil> party"))),
            (std::vector<std::string>{"birthday", "party"}));
  const auto fluent = parse_annotated("we go home");
  EXPECT_EQ(strip_disfluencies(fluent), fluent.tokens);
}

TEST(Rate, SpecExamples) {
  EXPECT_DOUBLE_EQ(disfluency_rate(parse_annotated("{F uh} I like it")), 0.25);
  EXPECT_DOUBLE_EQ(disfluency_rate(parse_annotated("we go home")), 0.0);
  EXPECT_THROW(disfluency_rate(AnnotatedUtterance{}), EmptyUtterance);
}

TEST(Tokens, FragmentAndFillerPredicates) {
  EXPECT_TRUE(is_fragment_text("b-"));
  EXPECT_TRUE(is_fragment_text("Th-"));
  EXPECT_FALSE(is_fragment_text("-"));
  EXPECT_FALSE(is_fragment_text("a--"));
  EXPECT_FALSE(is_fragment_text("co-op"));
  EXPECT_TRUE(is_filler_word("um"));
  EXPECT_TRUE(is_filler_word("Uh"));
  EXPECT_FALSE(is_filler_word("umbrella"));
  EXPECT_EQ(make_token("<sil>").kind, TokenKind::SilentPause);
  EXPECT_EQ(make_token("uh", true).kind, TokenKind::FilledPause);
  EXPECT_EQ(make_token("uh").kind, TokenKind::Word);
}

TEST(Validate, RejectsBrokenUtterances) {
  const std::vector<Token> abc = {Token::word("a"), Token::word("b"), Token::word("c")};
  // Overlapping, non-nested spans.
  EXPECT_THROW(make_utterance(abc, {{SpanKind::Filler, 0, 2, 0}, {SpanKind::Reparandum, 1, 3, 0}}),
               InvalidUtterance);
  // Repair with no reparandum.
  EXPECT_THROW(make_utterance(abc, {{SpanKind::Repair, 1, 2, 0}}), InvalidUtterance);
  // Out of range.
  EXPECT_THROW(make_utterance(abc, {{SpanKind::Filler, 2, 4, 0}}), InvalidUtterance);
  // Filled pause outside a filler span.
  EXPECT_THROW(make_utterance({make_token("uh", true)}, {}), InvalidUtterance);
  // Pause token outside a pause span.
  EXPECT_THROW(make_utterance({make_token("<sil>")}, {}), InvalidUtterance);
  // Fragment outside any removable span.
  EXPECT_THROW(make_utterance({make_token("b-"), Token::word("b")}, {}), InvalidUtterance);
  // Tokens carrying whitespace or markup.
  EXPECT_THROW(make_utterance({Token::word("a b")}, {}), InvalidUtterance);
  EXPECT_THROW(make_utterance({Token::word("[x")}, {}), InvalidUtterance);
  EXPECT_THROW(make_utterance({Token::word("+")}, {}), InvalidUtterance);
}

TEST(Validate, MakeUtteranceOrdersSpansAndComputesDepth) {
  const std::vector<Token> t = {Token::word("the"), make_token("uh", true), Token::word("the"), Token::word("cat")};
  const auto u = make_utterance(t, {{SpanKind::Repair, 2, 3, 7}, {SpanKind::Filler, 1, 2, 7},
                                    {SpanKind::Reparandum, 0, 2, 7}});
  EXPECT_EQ(u, parse_annotated("[ the {F uh} + the ] cat"));
}

TEST(JoinTokens, SingleSpaces) {
  EXPECT_EQ(join_tokens(tokenize_fluent(" a  b\tc ")), "a b c");
  EXPECT_TRUE(tokenize_fluent("   ").empty());
}

// --- randomized properties -------------------------------------------------

class MarkupGen {
 public:
  explicit MarkupGen(std::uint64_t seed) : rng_(seed) {}

  std::string utterance() {
    std::string out = sequence(0, 1 + rng_.below(6));
    return out;
  }

 private:
  std::string word() {
    static const char* const kWords[] = {"I", "we", "go", "the", "cat", "like", "it", "um", "so", "home"};
    return kWords[rng_.below(10)];
  }

  std::string element(int depth) {
    switch (rng_.below(depth < 3 ? 8 : 6)) {
      case 0:
      case 1:
        return word();
      case 2:
        return "{F " + std::string(rng_.below(2) ? "uh" : "um") + "}";
      case 3:
        return rng_.below(2) ? "{E I mean}" : "{D well}";
      case 4:
        return "<sil>";
      case 5:
        return word() + "-";
      default: {
        std::string out = "[ " + sequence(depth + 1, 1 + rng_.below(3)) + " +";
        if (rng_.below(3) == 0) out += " {F uh}";
        if (rng_.below(4) != 0) out += " " + sequence(depth + 1, 1 + rng_.below(3));
        return out + " ]";
      }
    }
  }

  std::string sequence(int depth, std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (!out.empty()) out += ' ';
      out += element(depth);
    }
    return out;
  }

  Rng rng_;
};

TEST(Properties, SerializeRoundTripAndCanonicalForm) {
  MarkupGen gen(20240611);
  for (int i = 0; i < 2000; ++i) {
    const std::string markup = gen.utterance();
    AnnotatedUtterance u;
    ASSERT_NO_THROW(u = parse_annotated(markup)) << markup;
    const std::string s = serialize(u);
    ASSERT_EQ(parse_annotated(s), u) << markup << "  =>  " << s;
    ASSERT_EQ(serialize(parse_annotated(s)), s);
  }
}

TEST(Properties, StripAndRateInvariants) {
  MarkupGen gen(99);
  for (int i = 0; i < 2000; ++i) {
    const auto u = parse_annotated(gen.utterance());
    const auto fluent = strip_disfluencies(u);
    for (const auto& t : fluent) {
      ASSERT_EQ(t.kind, TokenKind::Word) << serialize(u);
    }
    // Stripping a fluent utterance is the identity.
    const auto again = make_utterance(fluent, {});
    EXPECT_EQ(strip_disfluencies(again), fluent);
    const bool any_removable =
        std::any_of(u.spans.begin(), u.spans.end(), [](const DisfluencySpan& s) { return is_removable(s.kind); });
    EXPECT_EQ(disfluency_rate(u) == 0.0, !any_removable) << serialize(u);
    EXPECT_EQ(disfluent_token_count(u) + fluent.size(), u.size());
  }
}

TEST(Properties, BioRoundTripOnFlattenedForm) {
  MarkupGen gen(7);
  int flat = 0;
  for (int i = 0; i < 4000; ++i) {
    const auto u = parse_annotated(gen.utterance());
    const auto tags = to_bio(u);
    const bool depth0 = std::all_of(u.spans.begin(), u.spans.end(), [](const DisfluencySpan& s) { return s.depth == 0; });
    if (!depth0) {
      // Nesting is not representable in BIO: decoding may fail, but when it
      // succeeds it must be a fixed point.
      try {
        const auto back = from_bio(u.tokens, tags);
        EXPECT_EQ(from_bio(back.tokens, to_bio(back)), back) << serialize(u);
      } catch (const BioError&) {
      }
      continue;
    }
    ++flat;
    const auto back = from_bio(u.tokens, tags);
    ASSERT_EQ(back, flatten(u)) << serialize(u);
    EXPECT_EQ(strip_disfluencies(back), strip_disfluencies(u)) << serialize(u);
  }
  EXPECT_GT(flat, 200);
}

}  // namespace
}  // namespace disfl
