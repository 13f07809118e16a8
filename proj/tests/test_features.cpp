#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pbmt/common.hpp"
#include "pbmt/features.hpp"

using namespace pbmt;

namespace {

WeightVector parse_text(const std::string& text) {
  std::istringstream in(text);
  return WeightVector::parse(in, "test");
}

const std::string kFullWeights =
    "Distortion0= 0.3\n"
    "LM0= 0.5\n"
    "PhrasePenalty0= -0.2\n"
    "TranslationModel0= 0.2 0.2 0.3 0.3\n"
    "UnknownWordPenalty0= 1\n"
    "WordPenalty0= -0.1\n"
    "LexicalReordering0= 0.1 0.2 0.3 0.4 0.5 0.6\n";

}  // namespace

TEST_CASE("weight file parses into fixed slots") {
  WeightVector w = parse_text(kFullWeights);
  CHECK(w[kFeatDistortion] == 0.3);
  CHECK(w[kFeatLm] == 0.5);
  CHECK(w[kFeatPhrasePenalty] == -0.2);
  CHECK(w[kFeatWordPenalty] == -0.1);
  CHECK(w[kFeatUnknownPenalty] == 1.0);
  CHECK(w[kFeatTmBase + 0] == 0.2);
  CHECK(w[kFeatTmBase + 3] == 0.3);
  CHECK(w[kFeatLexroBase + 0] == 0.1);
  CHECK(w[kFeatLexroBase + 5] == 0.6);
}

TEST_CASE("weight file accepts comments and blank lines in any order") {
  WeightVector a = parse_text(kFullWeights);
  WeightVector b = parse_text(
      "# comment\n\nLexicalReordering0= 0.1 0.2 0.3 0.4 0.5 0.6\n"
      "WordPenalty0= -0.1\nUnknownWordPenalty0= 1\n"
      "TranslationModel0= 0.2 0.2 0.3 0.3\nPhrasePenalty0= -0.2\n"
      "LM0= 0.5\nDistortion0= 0.3\n");
  CHECK(a.values == b.values);
}

TEST_CASE("weight file rejects bad input") {
  CHECK_THROWS_AS(parse_text("Bogus0= 1\n" + kFullWeights), Error);
  CHECK_THROWS_AS(parse_text("Distortion0= 1 2\n"), Error);  // wrong arity
  CHECK_THROWS_AS(parse_text("TranslationModel0= 1 2 3\n"), Error);
  CHECK_THROWS_AS(parse_text(kFullWeights + "LM0= 0.4\n"), Error);  // duplicate
  CHECK_THROWS_AS(parse_text("LM0= 0.5\n"), Error);  // missing groups
  CHECK_THROWS_AS(parse_text("LM0 0.5\n" + kFullWeights), Error);  // no '='
  CHECK_THROWS_AS(parse_text("LM0= zebra\n" + kFullWeights), Error);
}

TEST_CASE("total score is the dot product in slot order") {
  WeightVector w = parse_text(kFullWeights);
  FeatureVector f{};
  f[kFeatDistortion] = -2;
  f[kFeatLm] = -10;
  f[kFeatTmBase + 1] = -1.5;
  f[kFeatLexroBase + 4] = -0.25;
  double expect = 0.3 * -2 + 0.5 * -10 + 0.2 * -1.5 + 0.5 * -0.25;
  CHECK(total_score(f, w) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("distortion penalty is the negative jump distance") {
  CHECK(distortion_penalty(-1, 0) == 0);   // sentence start, monotone
  CHECK(distortion_penalty(2, 3) == 0);    // adjacent continuation
  CHECK(distortion_penalty(2, 5) == -2);   // forward jump
  CHECK(distortion_penalty(4, 0) == -5);   // backward jump past the phrase
  CHECK(distortion_penalty(-1, 3) == -3);  // skip from the start
}

TEST_CASE("orientation classification is total and matches the three cases") {
  // cur directly after prev: monotone
  CHECK(classify_orientation({0, 2}, {2, 4}) == Orientation::kMonotone);
  // cur directly before prev: swap
  CHECK(classify_orientation({2, 4}, {0, 2}) == Orientation::kSwap);
  // anything with a gap either way: discontinuous
  CHECK(classify_orientation({0, 2}, {3, 5}) == Orientation::kDiscontinuous);
  CHECK(classify_orientation({3, 5}, {0, 2}) == Orientation::kDiscontinuous);

  // Exhaustive over all ordered pairs of disjoint spans in 8 positions:
  // exactly one case fires and mirrors the span arithmetic.
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b <= 8; ++b)
      for (int c = 0; c < 8; ++c)
        for (int d = c + 1; d <= 8; ++d) {
          if (!(b <= c || d <= a)) continue;  // overlapping pairs never occur
          SpanRange prev{std::uint32_t(a), std::uint32_t(b)};
          SpanRange cur{std::uint32_t(c), std::uint32_t(d)};
          Orientation o = classify_orientation(prev, cur);
          if (cur.start == prev.end)
            CHECK(o == Orientation::kMonotone);
          else if (cur.end == prev.start)
            CHECK(o == Orientation::kSwap);
          else
            CHECK(o == Orientation::kDiscontinuous);
        }
}

TEST_CASE("lexro score picks direction-major cells") {
  TranslationRule rule;
  for (int i = 0; i < 6; ++i) rule.lexro_scores[i] = float(i) * -1.0f;
  CHECK(lexro_score(rule, LexroDirection::kPrevious, Orientation::kMonotone) ==
        -0.0f);
  CHECK(lexro_score(rule, LexroDirection::kPrevious, Orientation::kSwap) ==
        -1.0f);
  CHECK(lexro_score(rule, LexroDirection::kPrevious,
                    Orientation::kDiscontinuous) == -2.0f);
  CHECK(lexro_score(rule, LexroDirection::kNext, Orientation::kMonotone) ==
        -3.0f);
  CHECK(lexro_score(rule, LexroDirection::kNext, Orientation::kSwap) == -4.0f);
  CHECK(lexro_score(rule, LexroDirection::kNext, Orientation::kDiscontinuous) ==
        -5.0f);
}

TEST_CASE("penalties count phrases and words as positive counts") {
  TranslationRule rule;
  rule.target = {1, 2, 3};
  Penalties p = penalties(rule);
  CHECK(p.phrase == 1);
  CHECK(p.word == 3);
  CHECK(p.unknown == 0);

  TranslationRule oov = make_passthrough_rule();
  Penalties q = penalties(oov);
  CHECK(q.phrase == 1);
  CHECK(q.word == 1);  // the copied token counts as one output word
  CHECK(q.unknown == 1);
}

TEST_CASE("passthrough rule carries floor and uniform scores") {
  TranslationRule oov = make_passthrough_rule();
  REQUIRE(oov.target.size() == 1);
  CHECK(oov.target[0] == kInvalidWordId);
  CHECK(oov.passthrough);
  for (float s : oov.tm_scores) CHECK(s == log_prob_f32(kTmFloorProb));
  for (float s : oov.lexro_scores) CHECK(s == log_prob_f32(1.0 / 3.0));
}

TEST_CASE("probability quantizer is plain float of natural log") {
  CHECK(log_prob_f32(1.0) == 0.0f);
  CHECK(log_prob_f32(0.5) == static_cast<float>(std::log(0.5)));
  CHECK(log_prob_f32(kTmFloorProb) ==
        static_cast<float>(std::log(kTmFloorProb)));
  std::array<float, kLexroScoreCount> u = uniform_lexro();
  for (float s : u) CHECK(s == log_prob_f32(1.0 / 3.0));
}
