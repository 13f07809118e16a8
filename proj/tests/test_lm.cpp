#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pbmt/common.hpp"
#include "pbmt/lm.hpp"

using namespace pbmt;

namespace {

NGramModel parse(const std::string& text) {
  std::istringstream in(text);
  return NGramModel::parse_arpa(in, "test");
}

// Reference scorer: a literal transcription of the back-off recursion over
// maps, independent of the model's storage and state machinery.
//   p(w | ctx) = prob(ctx+w)                      if stored
//              = backoff(ctx) + p(w | ctx[1:])    otherwise
struct PlainModel {
  std::size_t order = 1;
  std::map<std::vector<std::string>, std::pair<double, double>> grams;

  double prob(std::vector<std::string> context, const std::string& word) const {
    if (context.size() > order - 1)
      context.erase(context.begin(),
                    context.end() - static_cast<long>(order - 1));
    double charged = 0;
    while (true) {
      std::vector<std::string> key = context;
      key.push_back(word);
      auto hit = grams.find(key);
      if (hit != grams.end()) return charged + hit->second.first;
      if (context.empty()) return charged + grams.at({"<unk>"}).first;
      auto bo = grams.find(context);
      if (bo != grams.end()) charged += bo->second.second;
      context.erase(context.begin());
    }
  }

  double sentence(const std::vector<std::string>& words) const {
    std::vector<std::string> context{"<s>"};
    double total = 0;
    for (const auto& w : words) {
      total += prob(context, w);
      context.push_back(w);
    }
    total += prob(context, "</s>");
    return total;
  }
};

double model_sentence(const NGramModel& lm,
                      const std::vector<std::string>& words) {
  LMState state = lm.begin_state();
  double total = 0;
  for (const auto& w : words) {
    auto [p, next] = lm.score_word(state, lm.word_id(w));
    total += p;
    state = next;
  }
  auto [p, next] = lm.score_word(state, lm.end_id());
  (void)next;
  return total + p;
}

const std::string kUnigram =
    "\\data\\\n"
    "ngram 1=5\n"
    "\n"
    "\\1-grams:\n"
    "-0.9\t<s>\n"
    "-0.8\t</s>\n"
    "-1.5\t<unk>\n"
    "-0.5\ta\n"
    "-0.7\tb\n"
    "\n"
    "\\end\\\n";

const std::string kBigram =
    "\\data\\\n"
    "ngram 1=5\n"
    "ngram 2=4\n"
    "\n"
    "\\1-grams:\n"
    "-99\t<s>\t-0.30103\n"
    "-1.2\t</s>\n"
    "-1.6\t<unk>\n"
    "-0.6\ta\t-0.2\n"
    "-0.9\tb\t-0.15\n"
    "\n"
    "\\2-grams:\n"
    "-0.25\t<s> a\n"
    "-0.4\ta b\n"
    "-0.5\tb </s>\n"
    "-0.35\ta a\n"
    "\n"
    "\\end\\\n";

const std::string kTrigram =
    "\\data\\\n"
    "ngram 1=5\n"
    "ngram 2=5\n"
    "ngram 3=3\n"
    "\n"
    "\\1-grams:\n"
    "-99\t<s>\t-0.4\n"
    "-1.1\t</s>\n"
    "-1.7\t<unk>\n"
    "-0.55\ta\t-0.25\n"
    "-0.85\tb\t-0.2\n"
    "\n"
    "\\2-grams:\n"
    "-0.2\t<s> a\t-0.1\n"
    "-0.45\ta b\t-0.12\n"
    "-0.4\tb a\t-0.08\n"
    "-0.6\tb </s>\n"
    "-0.3\ta a\t-0.05\n"
    "\n"
    "\\3-grams:\n"
    "-0.15\t<s> a b\n"
    "-0.35\ta b a\n"
    "-0.5\tb a a\n"
    "\n"
    "\\end\\\n";

}  // namespace

TEST_CASE("unigram model scores words independently") {
  NGramModel lm = parse(kUnigram);
  CHECK(lm.order() == 1);
  CHECK(lm.vocab_size() == 5);
  // a b: -0.5 + -0.7 + -0.8 (</s>)
  CHECK(model_sentence(lm, {"a", "b"}) == doctest::Approx(-2.0).epsilon(1e-12));
  // unseen word costs the <unk> unigram
  CHECK(model_sentence(lm, {"zzz"}) ==
        doctest::Approx(-1.5 - 0.8).epsilon(1e-12));
}

TEST_CASE("bigram model charges backoff for unseen pairs") {
  NGramModel lm = parse(kBigram);
  CHECK(lm.order() == 2);
  // "a b": p(a|<s>)=-0.25 stored; p(b|a)=-0.4 stored; p(</s>|b)=-0.5 stored.
  CHECK(model_sentence(lm, {"a", "b"}) ==
        doctest::Approx(-0.25 - 0.4 - 0.5).epsilon(1e-12));
  // "b a": p(b|<s>) unseen -> bo(<s>) + p(b) = -0.30103 + -0.9;
  // p(a|b) unseen -> bo(b) + p(a) = -0.15 + -0.6;
  // p(</s>|a) unseen -> bo(a) + p(</s>) = -0.2 + -1.2.
  double expect = (-0.30103 - 0.9) + (-0.15 - 0.6) + (-0.2 - 1.2);
  CHECK(model_sentence(lm, {"b", "a"}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("trigram model walks down one level at a time") {
  NGramModel lm = parse(kTrigram);
  CHECK(lm.order() == 3);
  // "a b a": p(a|<s>)=-0.2; p(b|<s> a)=-0.15 stored trigram;
  // p(a|a b)=-0.35 stored; p(</s>|b a) unseen ->
  //   bo(b a)=-0.08 + p(</s>|a) unseen -> bo(a)=-0.25 + p(</s>)=-1.1.
  double expect = -0.2 - 0.15 - 0.35 + (-0.08 - 0.25 - 1.1);
  CHECK(model_sentence(lm, {"a", "b", "a"}) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("arpa parser rejects malformed input") {
  CHECK_THROWS_AS(parse("\\1-grams:\n-0.5\ta\n\\end\\\n"), Error);  // no header
  CHECK_THROWS_AS(parse("\\data\\\nngram 1=2\n\n\\1-grams:\n-0.5\ta\n\n\\end\\\n"),
                  Error);  // count mismatch
  CHECK_THROWS_AS(
      parse("\\data\\\nngram 1=1\n\n\\1-grams:\n-0.5\ta\n"), Error);  // no end
  CHECK_THROWS_AS(
      parse("\\data\\\nngram 1=2\n\n\\1-grams:\n-0.5\ta\n-0.6\ta\n\n\\end\\\n"),
      Error);  // duplicate
  CHECK_THROWS_AS(parse("\\data\\\nngram 1=9 \n\n\\end\\\n"), Error);  // order cap
}

TEST_CASE("missing unk entry is synthesized with a harsh score") {
  NGramModel lm = parse(
      "\\data\\\nngram 1=3\n\n\\1-grams:\n-99\t<s>\n-0.7\t</s>\n-0.5\ta\n\n"
      "\\end\\\n");
  CHECK(lm.synthesized_unk());
  auto [p, state] = lm.score_word(lm.null_state(), lm.word_id("zzz"));
  (void)state;
  CHECK(p == doctest::Approx(-99).epsilon(1e-12));
}

TEST_CASE("empty sections may be omitted when their count is zero") {
  NGramModel lm = parse(
      "\\data\\\nngram 1=3\nngram 2=0\n\n\\1-grams:\n-99\t<s>\n-0.7\t</s>\n"
      "-0.5\ta\n\n\\end\\\n");
  CHECK(lm.order() == 2);
  CHECK(lm.ngram_count(2) == 0);
}

TEST_CASE("state truncation never changes any continuation score") {
  NGramModel lm = parse(kTrigram);
  // Walk every 3-word history over the full vocab; the successor state the
  // model returns must score every next word exactly like the untruncated
  // reference computation does.
  std::vector<std::string> vocab = {"a", "b", "zzz"};
  PlainModel ref;
  ref.order = 3;
  ref.grams[{"<s>"}] = {-99, -0.4};
  ref.grams[{"</s>"}] = {-1.1, 0};
  ref.grams[{"<unk>"}] = {-1.7, 0};
  ref.grams[{"a"}] = {-0.55, -0.25};
  ref.grams[{"b"}] = {-0.85, -0.2};
  ref.grams[{"<s>", "a"}] = {-0.2, -0.1};
  ref.grams[{"a", "b"}] = {-0.45, -0.12};
  ref.grams[{"b", "a"}] = {-0.4, -0.08};
  ref.grams[{"b", "</s>"}] = {-0.6, 0};
  ref.grams[{"a", "a"}] = {-0.3, -0.05};
  ref.grams[{"<s>", "a", "b"}] = {-0.15, 0};
  ref.grams[{"a", "b", "a"}] = {-0.35, 0};
  ref.grams[{"b", "a", "a"}] = {-0.5, 0};

  for (const auto& w1 : vocab)
    for (const auto& w2 : vocab)
      for (const auto& w3 : vocab) {
        LMState state = lm.begin_state();
        for (const auto& w : {w1, w2, w3})
          state = lm.score_word(state, lm.word_id(w)).second;
        std::vector<std::string> history = {"<s>", w1, w2, w3};
        for (const auto& next : vocab) {
          auto [p, s] = lm.score_word(state, lm.word_id(next));
          (void)s;
          std::vector<std::string> ctx = history;
          for (auto& t : ctx)
            if (t != "<s>" && t != "</s>" && !ref.grams.count({t})) t = "<unk>";
          std::string mapped = ref.grams.count({next}) ? next : "<unk>";
          CHECK(p == doctest::Approx(ref.prob(ctx, mapped)).epsilon(1e-12));
        }
      }
}

TEST_CASE("random models agree with the plain reference scorer") {
  std::mt19937_64 rng(2026);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * (double(rng() >> 11) * 0x1.0p-53);
  };
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t order = 1 + rng() % 3;
    std::vector<std::string> vocab = {"u", "v", "w", "x"};
    PlainModel ref;
    ref.order = order;

    std::ostringstream arpa;
    arpa << std::setprecision(17);
    std::vector<std::vector<std::string>> all_words;
    all_words.push_back({"<s>"});
    all_words.push_back({"</s>"});
    all_words.push_back({"<unk>"});
    for (const auto& w : vocab) all_words.push_back({w});

    std::vector<std::vector<std::vector<std::string>>> levels(order + 1);
    for (const auto& w : all_words) levels[1].push_back(w);
    // Grow higher levels from stored lower ones so every history of a
    // stored k-gram is stored, as real toolkits emit.
    for (std::size_t n = 2; n <= order; ++n) {
      for (const auto& hist : levels[n - 1]) {
        if (hist[0] == "</s>" || hist.back() == "</s>") continue;
        for (const auto& w : all_words) {
          if (w[0] == "<s>") continue;
          if (rng() % 3 != 0) continue;
          auto gram = hist;
          gram.push_back(w[0]);
          levels[n].push_back(gram);
        }
      }
    }

    arpa << "\\data\\\n";
    for (std::size_t n = 1; n <= order; ++n)
      arpa << "ngram " << n << "=" << levels[n].size() << "\n";
    arpa << "\n";
    for (std::size_t n = 1; n <= order; ++n) {
      arpa << "\\" << n << "-grams:\n";
      for (const auto& gram : levels[n]) {
        double prob = gram == std::vector<std::string>{"<s>"}
                          ? -99.0
                          : uniform(-3.0, -0.1);
        bool backoff = n < order && rng() % 2 == 0;
        double bo = backoff ? uniform(-1.0, -0.05) : 0.0;
        ref.grams[gram] = {prob, bo};
        arpa << prob;
        for (const auto& w : gram) arpa << (&w == &gram[0] ? "\t" : " ") << w;
        if (backoff) arpa << "\t" << bo;
        arpa << "\n";
      }
      arpa << "\n";
    }
    arpa << "\\end\\\n";

    NGramModel lm = parse(arpa.str());
    for (int s = 0; s < 40; ++s) {
      std::size_t len = 1 + rng() % 5;
      std::vector<std::string> sentence;
      for (std::size_t i = 0; i < len; ++i) {
        if (rng() % 8 == 0)
          sentence.push_back("zzz");  // out of vocabulary
        else
          sentence.push_back(vocab[rng() % vocab.size()]);
      }
      std::vector<std::string> mapped = sentence;
      for (auto& w : mapped)
        if (!ref.grams.count({w})) w = "<unk>";
      CHECK(model_sentence(lm, sentence) ==
            doctest::Approx(ref.sentence(mapped)).epsilon(1e-9));
    }
  }
}

TEST_CASE("score_phrase folds score_word") {
  NGramModel lm = parse(kTrigram);
  std::vector<LmWordId> phrase = {lm.word_id("a"), lm.word_id("b"),
                                  lm.word_id("a")};
  auto [total, state] = lm.score_phrase(lm.begin_state(), phrase);
  LMState step_state = lm.begin_state();
  double step_total = 0;
  for (LmWordId w : phrase) {
    auto [p, next] = lm.score_word(step_state, w);
    step_total += p;
    step_state = next;
  }
  CHECK(total == step_total);
  CHECK(state == step_state);
  auto [zero, same] = lm.score_phrase(state, {});
  CHECK(zero == 0);
  CHECK(same == state);
}
