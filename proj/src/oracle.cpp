#include "pbmt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace pbmt {
namespace {

struct OracleRule {
  TranslationRule rule;
  std::vector<LmWordId> lm_target;
  std::vector<std::string> out_tokens;
  std::array<float, kLexroScoreCount> lexro{};
};

struct OracleSpan {
  SpanRange span;
  std::vector<OracleRule> rules;
};

struct Enumerator {
  const DecodeModels& models;
  const std::vector<std::string>& tokens;
  int distortion_limit;
  std::uint32_t n;
  std::vector<OracleSpan> spans;
  OracleResult& out;

  // Current path.
  std::vector<SpanRange> path_spans;
  std::vector<const OracleRule*> path_rules;

  bool feasible(std::uint32_t mask, std::int32_t end_pos, SpanRange next) const {
    for (std::uint32_t p = next.start; p < next.end; ++p)
      if (mask & (1u << p)) return false;
    if (distortion_limit < 0) return true;
    if (std::abs(static_cast<long>(next.start) - end_pos - 1) > distortion_limit)
      return false;
    std::uint32_t after = mask;
    for (std::uint32_t p = next.start; p < next.end; ++p) after |= 1u << p;
    std::int64_t leftmost = n;
    for (std::uint32_t p = 0; p < n; ++p)
      if (!(after & (1u << p))) {
        leftmost = p;
        break;
      }
    return static_cast<std::int64_t>(next.end) - 1 - leftmost <= distortion_limit;
  }

  void complete(const FeatureVector& acc, SpanRange last,
                const OracleRule& last_rule, const LMState& lm_state) {
    FeatureVector fv = acc;
    auto [lp, st] = models.lm->score_word(lm_state, models.lm->end_id());
    (void)st;
    fv[kFeatLm] += lp;
    auto o = static_cast<std::size_t>(
        classify_orientation(last, SpanRange{n, n}));
    fv[kFeatLexroBase + 3 + o] += last_rule.lexro[3 + o];
    double score = total_score(fv, *models.weights);
    ++out.derivations;
    if (out.derivations == 1 || score > out.score) {
      out.score = score;
      out.features = fv;
      out.spans = path_spans;
      std::string text;
      for (const OracleRule* r : path_rules)
        for (const auto& t : r->out_tokens) {
          if (!text.empty()) text += ' ';
          text += t;
        }
      out.text = std::move(text);
    }
  }

  void recurse(std::uint32_t mask, std::int32_t end_pos, SpanRange prev,
               const OracleRule* prev_rule, const FeatureVector& acc,
               const LMState& lm_state) {
    if (mask + 1 == (1u << n)) return;  // full; handled at extension time
    for (const auto& os : spans) {
      if (!feasible(mask, end_pos, os.span)) continue;
      std::uint32_t next_mask = mask;
      for (std::uint32_t p = os.span.start; p < os.span.end; ++p)
        next_mask |= 1u << p;
      for (const auto& rule : os.rules) {
        FeatureVector fv = acc;
        fv[kFeatDistortion] += distortion_penalty(end_pos, os.span.start);
        fv[kFeatPhrasePenalty] += 1.0;
        fv[kFeatWordPenalty] += static_cast<double>(rule.rule.target.size());
        if (rule.rule.passthrough) fv[kFeatUnknownPenalty] += 1.0;
        auto [lp, state] = models.lm->score_phrase(lm_state, rule.lm_target);
        fv[kFeatLm] += lp;
        for (std::size_t i = 0; i < kTmScoreCount; ++i)
          fv[kFeatTmBase + i] += static_cast<double>(rule.rule.tm_scores[i]);
        auto o = static_cast<std::size_t>(classify_orientation(prev, os.span));
        fv[kFeatLexroBase + o] += rule.lexro[o];
        if (prev_rule) fv[kFeatLexroBase + 3 + o] += prev_rule->lexro[3 + o];

        path_spans.push_back(os.span);
        path_rules.push_back(&rule);
        if (next_mask + 1 == (1u << n))
          complete(fv, os.span, rule, state);
        else
          recurse(next_mask, static_cast<std::int32_t>(os.span.end) - 1,
                  os.span, &rule, fv, state);
        path_spans.pop_back();
        path_rules.pop_back();
      }
    }
  }
};

}  // namespace

OracleResult exhaustive_decode(const DecodeModels& models,
                               const std::vector<std::string>& tokens,
                               int distortion_limit) {
  if (!models.table || !models.lm || !models.weights)
    fail("oracle called without a table, language model and weights");
  OracleResult out;
  const std::size_t n = tokens.size();
  if (n == 0) return out;
  if (n > kOracleMaxWords) {
    out.ok = false;
    std::ostringstream os;
    os << "exhaustive decoding is limited to " << kOracleMaxWords
       << " words, sentence has " << n;
    out.error = os.str();
    return out;
  }

  // Independent option gathering: raw table lookups plus copy-through
  // synthesis, keeping the stored rule order.
  std::vector<WordId> ids(n, kInvalidWordId);
  for (std::size_t i = 0; i < n; ++i)
    if (auto id = models.table->find_token(tokens[i])) ids[i] = *id;

  Enumerator e{models, tokens, distortion_limit, static_cast<std::uint32_t>(n),
               {}, out, {}, {}};
  RuleTableStats stats;
  TargetPhraseCollection scratch;
  std::size_t max_len = std::max<std::size_t>(1, models.table->max_source_len());

  auto lm_id = [&](WordId table_id) {
    if (models.tm_to_lm) return (*models.tm_to_lm)[table_id];
    return models.lm->word_id(models.table->token(table_id));
  };

  for (std::size_t start = 0; start < n; ++start) {
    bool have_single = false;
    std::vector<OracleSpan> here;
    for (std::size_t len = 1; len <= std::min(max_len, n - start); ++len) {
      if (ids[start + len - 1] == kInvalidWordId) break;
      SpanRange span{static_cast<std::uint32_t>(start),
                     static_cast<std::uint32_t>(start + len)};
      const auto* found =
          models.table->lookup({ids.data() + start, len}, scratch, stats);
      if (!found) continue;
      OracleSpan os;
      os.span = span;
      for (const auto& rule : found->rules) {
        OracleRule r;
        r.rule = rule;
        for (WordId id : rule.target) {
          r.out_tokens.push_back(models.table->token(id));
          r.lm_target.push_back(lm_id(id));
        }
        if (models.separate_lexro) {
          std::string src, tgt;
          for (std::uint32_t i = span.start; i < span.end; ++i) {
            if (i > span.start) src += ' ';
            src += tokens[i];
          }
          for (std::size_t i = 0; i < r.out_tokens.size(); ++i) {
            if (i) tgt += ' ';
            tgt += r.out_tokens[i];
          }
          r.lexro = models.separate_lexro->lookup(src, tgt);
        } else {
          r.lexro = rule.lexro_scores;
        }
        os.rules.push_back(std::move(r));
      }
      if (len == 1) have_single = true;
      here.push_back(std::move(os));
    }
    if (!have_single) {
      OracleSpan os;
      os.span = SpanRange{static_cast<std::uint32_t>(start),
                          static_cast<std::uint32_t>(start + 1)};
      OracleRule r;
      r.rule = make_passthrough_rule();
      r.out_tokens.push_back(tokens[start]);
      r.lm_target.push_back(models.lm->word_id(tokens[start]));
      r.lexro = r.rule.lexro_scores;
      os.rules.push_back(std::move(r));
      here.insert(here.begin(), std::move(os));
    }
    for (auto& os : here) e.spans.push_back(std::move(os));
  }

  FeatureVector zero{};
  e.recurse(0, -1, kInitialSpan, nullptr, zero, models.lm->begin_state());
  if (out.derivations == 0) {
    out.ok = false;
    out.error = "no complete derivation under the distortion limit";
  }
  return out;
}

}  // namespace pbmt
