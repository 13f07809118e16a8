#include "pbmt/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <map>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace pbmt {

StackConfiguration stack_config_from_name(const std::string& name) {
  if (name == "cardinality") return StackConfiguration::kCardinality;
  if (name == "coverage") return StackConfiguration::kCoverage;
  if (name == "coverage-endpos") return StackConfiguration::kCoverageEndPos;
  fail("unknown stack configuration '", name,
       "' (expected cardinality, coverage or coverage-endpos)");
}

const char* stack_config_name(StackConfiguration config) {
  switch (config) {
    case StackConfiguration::kCardinality:
      return "cardinality";
    case StackConfiguration::kCoverage:
      return "coverage";
    default:
      return "coverage-endpos";
  }
}

std::vector<LmWordId> build_lm_word_map(const RuleTable& table,
                                        const NGramModel& lm) {
  std::vector<LmWordId> map(table.vocab_size());
  for (WordId id = 0; id < map.size(); ++id) map[id] = lm.word_id(table.token(id));
  return map;
}

StackKey stack_key(StackConfiguration config, const Hypothesis& hyp) {
  StackKey key;
  key.cardinality = hyp.coverage.count();
  switch (config) {
    case StackConfiguration::kCardinality:
      break;
    case StackConfiguration::kCoverage:
      key.bits = hyp.coverage.words();
      break;
    case StackConfiguration::kCoverageEndPos:
      key.bits = hyp.coverage.words();
      key.end_pos = hyp.end_pos;
      break;
  }
  return key;
}

bool distortion_check(const CoverageVector& coverage, std::int32_t end_pos,
                      SpanRange next, int limit, std::uint32_t n_words) {
  if (limit < 0) return true;
  if (std::abs(static_cast<std::int64_t>(next.start) - end_pos - 1) > limit)
    return false;
  CoverageVector after = coverage;
  after.set_range(next);
  std::int64_t leftmost = after.leftmost_clear(n_words);
  return static_cast<std::int64_t>(next.end) - 1 - leftmost <= limit;
}

double FutureTable::gaps(const CoverageVector& coverage,
                         std::uint32_t n_words) const {
  double sum = 0.0;
  std::uint32_t i = 0;
  while (i < n_words) {
    if (coverage.test(i)) {
      ++i;
      continue;
    }
    std::uint32_t j = i;
    while (j < n_words && !coverage.test(j)) ++j;
    sum += at(i, j);
    i = j;
  }
  return sum;
}

FutureTable estimate_future(const SentenceOptions& options) {
  FutureTable ft;
  ft.n = options.length;
  const std::size_t n = options.length;
  ft.best.assign((n + 1) * (n + 1), -std::numeric_limits<double>::infinity());
  auto cell = [&](std::size_t i, std::size_t j) -> double& {
    return ft.best[i * (n + 1) + j];
  };
  for (const auto& so : options.spans)
    if (!so.rules.empty())
      cell(so.span.start, so.span.end) =
          std::max(cell(so.span.start, so.span.end), so.rules[0].static_score);
  for (std::size_t len = 2; len <= n; ++len)
    for (std::size_t i = 0; i + len <= n; ++i) {
      std::size_t j = i + len;
      for (std::size_t k = i + 1; k < j; ++k)
        cell(i, j) = std::max(cell(i, j), cell(i, k) + cell(k, j));
    }
  return ft;
}

namespace {

// Rule preparation for one span. Shared by the cached and decoded paths.
struct Prep {
  const DecodeModels& models;
  const std::vector<std::string>& tokens;
  SearchContext& ctx;

  LmWordId lm_id(WordId table_id) const {
    if (models.tm_to_lm) return (*models.tm_to_lm)[table_id];
    return models.lm->word_id(models.table->token(table_id));
  }

  PreparedRule operator()(const TranslationRule& rule, SpanRange span) const {
    PreparedRule p;
    p.tm = rule.tm_scores;
    p.passthrough = rule.passthrough;
    p.word_count = static_cast<std::uint32_t>(rule.target.size());
    if (rule.passthrough) {
      p.out_tokens.push_back(&tokens[span.start]);
      p.lm_target.push_back(models.lm->word_id(tokens[span.start]));
      p.lexro = rule.lexro_scores;
    } else {
      p.out_tokens.reserve(rule.target.size());
      p.lm_target.reserve(rule.target.size());
      for (WordId id : rule.target) {
        p.out_tokens.push_back(&models.table->token(id));
        p.lm_target.push_back(lm_id(id));
      }
      if (models.separate_lexro) {
        std::uint64_t t0 = now_ns();
        std::string src, tgt;
        for (std::uint32_t i = span.start; i < span.end; ++i) {
          if (i > span.start) src += ' ';
          src += tokens[i];
        }
        for (std::size_t i = 0; i < p.out_tokens.size(); ++i) {
          if (i) tgt += ' ';
          tgt += *p.out_tokens[i];
        }
        p.lexro = models.separate_lexro->lookup(src, tgt);
        ctx.timers.lexro_ns += now_ns() - t0;
      } else {
        p.lexro = rule.lexro_scores;
      }
    }

    const WeightVector& w = *models.weights;
    double s = w[kFeatPhrasePenalty] * 1.0 +
               w[kFeatWordPenalty] * static_cast<double>(p.word_count) +
               w[kFeatUnknownPenalty] * (p.passthrough ? 1.0 : 0.0);
    for (std::size_t i = 0; i < kTmScoreCount; ++i)
      s += w[kFeatTmBase + i] * static_cast<double>(p.tm[i]);
    std::uint64_t t0 = now_ns();
    auto [lp, st] = models.lm->score_phrase(models.lm->null_state(), p.lm_target);
    ctx.timers.lm_ns += now_ns() - t0;
    (void)st;
    s += w[kFeatLm] * lp;
    p.static_score = s;
    return p;
  }
};

}  // namespace

SentenceOptions collect_options(const DecodeModels& models,
                                const std::vector<std::string>& tokens,
                                SearchContext& ctx, SentenceStats& stats) {
  SentenceOptions out;
  const std::size_t n = tokens.size();
  out.length = n;

  std::vector<WordId> ids(n, kInvalidWordId);
  for (std::size_t i = 0; i < n; ++i)
    if (auto id = models.table->find_token(tokens[i])) ids[i] = *id;

  Prep prep{models, tokens, ctx};
  const std::size_t max_len = std::max<std::size_t>(1, models.table->max_source_len());
  TargetPhraseCollection scratch;

  for (std::size_t start = 0; start < n; ++start) {
    std::vector<SpanOptions> here;
    bool have_single = false;
    for (std::size_t len = 1; len <= std::min(max_len, n - start); ++len) {
      if (ids[start + len - 1] == kInvalidWordId) break;
      SpanRange span{static_cast<std::uint32_t>(start),
                     static_cast<std::uint32_t>(start + len)};
      std::uint64_t t0 = now_ns();
      const TargetPhraseCollection* found = models.table->lookup(
          {ids.data() + start, len}, scratch, ctx.table_stats);
      ctx.timers.table_ns += now_ns() - t0;
      if (!found) continue;
      SpanOptions so;
      so.span = span;
      so.rules.reserve(found->rules.size());
      for (const auto& rule : found->rules) so.rules.push_back(prep(rule, span));
      std::stable_sort(so.rules.begin(), so.rules.end(),
                       [](const PreparedRule& a, const PreparedRule& b) {
                         return a.static_score > b.static_score;
                       });
      if (len == 1) have_single = true;
      here.push_back(std::move(so));
    }
    if (!have_single) {
      // Nothing covers this token alone: synthesize the copy-through rule so
      // every position stays coverable.
      TranslationRule pass = make_passthrough_rule();
      SpanRange span{static_cast<std::uint32_t>(start),
                     static_cast<std::uint32_t>(start + 1)};
      SpanOptions so;
      so.span = span;
      so.rules.push_back(prep(pass, span));
      ++stats.oov;
      here.insert(here.begin(), std::move(so));
    }
    for (auto& so : here) out.spans.push_back(std::move(so));
  }
  return out;
}

namespace {

// Recombination key. Coverage, end position and LM state are the classic
// trio, but two more components still influence future scores: the start of
// the last span (orientation of the next attachment is classified against
// the whole span, not just its end) and the previous rule's backward
// reordering row (charged lazily when the next rule attaches). Merging
// across either would change scores of later extensions.
struct HypKeyHash {
  std::size_t operator()(const Hypothesis* h) const {
    std::uint64_t x = CoverageHash{}(h->coverage);
    x = x * 0x100000001b3ull ^ static_cast<std::uint32_t>(h->end_pos);
    x = x * 0x100000001b3ull ^ LMStateHash{}(h->lm_state);
    x = x * 0x100000001b3ull ^ h->span.start;
    if (h->rule)
      for (std::size_t i = 3; i < kLexroScoreCount; ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, &h->rule->lexro[i], sizeof bits);
        x = x * 0x100000001b3ull ^ bits;
      }
    return static_cast<std::size_t>(x);
  }
};

struct HypKeyEq {
  bool operator()(const Hypothesis* a, const Hypothesis* b) const {
    if (a->end_pos != b->end_pos || a->span.start != b->span.start ||
        !(a->coverage == b->coverage) || !(a->lm_state == b->lm_state))
      return false;
    if (!a->rule || !b->rule) return a->rule == b->rule;
    for (std::size_t i = 3; i < kLexroScoreCount; ++i)
      if (a->rule->lexro[i] != b->rule->lexro[i]) return false;
    return true;
  }
};

struct Stack {
  std::vector<Hypothesis*> hyps;
  std::unordered_map<const Hypothesis*, std::size_t, HypKeyHash, HypKeyEq> index;
};

struct CubeMember {
  const Hypothesis* hyp;
  double base;  // hyp score + rest cost after virtually covering the span
};

struct Cube {
  const SpanOptions* span;
  std::vector<CubeMember> members;
};

struct CubeEntry {
  double est;
  std::uint32_t cube;
  std::uint32_t i;  // member row
  std::uint32_t j;  // rule column
};

struct CubeOrder {
  bool operator()(const CubeEntry& a, const CubeEntry& b) const {
    if (a.est != b.est) return a.est < b.est;
    if (a.cube != b.cube) return a.cube > b.cube;
    if (a.i != b.i) return a.i > b.i;
    return a.j > b.j;
  }
};

class Decoder {
 public:
  Decoder(const DecodeModels& models, const std::vector<std::string>& tokens,
          const SearchParams& params, SearchContext& ctx, DecodeResult& res)
      : models_(models),
        tokens_(tokens),
        params_(params),
        ctx_(ctx),
        res_(res),
        n_(static_cast<std::uint32_t>(tokens.size())) {}

  void run() {
    options_ = collect_options(models_, tokens_, ctx_, res_.stats);
    future_ = estimate_future(options_);

    Hypothesis* initial = fresh();
    initial->lm_state = models_.lm->begin_state();
    initial->future = initial->total = future_.at(0, n_);

    insert(*initial);
    for (auto it = stacks_.begin(); it != stacks_.end(); ++it) expand(it->second);
    res_.stats.stacks = stacks_.size();

    const Hypothesis* best = best_complete_;
    FeatureVector features = best_features_;
    double score = best_score_;
    if (!best) {
      // No full derivation (tight distortion limits can strand coverage).
      // Fall back to the best fragment, finished the same way.
      res_.stats.partial = true;
      for (const auto& [key, stack] : stacks_)
        for (const Hypothesis* h : stack.hyps) {
          if (!h->rule) continue;
          if (!best || h->total > best->total ||
              (h->total == best->total && h->seq < best->seq))
            best = h;
        }
      if (!best) {
        res_.ok = false;
        res_.error = "no translation produced";
        return;
      }
      finish(*best, features, score);
    }

    std::vector<const Hypothesis*> chain;
    for (const Hypothesis* h = best; h->rule; h = h->parent) chain.push_back(h);
    std::reverse(chain.begin(), chain.end());
    std::string text;
    for (const Hypothesis* h : chain)
      for (const std::string* tok : h->rule->out_tokens) {
        if (!text.empty()) text += ' ';
        text += *tok;
      }
    res_.text = std::move(text);
    res_.score = score;
    res_.features = features;
  }

 private:
  Hypothesis* fresh() {
    void* slot = ctx_.hypothesis_queue().acquire(ctx_.ephemeral());
    Hypothesis* h = new (slot) Hypothesis;
    h->seq = seq_counter_++;
    ++res_.stats.created;
    return h;
  }

  // Applies finishing scores (end-of-sentence LM word, final reordering
  // step) on top of a hypothesis without mutating it.
  void finish(const Hypothesis& h, FeatureVector& features, double& score) {
    features = h.accumulated;
    std::uint64_t t0 = now_ns();
    auto [lp, st] = models_.lm->score_word(h.lm_state, models_.lm->end_id());
    ctx_.timers.lm_ns += now_ns() - t0;
    (void)st;
    features[kFeatLm] += lp;
    if (h.rule) {
      Orientation o = classify_orientation(h.span, SpanRange{n_, n_});
      features[kFeatLexroBase + 3 + static_cast<std::size_t>(o)] +=
          h.rule->lexro[3 + static_cast<std::size_t>(o)];
    }
    score = total_score(features, *models_.weights);
  }

  void insert(Hypothesis& h) {
    Stack& stack = stacks_[stack_key(params_.stack, h)];
    auto it = stack.index.find(&h);
    if (it == stack.index.end()) {
      stack.index.emplace(&h, stack.hyps.size());
      stack.hyps.push_back(&h);
      return;
    }
    // Equal search state: the better score subsumes the other outright.
    ++res_.stats.recombined;
    std::size_t pos = it->second;
    Hypothesis* old = stack.hyps[pos];
    if (h.score > old->score) {
      stack.index.erase(it);
      stack.index.emplace(&h, pos);
      stack.hyps[pos] = &h;
      ctx_.hypothesis_queue().recycle(old);
    } else {
      ctx_.hypothesis_queue().recycle(&h);
    }
  }

  void expand(Stack& stack) {
    res_.stats.max_stack = std::max<std::uint64_t>(res_.stats.max_stack,
                                                   stack.hyps.size());
    std::sort(stack.hyps.begin(), stack.hyps.end(),
              [](const Hypothesis* a, const Hypothesis* b) {
                if (a->total != b->total) return a->total > b->total;
                return a->seq < b->seq;
              });
    if (params_.beam_size > 0 && stack.hyps.size() > params_.beam_size) {
      for (std::size_t i = params_.beam_size; i < stack.hyps.size(); ++i) {
        stack.index.erase(stack.hyps[i]);
        ctx_.hypothesis_queue().recycle(stack.hyps[i]);
        ++res_.stats.pruned;
      }
      stack.hyps.resize(params_.beam_size);
    }

    // One cube per applicable span. Under coverage-endpos grouping every
    // member shares coverage and end position, so legality is decided once
    // on the representative.
    std::vector<Cube> cubes;
    const bool grouped = params_.stack == StackConfiguration::kCoverageEndPos;
    for (const auto& so : options_.spans) {
      Cube cube;
      cube.span = &so;
      if (grouped) {
        const Hypothesis* rep = stack.hyps.front();
        if (rep->coverage.overlaps(so.span)) continue;
        if (!distortion_check(rep->coverage, rep->end_pos, so.span,
                              params_.distortion_limit, n_))
          continue;
        cube.members.reserve(stack.hyps.size());
        for (const Hypothesis* h : stack.hyps)
          cube.members.push_back({h, member_base(*h, so.span)});
      } else {
        for (const Hypothesis* h : stack.hyps) {
          if (h->coverage.overlaps(so.span)) continue;
          if (!distortion_check(h->coverage, h->end_pos, so.span,
                                params_.distortion_limit, n_))
            continue;
          cube.members.push_back({h, member_base(*h, so.span)});
        }
        if (cube.members.empty()) continue;
      }
      std::sort(cube.members.begin(), cube.members.end(),
                [](const CubeMember& a, const CubeMember& b) {
                  if (a.base != b.base) return a.base > b.base;
                  return a.hyp->seq < b.hyp->seq;
                });
      cubes.push_back(std::move(cube));
    }

    std::priority_queue<CubeEntry, std::vector<CubeEntry>, CubeOrder> queue;
    std::unordered_set<std::uint64_t> seen;
    auto push = [&](std::uint32_t c, std::uint32_t i, std::uint32_t j) {
      const Cube& cube = cubes[c];
      if (i >= cube.members.size() || j >= cube.span->rules.size()) return;
      std::uint64_t key = (std::uint64_t{c} << 40) | (std::uint64_t{i} << 20) | j;
      if (!seen.insert(key).second) return;
      queue.push({cube.members[i].base + cube.span->rules[j].static_score, c, i, j});
    };
    for (std::uint32_t c = 0; c < cubes.size(); ++c) push(c, 0, 0);

    std::uint64_t pops = 0;
    while (!queue.empty() &&
           (params_.pop_limit == SearchParams::kUnlimitedPops ||
            pops < params_.pop_limit)) {
      CubeEntry top = queue.top();
      queue.pop();
      ++pops;
      ++res_.stats.pops;
      const Cube& cube = cubes[top.cube];
      extend(*cube.members[top.i].hyp, cube.span->rules[top.j], cube.span->span);
      push(top.cube, top.i + 1, top.j);
      push(top.cube, top.i, top.j + 1);
    }
  }

  double member_base(const Hypothesis& h, SpanRange span) {
    CoverageVector after = h.coverage;
    after.set_range(span);
    return h.score + future_.gaps(after, n_);
  }

  void extend(const Hypothesis& parent, const PreparedRule& rule,
              SpanRange span) {
    Hypothesis* h = fresh();
    h->parent = &parent;
    h->rule = &rule;
    h->span = span;
    h->coverage = parent.coverage;
    h->coverage.set_range(span);
    h->end_pos = static_cast<std::int32_t>(span.end) - 1;

    FeatureVector& fv = h->accumulated;
    fv = parent.accumulated;
    fv[kFeatDistortion] += distortion_penalty(parent.end_pos, span.start);
    fv[kFeatPhrasePenalty] += 1.0;
    fv[kFeatWordPenalty] += rule.word_count;
    if (rule.passthrough) fv[kFeatUnknownPenalty] += 1.0;

    std::uint64_t t0 = now_ns();
    auto [lp, state] = models_.lm->score_phrase(parent.lm_state, rule.lm_target);
    ctx_.timers.lm_ns += now_ns() - t0;
    fv[kFeatLm] += lp;
    h->lm_state = state;

    for (std::size_t i = 0; i < kTmScoreCount; ++i)
      fv[kFeatTmBase + i] += static_cast<double>(rule.tm[i]);

    auto orient = static_cast<std::size_t>(classify_orientation(parent.span, span));
    fv[kFeatLexroBase + orient] += rule.lexro[orient];
    if (parent.rule) fv[kFeatLexroBase + 3 + orient] += parent.rule->lexro[3 + orient];

    h->score = total_score(fv, *models_.weights);
    h->future = future_.gaps(h->coverage, n_);
    h->total = h->score + h->future;

    if (h->coverage.count() == static_cast<std::int32_t>(n_)) {
      FeatureVector features;
      double score;
      finish(*h, features, score);
      if (!best_complete_ || score > best_score_) {
        if (best_complete_) ctx_.hypothesis_queue().recycle(
            const_cast<Hypothesis*>(best_complete_));
        best_complete_ = h;
        best_score_ = score;
        best_features_ = features;
      } else {
        ctx_.hypothesis_queue().recycle(h);
      }
      return;
    }
    insert(*h);
  }

  const DecodeModels& models_;
  const std::vector<std::string>& tokens_;
  const SearchParams& params_;
  SearchContext& ctx_;
  DecodeResult& res_;
  const std::uint32_t n_;

  SentenceOptions options_;
  FutureTable future_;
  std::map<StackKey, Stack> stacks_;
  std::uint32_t seq_counter_ = 0;
  const Hypothesis* best_complete_ = nullptr;
  double best_score_ = 0;
  FeatureVector best_features_{};
};

}  // namespace

DecodeResult decode(const DecodeModels& models,
                    const std::vector<std::string>& tokens,
                    const SearchParams& params, SearchContext& ctx) {
  if (!models.table || !models.lm || !models.weights)
    fail("decode called without a table, language model and weights");
  DecodeResult res;
  if (tokens.empty()) return res;
  if (tokens.size() > params.max_sentence_length ||
      tokens.size() > CoverageVector::kMaxPositions) {
    res.ok = false;
    std::ostringstream os;
    os << "sentence has " << tokens.size() << " words, limit is "
       << std::min<std::size_t>(params.max_sentence_length,
                                CoverageVector::kMaxPositions);
    res.error = os.str();
    return res;
  }
  Decoder d(models, tokens, params, ctx, res);
  d.run();
  return res;
}

}  // namespace pbmt
