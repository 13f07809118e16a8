#include "pbmt/features.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace pbmt {
namespace {

struct WeightGroup {
  const char* name;
  std::size_t offset;
  std::size_t arity;
};

constexpr WeightGroup kGroups[] = {
    {"Distortion0", kFeatDistortion, 1},
    {"PhrasePenalty0", kFeatPhrasePenalty, 1},
    {"WordPenalty0", kFeatWordPenalty, 1},
    {"UnknownWordPenalty0", kFeatUnknownPenalty, 1},
    {"LM0", kFeatLm, 1},
    {"TranslationModel0", kFeatTmBase, kTmScoreCount},
    {"LexicalReordering0", kFeatLexroBase, kLexroScoreCount},
};

}  // namespace

WeightVector WeightVector::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open weights file: ", path);
  return parse(in, path);
}

WeightVector WeightVector::parse(std::istream& in, const std::string& name) {
  WeightVector w;
  bool seen[std::size(kGroups)] = {};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    while (!view.empty() && (view.back() == '\r' || view.back() == '\n'))
      view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos)
      fail(name, " line ", line_no, ": expected 'Name= v ...'");
    std::string group(view.substr(0, eq));
    auto values = split_tokens(view.substr(eq + 1));

    const WeightGroup* match = nullptr;
    for (const auto& g : kGroups)
      if (group == g.name) match = &g;
    if (!match) fail(name, " line ", line_no, ": unknown feature group '", group, "'");
    if (values.size() != match->arity)
      fail(name, " line ", line_no, ": ", group, " expects ", match->arity,
           " weights, got ", values.size());
    std::size_t slot = match - kGroups;
    if (seen[slot]) fail(name, " line ", line_no, ": duplicate group ", group);
    seen[slot] = true;
    for (std::size_t i = 0; i < values.size(); ++i)
      w.values[match->offset + i] = parse_double(values[i], "weight", line_no);
  }
  for (std::size_t i = 0; i < std::size(kGroups); ++i)
    if (!seen[i]) fail(name, ": missing feature group ", kGroups[i].name);
  return w;
}

double total_score(const FeatureVector& features, const WeightVector& weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    total += weights.values[i] * features[i];
  return total;
}

double distortion_penalty(std::int32_t prev_end, std::int32_t next_start) {
  return -std::abs(static_cast<double>(next_start) - prev_end - 1.0);
}

Orientation classify_orientation(SpanRange prev, SpanRange cur) {
  if (cur.start == prev.end) return Orientation::kMonotone;
  if (cur.end == prev.start) return Orientation::kSwap;
  return Orientation::kDiscontinuous;
}

float lexro_score(const TranslationRule& rule, LexroDirection dir,
                  Orientation orient) {
  return rule.lexro_scores[static_cast<std::size_t>(dir) * 3 +
                           static_cast<std::size_t>(orient)];
}

Penalties penalties(const TranslationRule& rule) {
  Penalties p;
  p.phrase = 1.0;
  p.word = static_cast<double>(rule.target.size());
  p.unknown = rule.passthrough ? 1.0 : 0.0;
  return p;
}

float log_prob_f32(double prob) {
  return static_cast<float>(std::log(prob));
}

std::array<float, kLexroScoreCount> uniform_lexro() {
  std::array<float, kLexroScoreCount> a;
  a.fill(log_prob_f32(1.0 / 3.0));
  return a;
}

TranslationRule make_passthrough_rule() {
  TranslationRule r;
  r.target.push_back(kInvalidWordId);
  r.tm_scores.fill(log_prob_f32(kTmFloorProb));
  r.lexro_scores = uniform_lexro();
  r.passthrough = true;
  return r;
}

}  // namespace pbmt
