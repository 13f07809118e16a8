#include "pbmt/lexro.hpp"

#include <fstream>

namespace pbmt {
namespace {

// Normalized key: tokens re-joined with single spaces on both sides.
std::string pair_key(const std::string& source, const std::string& target) {
  std::string k = source;
  k += " ||| ";
  k += target;
  return k;
}

}  // namespace

LexroTable LexroTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open reordering table: ", path);
  LexroTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_bar_fields(line);
    if (fields.size() != 3)
      fail(path, " line ", line_no, ": expected 3 fields, got ", fields.size());
    auto probs = split_tokens(fields[2]);
    if (probs.size() != kLexroScoreCount)
      fail(path, " line ", line_no, ": expected ", kLexroScoreCount,
           " probabilities, got ", probs.size());
    std::array<float, kLexroScoreCount> scores;
    for (std::size_t i = 0; i < kLexroScoreCount; ++i) {
      double p = parse_double(probs[i], "reordering probability", line_no);
      if (p < 0.0) fail(path, " line ", line_no, ": negative probability");
      scores[i] = log_prob_f32(p > 0.0 ? p : kTmFloorProb);
    }
    auto key = pair_key(join_tokens(split_tokens(fields[0])),
                        join_tokens(split_tokens(fields[1])));
    table.entries_[key] = scores;
  }
  return table;
}

const std::array<float, kLexroScoreCount>& LexroTable::lookup(
    const std::string& source, const std::string& target) const {
  auto it = entries_.find(pair_key(source, target));
  return it == entries_.end() ? fallback_ : it->second;
}

}  // namespace pbmt
