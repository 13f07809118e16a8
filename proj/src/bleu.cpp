#include "pbmt/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "pbmt/common.hpp"

namespace pbmt {
namespace {

// n-grams joined with an unprintable separator so token boundaries survive.
void count_ngrams(const std::vector<std::string>& tokens, std::size_t n,
                  std::unordered_map<std::string, std::uint64_t>& out) {
  if (tokens.size() < n) return;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += '\x01';
      key += tokens[i + k];
    }
    ++out[key];
  }
}

}  // namespace

BleuResult corpus_bleu(const std::vector<std::string>& hypotheses,
                       const std::vector<std::string>& references) {
  if (hypotheses.size() != references.size())
    fail("BLEU corpus size mismatch: ", hypotheses.size(), " hypotheses vs ",
         references.size(), " references");
  if (hypotheses.empty()) fail("BLEU needs at least one sentence pair");

  std::array<std::uint64_t, 4> matched{};
  std::array<std::uint64_t, 4> total{};
  BleuResult r;

  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    auto hyp = split_tokens(hypotheses[s]);
    auto ref = split_tokens(references[s]);
    r.hyp_words += hyp.size();
    r.ref_words += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      std::unordered_map<std::string, std::uint64_t> hyp_counts, ref_counts;
      count_ngrams(hyp, n, hyp_counts);
      count_ngrams(ref, n, ref_counts);
      for (const auto& [key, count] : hyp_counts) {
        total[n - 1] += count;
        auto it = ref_counts.find(key);
        if (it != ref_counts.end())
          matched[n - 1] += std::min(count, it->second);
      }
    }
  }

  double log_sum = 0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    r.precisions[n] =
        total[n] ? static_cast<double>(matched[n]) / total[n] : 0.0;
    if (r.precisions[n] <= 0.0)
      zero = true;
    else
      log_sum += std::log(r.precisions[n]);
  }
  if (r.hyp_words >= r.ref_words)
    r.brevity_penalty = 1.0;
  else if (r.hyp_words == 0)
    r.brevity_penalty = 0.0;
  else
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(r.ref_words) /
                                           static_cast<double>(r.hyp_words));
  r.bleu = zero ? 0.0 : r.brevity_penalty * std::exp(log_sum / 4.0);
  return r;
}

}  // namespace pbmt
