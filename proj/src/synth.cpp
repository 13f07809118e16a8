#include "pbmt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <vector>

#include "pbmt/common.hpp"

namespace pbmt {
namespace {

// mt19937_64 output is pinned by the standard; the maps below keep the
// derived values platform-independent too (std::*_distribution is not).
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  return rng() % n;
}

double normal(std::mt19937_64& rng, double mean, double stddev) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                    std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

struct Rule {
  std::vector<std::size_t> target;
  double p_tgt_src = 0, lex_tgt_src = 0, p_src_tgt = 0, lex_src_tgt = 0;
};

}  // namespace

SyntheticFiles generate_synthetic(const SyntheticSpec& spec,
                                  const std::string& out_dir) {
  if (spec.source_vocab == 0 || spec.target_vocab == 0)
    fail("synthetic vocabularies must be nonempty");
  if (spec.min_len == 0 || spec.min_len > spec.max_len)
    fail("synthetic length bounds are inverted");
  if (spec.rules_per_source == 0) fail("rules_per_source must be positive");

  std::mt19937_64 rng(spec.seed);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  SyntheticFiles files;
  files.phrase_table = (fs::path(out_dir) / "pt.txt").string();
  files.lexro = (fs::path(out_dir) / "lexro.txt").string();
  files.counts = (fs::path(out_dir) / "counts.txt").string();
  files.lm = (fs::path(out_dir) / "lm.arpa").string();
  files.corpus = (fs::path(out_dir) / "corpus.txt").string();

  auto src_tok = [](std::size_t i) { return "s" + std::to_string(i); };
  auto tgt_tok = [](std::size_t i) { return "t" + std::to_string(i); };
  const std::size_t pool = spec.target_pool ? std::min(spec.target_pool, spec.target_vocab)
                                            : spec.target_vocab;

  // Source phrases: every unigram, then a sample of distinct bigrams.
  std::vector<std::vector<std::size_t>> sources;
  for (std::size_t i = 0; i < spec.source_vocab; ++i) sources.push_back({i});
  {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t k = 0; k < spec.bigram_sources; ++k) {
      auto a = static_cast<std::size_t>(uniform_below(rng, spec.source_vocab));
      auto b = static_cast<std::size_t>(uniform_below(rng, spec.source_vocab));
      if (!seen.insert({a, b}).second) continue;
      sources.push_back({a, b});
    }
  }

  // Rules per source, targets distinct within a source.
  std::vector<std::vector<Rule>> rules(sources.size());
  for (std::size_t s = 0; s < sources.size(); ++s) {
    std::set<std::vector<std::size_t>> used;
    std::vector<double> mass;
    for (std::size_t k = 0; k < spec.rules_per_source; ++k) {
      std::vector<std::size_t> target;
      bool fresh = false;
      for (int attempt = 0; attempt < 20 && !fresh; ++attempt) {
        target.clear();
        std::size_t len = 1 + uniform_below(rng, spec.max_target_len);
        for (std::size_t i = 0; i < len; ++i)
          target.push_back(static_cast<std::size_t>(uniform_below(rng, pool)));
        fresh = used.insert(target).second;
      }
      if (!fresh) continue;
      Rule r;
      r.target = std::move(target);
      r.lex_tgt_src = 0.05 + 0.95 * uniform01(rng);
      r.p_src_tgt = 0.05 + 0.95 * uniform01(rng);
      r.lex_src_tgt = 0.05 + 0.95 * uniform01(rng);
      rules[s].push_back(std::move(r));
      mass.push_back(0.05 + uniform01(rng));
    }
    double sum = 0;
    for (double m : mass) sum += m;
    for (std::size_t k = 0; k < rules[s].size(); ++k)
      rules[s][k].p_tgt_src = mass[k] / sum;
  }

  // Phrase table and reordering table.
  {
    std::ofstream pt(files.phrase_table);
    std::ofstream ro(files.lexro);
    if (!pt || !ro) fail("cannot create synthetic model files in ", out_dir);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      std::string src;
      for (std::size_t i = 0; i < sources[s].size(); ++i) {
        if (i) src += ' ';
        src += src_tok(sources[s][i]);
      }
      for (const auto& r : rules[s]) {
        std::string tgt;
        for (std::size_t i = 0; i < r.target.size(); ++i) {
          if (i) tgt += ' ';
          tgt += tgt_tok(r.target[i]);
        }
        pt << src << " ||| " << tgt << " ||| " << num(r.p_src_tgt) << ' '
           << num(r.lex_src_tgt) << ' ' << num(r.p_tgt_src) << ' '
           << num(r.lex_tgt_src) << '\n';
        if (uniform01(rng) < spec.lexro_fraction) {
          double a = 0.1 + uniform01(rng), b = 0.1 + uniform01(rng),
                 c = 0.1 + uniform01(rng);
          double d = 0.1 + uniform01(rng), e = 0.1 + uniform01(rng),
                 f = 0.1 + uniform01(rng);
          double s1 = a + b + c, s2 = d + e + f;
          ro << src << " ||| " << tgt << " ||| " << num(a / s1) << ' '
             << num(b / s1) << ' ' << num(c / s1) << ' ' << num(d / s2) << ' '
             << num(e / s2) << ' ' << num(f / s2) << '\n';
        }
      }
    }
  }

  // Counts follow a 1/rank curve with jitter, matching the skew the corpus
  // sampler uses, so frequent phrases really are the cached ones.
  {
    std::ofstream out(files.counts);
    if (!out) fail("cannot create synthetic counts in ", out_dir);
    for (std::size_t s = 0; s < sources.size(); ++s) {
      std::string src;
      for (std::size_t i = 0; i < sources[s].size(); ++i) {
        if (i) src += ' ';
        src += src_tok(sources[s][i]);
      }
      std::size_t rank = sources[s].size() == 1 ? sources[s][0] : 50 + s;
      double count = std::floor(100000.0 / (1.0 + rank) * (0.8 + 0.4 * uniform01(rng)));
      out << src << " ||| " << num(count) << '\n';
    }
  }

  // Bigram ARPA model over the target vocabulary.
  {
    std::vector<std::string> unigrams;
    unigrams.push_back("<s>");
    unigrams.push_back("</s>");
    unigrams.push_back("<unk>");
    for (std::size_t i = 0; i < spec.target_vocab; ++i)
      unigrams.push_back(tgt_tok(i));

    std::set<std::pair<std::string, std::string>> bigrams;
    auto any_tgt = [&] { return tgt_tok(uniform_below(rng, pool)); };
    for (std::size_t i = 0; i < spec.lm_bigrams; ++i) {
      double pick = uniform01(rng);
      if (pick < 0.15)
        bigrams.insert({"<s>", any_tgt()});
      else if (pick < 0.3)
        bigrams.insert({any_tgt(), "</s>"});
      else
        bigrams.insert({any_tgt(), any_tgt()});
    }

    std::ofstream out(files.lm);
    if (!out) fail("cannot create synthetic language model in ", out_dir);
    out << "\\data\\\n";
    out << "ngram 1=" << unigrams.size() << "\n";
    out << "ngram 2=" << bigrams.size() << "\n\n";
    out << "\\1-grams:\n";
    for (const auto& w : unigrams) {
      double prob = w == "<s>" ? -99.0
                    : w == "<unk>" ? -3.5
                                   : -1.0 - 3.0 * uniform01(rng);
      double backoff = -0.8 + 0.7 * uniform01(rng);
      out << num(prob) << '\t' << w << '\t' << num(backoff) << '\n';
    }
    out << "\n\\2-grams:\n";
    for (const auto& [a, b] : bigrams)
      out << num(-0.3 - 2.7 * uniform01(rng)) << '\t' << a << ' ' << b << '\n';
    out << "\n\\end\\\n";
  }

  // Corpus: skewed unigram draws with occasional known bigrams and optional
  // out-of-vocabulary tokens.
  {
    std::ofstream out(files.corpus);
    if (!out) fail("cannot create synthetic corpus in ", out_dir);
    std::uint64_t oov_counter = 0;
    for (std::size_t s = 0; s < spec.sentences; ++s) {
      double want = normal(rng, spec.avg_len, spec.len_stddev);
      auto len = static_cast<std::size_t>(std::llround(want));
      len = std::clamp(len, spec.min_len, spec.max_len);
      std::string line;
      std::size_t emitted = 0;
      while (emitted < len) {
        if (!line.empty()) line += ' ';
        if (spec.oov_rate > 0.0 && uniform01(rng) < spec.oov_rate) {
          line += "oov" + std::to_string(oov_counter++);
          ++emitted;
          continue;
        }
        if (sources.size() > spec.source_vocab && len - emitted >= 2 &&
            uniform01(rng) < 0.2) {
          const auto& bigram =
              sources[spec.source_vocab +
                      uniform_below(rng, sources.size() - spec.source_vocab)];
          line += src_tok(bigram[0]);
          line += ' ';
          line += src_tok(bigram[1]);
          emitted += 2;
          continue;
        }
        double u = uniform01(rng);
        auto idx = static_cast<std::size_t>(
            static_cast<double>(spec.source_vocab) * u * u);
        if (idx >= spec.source_vocab) idx = spec.source_vocab - 1;
        line += src_tok(idx);
        ++emitted;
      }
      files.corpus_words += emitted;
      out << line << '\n';
    }
  }

  return files;
}

}  // namespace pbmt
