#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "pbmt/common.hpp"
#include "pbmt/driver.hpp"
#include "pbmt/synth.hpp"
#include "pbmt/tm.hpp"

using namespace pbmt;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

SyntheticSpec small_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.sentences = 30;
  spec.source_vocab = 50;
  spec.target_vocab = 50;
  spec.bigram_sources = 20;
  spec.rules_per_source = 3;
  spec.lm_bigrams = 300;
  spec.avg_len = 5.0;
  spec.max_len = 9;
  return spec;
}

}  // namespace

TEST_CASE("one seed produces byte-identical files") {
  SyntheticSpec spec = small_spec(77);
  fs::remove_all("/tmp/pbmt_synth_a");
  fs::remove_all("/tmp/pbmt_synth_b");
  SyntheticFiles a = generate_synthetic(spec, "/tmp/pbmt_synth_a");
  SyntheticFiles b = generate_synthetic(spec, "/tmp/pbmt_synth_b");
  CHECK(slurp(a.phrase_table) == slurp(b.phrase_table));
  CHECK(slurp(a.lexro) == slurp(b.lexro));
  CHECK(slurp(a.counts) == slurp(b.counts));
  CHECK(slurp(a.lm) == slurp(b.lm));
  CHECK(slurp(a.corpus) == slurp(b.corpus));
  CHECK(a.corpus_words == b.corpus_words);

  SyntheticSpec other = small_spec(78);
  fs::remove_all("/tmp/pbmt_synth_c");
  SyntheticFiles c = generate_synthetic(other, "/tmp/pbmt_synth_c");
  CHECK(slurp(a.corpus) != slurp(c.corpus));
}

TEST_CASE("corpus shape follows the spec fields") {
  SyntheticSpec spec = small_spec(91);
  spec.sentences = 200;
  spec.min_len = 2;
  spec.max_len = 8;
  fs::remove_all("/tmp/pbmt_synth_shape");
  SyntheticFiles files = generate_synthetic(spec, "/tmp/pbmt_synth_shape");
  auto lines = read_lines(files.corpus);
  REQUIRE(lines.size() == 200);
  std::uint64_t words = 0;
  for (const auto& line : lines) {
    auto tokens = split_tokens(line);
    CHECK(tokens.size() >= 2);
    CHECK(tokens.size() <= 8);
    words += tokens.size();
  }
  CHECK(words == files.corpus_words);
  double mean = static_cast<double>(words) / 200.0;
  CHECK(mean > 3.5);
  CHECK(mean < 6.5);
}

TEST_CASE("generated models feed straight into the pipeline") {
  SyntheticSpec spec = small_spec(123);
  fs::remove_all("/tmp/pbmt_synth_pipe");
  SyntheticFiles files = generate_synthetic(spec, "/tmp/pbmt_synth_pipe");

  BuildInputs inputs;
  inputs.phrase_table = files.phrase_table;
  inputs.lexro = files.lexro;
  inputs.counts = files.counts;
  BuildOptions options;
  BuildReport report =
      build_rule_table(inputs, options, "/tmp/pbmt_synth_pipe/table");
  CHECK(report.rules_read > 0);
  CHECK(report.source_phrases > 0);

  std::ofstream weights("/tmp/pbmt_synth_pipe/weights.ini");
  weights << "Distortion0= 0.3\nLM0= 0.5\nPhrasePenalty0= -0.2\n"
             "TranslationModel0= 0.2 0.2 0.3 0.3\nUnknownWordPenalty0= 1\n"
             "WordPenalty0= -0.1\n"
             "LexicalReordering0= 0.3 0.3 0.3 0.3 0.3 0.3\n";
  weights.close();

  DecoderConfig config;
  config.table_dir = "/tmp/pbmt_synth_pipe/table";
  config.lm_path = files.lm;
  config.weights_path = "/tmp/pbmt_synth_pipe/weights.ini";
  LoadedModels models = LoadedModels::load(config);

  std::vector<std::string> input = read_lines(files.corpus);
  std::vector<std::string> output;
  RunReport run = run_corpus(models, config, input, output);
  CHECK(run.sentences == 30);
  CHECK(run.errors == 0);
  CHECK(output.size() == 30);
  for (const auto& l : output) CHECK(!l.empty());
}

TEST_CASE("oov rate pushes unknown tokens into the corpus") {
  SyntheticSpec clean = small_spec(55);
  fs::remove_all("/tmp/pbmt_synth_oov0");
  SyntheticFiles clean_files = generate_synthetic(clean, "/tmp/pbmt_synth_oov0");

  SyntheticSpec noisy = small_spec(55);
  noisy.oov_rate = 0.3;
  fs::remove_all("/tmp/pbmt_synth_oov3");
  SyntheticFiles noisy_files = generate_synthetic(noisy, "/tmp/pbmt_synth_oov3");

  // Vocabulary of the phrase table: every token of every source phrase.
  auto table_vocab = [](const std::string& table_path) {
    std::set<std::string> vocab;
    for (const auto& line : read_lines(table_path)) {
      auto bar = line.find("|||");
      REQUIRE(bar != std::string::npos);
      for (const auto& t : split_tokens(line.substr(0, bar))) vocab.insert(t);
    }
    return vocab;
  };
  auto oov_fraction = [&](const SyntheticFiles& files) {
    auto vocab = table_vocab(files.phrase_table);
    std::uint64_t total = 0, oov = 0;
    for (const auto& line : read_lines(files.corpus))
      for (const auto& t : split_tokens(line)) {
        ++total;
        if (!vocab.count(t)) ++oov;
      }
    REQUIRE(total > 0);
    return static_cast<double>(oov) / static_cast<double>(total);
  };

  double clean_frac = oov_fraction(clean_files);
  double noisy_frac = oov_fraction(noisy_files);
  CHECK(clean_frac == 0.0);
  CHECK(noisy_frac > 0.15);
  CHECK(noisy_frac < 0.45);
}

TEST_CASE("repetitive target pool shrinks under compression") {
  SyntheticSpec spec = small_spec(200);
  spec.target_pool = 4;
  spec.sentences = 5;
  fs::remove_all("/tmp/pbmt_synth_pool");
  SyntheticFiles files = generate_synthetic(spec, "/tmp/pbmt_synth_pool");

  BuildInputs inputs;
  inputs.phrase_table = files.phrase_table;
  inputs.lexro = files.lexro;
  inputs.counts = files.counts;

  BuildOptions identity;
  identity.codec = Codec::kIdentity;
  BuildReport plain =
      build_rule_table(inputs, identity, "/tmp/pbmt_synth_pool/t_id");

  BuildOptions packed;
  packed.codec = Codec::kCompressed;
  BuildReport squeezed =
      build_rule_table(inputs, packed, "/tmp/pbmt_synth_pool/t_z");

  CHECK(squeezed.payload_bytes < plain.payload_bytes);
}
