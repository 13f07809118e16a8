#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pbmt/common.hpp"
#include "pbmt/driver.hpp"
#include "pbmt/synth.hpp"
#include "pbmt/tm.hpp"

using namespace pbmt;
namespace fs = std::filesystem;

namespace {

struct DriverFixture {
  std::string dir = "/tmp/pbmt_driver_fixture";
  DecoderConfig config;
  LoadedModels models;
  std::vector<std::string> corpus;

  DriverFixture() {
    fs::remove_all(dir);
    SyntheticSpec spec;
    spec.seed = 808;
    spec.sentences = 25;
    spec.source_vocab = 50;
    spec.target_vocab = 50;
    spec.bigram_sources = 30;
    spec.rules_per_source = 3;
    spec.lm_bigrams = 400;
    spec.avg_len = 5.0;
    spec.max_len = 10;
    SyntheticFiles files = generate_synthetic(spec, dir);

    BuildInputs inputs;
    inputs.phrase_table = files.phrase_table;
    inputs.lexro = files.lexro;
    inputs.counts = files.counts;
    build_rule_table(inputs, BuildOptions{}, dir + "/table");

    std::ofstream weights(dir + "/weights.ini");
    weights << "Distortion0= 0.3\nLM0= 0.5\nPhrasePenalty0= -0.2\n"
               "TranslationModel0= 0.2 0.2 0.3 0.3\nUnknownWordPenalty0= 1\n"
               "WordPenalty0= -0.1\n"
               "LexicalReordering0= 0.3 0.3 0.3 0.3 0.3 0.3\n";
    weights.close();

    config.table_dir = dir + "/table";
    config.lm_path = files.lm;
    config.weights_path = dir + "/weights.ini";
    models = LoadedModels::load(config);

    std::ifstream in(files.corpus);
    std::string line;
    while (std::getline(in, line)) corpus.push_back(line);
  }
};

DriverFixture& fixture() {
  static DriverFixture instance;
  return instance;
}

std::string write_config(const std::string& body) {
  static int counter = 0;
  std::string path =
      "/tmp/pbmt_driver_cfg_" + std::to_string(counter++) + ".ini";
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("config files parse keys, comments and blank lines") {
  auto& fx = fixture();
  std::string path = write_config(
      "# decoder settings\n"
      "table = " + fx.dir + "/table\n"
      "lm = " + fx.dir + "/lm.arpa\n"
      "weights = " + fx.dir + "/weights.ini\n"
      "\n"
      "threads = 3\n"
      "pop-limit = 250\n"
      "distortion-limit = 4\n"
      "beam = 12\n"
      "stack = coverage\n"
      "cache-size = 123\n"
      "max-sentence-length = 80\n");
  DecoderConfig c = DecoderConfig::from_file(path);
  CHECK(c.table_dir == fx.dir + "/table");
  CHECK(c.threads == 3);
  CHECK(c.search.pop_limit == 250);
  CHECK(c.search.distortion_limit == 4);
  CHECK(c.search.beam_size == 12);
  CHECK(c.search.stack == StackConfiguration::kCoverage);
  REQUIRE(c.cache_size.has_value());
  CHECK(*c.cache_size == 123);
  CHECK(c.search.max_sentence_length == 80);
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK_THROWS_AS(
      DecoderConfig::from_file(write_config("tabel = /nowhere\n")), Error);
  CHECK_THROWS_AS(
      DecoderConfig::from_file(write_config("threads = zero\n")), Error);
  CHECK_THROWS_AS(
      DecoderConfig::from_file(write_config("stack = diagonal\n")), Error);
  CHECK_THROWS_AS(
      DecoderConfig::from_file(write_config("threads\n")), Error);
  CHECK_THROWS_AS(DecoderConfig::from_file("/tmp/pbmt_no_such_config.ini"),
                  Error);
}

TEST_CASE("pop limit zero means unlimited") {
  DecoderConfig c;
  c.apply_kv("pop-limit", "0", "test");
  CHECK(c.search.pop_limit == SearchParams::kUnlimitedPops);
}

TEST_CASE("validation points at the missing piece") {
  DecoderConfig c;
  CHECK_THROWS_AS(c.validate(), Error);  // no table
  c.table_dir = "/tmp/somewhere";
  CHECK_THROWS_AS(c.validate(), Error);  // no lm
  c.lm_path = "/tmp/somewhere.arpa";
  CHECK_THROWS_AS(c.validate(), Error);  // no weights
  c.weights_path = "/tmp/weights.ini";
  c.validate();
  c.threads = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("a corpus run decodes every line exactly once in order") {
  auto& fx = fixture();
  std::vector<std::string> output;
  RunReport report = run_corpus(fx.models, fx.config, fx.corpus, output);

  CHECK(report.sentences == fx.corpus.size());
  CHECK(report.errors == 0);
  CHECK(report.threads == 1);
  REQUIRE(output.size() == fx.corpus.size());
  REQUIRE(report.sentence_scores.size() == fx.corpus.size());

  std::size_t words = 0;
  for (const auto& line : fx.corpus) words += split_tokens(line).size();
  CHECK(report.source_words == words);

  // Sentence i of the output must be the decode of sentence i of the input.
  SearchContext ctx;
  DecodeModels view = fx.models.view();
  for (std::size_t i = 0; i < fx.corpus.size(); ++i) {
    DecodeResult r = decode(view, split_tokens(fx.corpus[i]),
                            fx.config.search, ctx);
    ctx.reset_sentence();
    CHECK(output[i] == r.text);
    CHECK(report.sentence_scores[i] == r.score);
  }

  // One pool reset per sentence, and the shared cursor is the only
  // synchronization, so sync events stay within a small multiple of N.
  CHECK(report.pool_resets == fx.corpus.size());
  CHECK(report.sync_ops <= 4 * fx.corpus.size());
  CHECK(report.pool_capacity_bytes > 0);
  CHECK(report.pool_max_sentence_bytes <= report.pool_capacity_bytes);
  CHECK(report.words_per_second > 0);
}

TEST_CASE("multithreaded runs reproduce the single-thread output") {
  auto& fx = fixture();
  std::vector<std::string> one, four;
  DecoderConfig base = fx.config;
  base.threads = 1;
  RunReport ra = run_corpus(fx.models, base, fx.corpus, one);
  base.threads = 4;
  RunReport rb = run_corpus(fx.models, base, fx.corpus, four);
  CHECK(rb.threads == 4);
  CHECK(one == four);
  REQUIRE(ra.sentence_scores.size() == rb.sentence_scores.size());
  for (std::size_t i = 0; i < ra.sentence_scores.size(); ++i)
    CHECK(ra.sentence_scores[i] == rb.sentence_scores[i]);
}

TEST_CASE("over-long lines become error markers not crashes") {
  auto& fx = fixture();
  DecoderConfig tight = fx.config;
  tight.search.max_sentence_length = 4;
  std::vector<std::string> input = {"a b", "w w w w w w w w", "c d"};
  std::vector<std::string> output;
  RunReport report = run_corpus(fx.models, tight, input, output);
  CHECK(report.sentences == 3);
  CHECK(report.errors == 1);
  REQUIRE(output.size() == 3);
  CHECK(output[1].empty());
  CHECK(!output[0].empty());
  CHECK(!output[2].empty());
  REQUIRE(report.sentence_errors.size() == 1);
  CHECK(report.sentence_errors[0].first == 1);
  CHECK(!report.sentence_errors[0].second.empty());
}

TEST_CASE("empty input is a clean no-op") {
  auto& fx = fixture();
  std::vector<std::string> output;
  RunReport report = run_corpus(fx.models, fx.config, {}, output);
  CHECK(report.sentences == 0);
  CHECK(report.errors == 0);
  CHECK(output.empty());
}

TEST_CASE("report text is one key-value pair per line") {
  auto& fx = fixture();
  std::vector<std::string> output;
  RunReport report = run_corpus(fx.models, fx.config, fx.corpus, output);
  std::string text = report.to_text(true);

  std::istringstream in(text);
  std::string line;
  std::size_t lines = 0, score_lines = 0;
  bool saw_sentences = false, saw_wps = false, saw_sync = false;
  while (std::getline(in, line)) {
    ++lines;
    auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    std::string key = line.substr(0, tab);
    CHECK(line.find('\t', tab + 1) == std::string::npos);
    if (key == "sentences") {
      saw_sentences = true;
      CHECK(line.substr(tab + 1) == std::to_string(fx.corpus.size()));
    }
    if (key == "words_per_second") saw_wps = true;
    if (key == "sync_ops") saw_sync = true;
    if (key.rfind("sentence_score.", 0) == 0) ++score_lines;
  }
  CHECK(saw_sentences);
  CHECK(saw_wps);
  CHECK(saw_sync);
  CHECK(score_lines == fx.corpus.size());

  // Scores round-trip at full precision.
  std::size_t pos = text.find("sentence_score.0\t");
  REQUIRE(pos != std::string::npos);
  double parsed = std::stod(text.substr(pos + 17));
  CHECK(parsed == report.sentence_scores[0]);

  // Without scores the per-sentence lines disappear.
  std::string brief = report.to_text(false);
  CHECK(brief.find("sentence_score.") == std::string::npos);
}
