// pbmt -- command line front end: compile tables, decode, score, benchmark
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pbmt/bench.hpp"
#include "pbmt/bleu.hpp"
#include "pbmt/driver.hpp"
#include "pbmt/oracle.hpp"
#include "pbmt/synth.hpp"
#include "pbmt/tm.hpp"

namespace {

using namespace pbmt;

std::vector<std::string> read_input_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::string line;
  if (path.empty() || path == "-") {
    while (std::getline(std::cin, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
    return lines;
  }
  std::ifstream in(path);
  if (!in) fail("cannot open ", path);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_output_lines(const std::string& path,
                        const std::vector<std::string>& lines) {
  if (path.empty() || path == "-") {
    for (const auto& l : lines) std::cout << l << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) fail("cannot open ", path, " for writing");
  for (const auto& l : lines) out << l << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail("cannot open ", path, " for writing");
  out << text;
}

// Model/search flags shared by decode and the benchmark subcommands. Each
// present flag is layered onto the config through the same key=value path
// the config file uses.
struct CommonOpts {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  void add_to(CLI::App* cmd, bool with_search) {
    cmd->add_option("--config", config_path, "decoder config file");
    auto kv = [this](const std::string& key) {
      return [this, key](const std::string& value) {
        overrides.emplace_back(key, value);
      };
    };
    cmd->add_option_function<std::string>("--table", kv("table"),
                                          "compiled rule table directory");
    cmd->add_option_function<std::string>("--lm", kv("lm"), "ARPA model file");
    cmd->add_option_function<std::string>("--weights", kv("weights"),
                                          "feature weight file");
    cmd->add_option_function<std::string>(
        "--separate-lexro", kv("separate-lexro"),
        "score reordering from this text table instead of the compiled one");
    cmd->add_option_function<std::string>("--cache-size", kv("cache-size"),
                                          "static cache entries to keep");
    if (!with_search) return;
    cmd->add_option_function<std::string>("--threads", kv("threads"),
                                          "worker threads");
    cmd->add_option_function<std::string>("--pop-limit", kv("pop-limit"),
                                          "cube pops per stack (0 = unlimited)");
    cmd->add_option_function<std::string>(
        "--distortion-limit", kv("distortion-limit"),
        "reordering window (negative = unlimited)");
    cmd->add_option_function<std::string>("--beam", kv("beam"),
                                          "per-stack size cap (0 = off)");
    cmd->add_option_function<std::string>(
        "--stack", kv("stack"),
        "stack layout: cardinality, coverage, or coverage-endpos");
    cmd->add_option_function<std::string>("--max-sentence-length",
                                          kv("max-sentence-length"),
                                          "refuse longer input lines");
  }

  DecoderConfig build() const {
    DecoderConfig config;
    if (!config_path.empty()) config = DecoderConfig::from_file(config_path);
    for (const auto& [key, value] : overrides)
      config.apply_kv(key, value, "command line");
    config.validate();
    return config;
  }
};

int cmd_compile(const std::string& phrase_table, const std::string& lexro,
                const std::string& counts, const std::string& out_dir,
                std::size_t table_limit, const std::string& codec_name,
                std::size_t cache_size, double load_factor) {
  BuildInputs inputs;
  inputs.phrase_table = phrase_table;
  inputs.lexro = lexro;
  inputs.counts = counts;
  BuildOptions options;
  options.table_limit = table_limit;
  options.codec = codec_from_name(codec_name);
  options.cache_size = cache_size;
  options.hash_load_factor = load_factor;
  BuildReport report = build_rule_table(inputs, options, out_dir);
  std::cout << report.to_text();
  return 0;
}

int cmd_decode(const CommonOpts& opts, const std::string& input_path,
               const std::string& output_path, const std::string& report_path) {
  DecoderConfig config = opts.build();
  std::vector<std::string> input = read_input_lines(input_path);
  LoadedModels models = LoadedModels::load(config);
  std::vector<std::string> output;
  RunReport report = run_corpus(models, config, input, output);
  write_output_lines(output_path, output);
  if (!report_path.empty())
    write_text(report_path, report.to_text(true));
  else
    std::cerr << report.to_text(false);
  return report.errors ? 2 : 0;
}

int cmd_oracle(const CommonOpts& opts, int distortion_limit,
               const std::string& input_path, const std::string& output_path,
               const std::string& report_path) {
  DecoderConfig config = opts.build();
  LoadedModels models = LoadedModels::load(config);
  DecodeModels view = models.view();
  std::vector<std::string> input = read_input_lines(input_path);
  std::vector<std::string> output;
  std::ostringstream report;
  report << std::setprecision(17);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    OracleResult result =
        exhaustive_decode(view, split_tokens(input[i]), distortion_limit);
    if (!result.ok) {
      ++failures;
      output.push_back("");
      report << "oracle_error." << i << "\t" << result.error << "\n";
      continue;
    }
    output.push_back(result.text);
    report << "oracle_score." << i << "\t" << result.score << "\n";
    report << "oracle_derivations." << i << "\t" << result.derivations << "\n";
  }
  write_output_lines(output_path, output);
  if (!report_path.empty())
    write_text(report_path, report.str());
  else
    std::cerr << report.str();
  return failures ? 2 : 0;
}

int cmd_bleu(const std::string& hyp_path, const std::string& ref_path) {
  BleuResult r = corpus_bleu(read_input_lines(hyp_path),
                             read_input_lines(ref_path));
  std::cout << std::setprecision(17);
  std::cout << "bleu\t" << r.bleu << "\n";
  for (int n = 0; n < 4; ++n)
    std::cout << "precision." << (n + 1) << "\t" << r.precisions[n] << "\n";
  std::cout << "brevity_penalty\t" << r.brevity_penalty << "\n";
  std::cout << "hypothesis_words\t" << r.hyp_words << "\n";
  std::cout << "reference_words\t" << r.ref_words << "\n";
  return 0;
}

int cmd_gen(const SyntheticSpec& spec, const std::string& out_dir) {
  SyntheticFiles files = generate_synthetic(spec, out_dir);
  std::cout << "phrase_table\t" << files.phrase_table << "\n";
  std::cout << "lexro\t" << files.lexro << "\n";
  std::cout << "counts\t" << files.counts << "\n";
  std::cout << "lm\t" << files.lm << "\n";
  std::cout << "corpus\t" << files.corpus << "\n";
  std::cout << "corpus_words\t" << files.corpus_words << "\n";
  return 0;
}

int cmd_bench_scaling(const CommonOpts& opts, const std::string& input_path,
                      std::vector<std::size_t> threads, std::size_t runs) {
  DecoderConfig config = opts.build();
  if (threads.empty()) {
    std::size_t cores = physical_cores();
    for (std::size_t t = 1; t <= cores; t *= 2) threads.push_back(t);
    if (threads.back() != cores) threads.push_back(cores);
  }
  std::vector<std::string> input = read_input_lines(input_path);
  LoadedModels models = LoadedModels::load(config);
  auto rows = bench_scaling(models, config, input, threads, runs);
  std::cout << std::setprecision(17);
  std::cout << "physical_cores\t" << physical_cores() << "\n";
  std::cout << "threads\tseconds\twords_per_second\toutput_hash\n";
  for (const auto& row : rows)
    std::cout << row.threads << "\t" << row.seconds << "\t"
              << row.words_per_second << "\t" << std::hex << row.output_hash
              << std::dec << "\n";
  return 0;
}

int cmd_bench_cache(const CommonOpts& opts, const std::string& input_path,
                    const std::vector<std::size_t>& sizes) {
  DecoderConfig config = opts.build();
  std::vector<std::string> input = read_input_lines(input_path);
  auto rows = bench_cache(config, input, sizes);
  std::cout << std::setprecision(17);
  std::cout << "cache_size\tcache_entries\thit_rate\tseconds\toutput_hash\n";
  for (const auto& row : rows)
    std::cout << row.cache_size << "\t" << row.cache_entries << "\t"
              << row.hit_rate << "\t" << row.seconds << "\t" << std::hex
              << row.output_hash << std::dec << "\n";
  return 0;
}

int cmd_bench_codec(const std::string& phrase_table, const std::string& lexro,
                    const std::string& counts, std::size_t table_limit,
                    const std::string& work_dir, std::size_t lookups) {
  BuildInputs inputs;
  inputs.phrase_table = phrase_table;
  inputs.lexro = lexro;
  inputs.counts = counts;
  BuildOptions options;
  options.table_limit = table_limit;
  CodecReport r = bench_codec(inputs, options, work_dir, lookups);
  std::cout << std::setprecision(17);
  std::cout << "identity_payload_bytes\t" << r.identity_payload << "\n";
  std::cout << "compressed_payload_bytes\t" << r.compressed_payload << "\n";
  std::cout << "identity_ns_per_lookup\t" << r.identity_ns_per_lookup << "\n";
  std::cout << "compressed_ns_per_lookup\t" << r.compressed_ns_per_lookup
            << "\n";
  return 0;
}

int cmd_compare(const std::string& report_a, const std::string& report_b,
                double tolerance, const std::string& text_a,
                const std::string& text_b) {
  CompareReport r = compare_runs(report_a, report_b, tolerance, text_a, text_b);
  std::cout << std::setprecision(17);
  std::cout << "scores_compared\t" << r.scores_compared << "\n";
  std::cout << "score_mismatches\t" << r.score_mismatches << "\n";
  std::cout << "max_abs_diff\t" << r.max_abs_diff << "\n";
  std::cout << "text_lines_compared\t" << r.text_lines_compared << "\n";
  std::cout << "text_mismatches\t" << r.text_mismatches << "\n";
  return (r.score_mismatches || r.text_mismatches) ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phrase-based translation toolkit"};
  app.require_subcommand(1);

  // compile
  auto* compile = app.add_subcommand("compile", "build a binary rule table");
  std::string c_pt, c_lexro, c_counts, c_out, c_codec = "identity";
  std::size_t c_limit = 100, c_cache = 0;
  double c_load = 0.5;
  compile->add_option("--phrase-table", c_pt, "text rules")->required();
  compile->add_option("--lexro", c_lexro, "text reordering table");
  compile->add_option("--counts", c_counts, "source phrase counts");
  compile->add_option("--out", c_out, "output directory")->required();
  compile->add_option("--table-limit", c_limit, "rules kept per source");
  compile->add_option("--codec", c_codec, "identity or compressed");
  compile->add_option("--cache-size", c_cache, "static cache entries");
  compile->add_option("--load-factor", c_load, "hash table load factor");

  // decode
  auto* decode = app.add_subcommand("decode", "translate a corpus");
  CommonOpts d_opts;
  d_opts.add_to(decode, true);
  std::string d_in = "-", d_out = "-", d_report;
  decode->add_option("--input", d_in, "source file (- = stdin)");
  decode->add_option("--output", d_out, "translation file (- = stdout)");
  decode->add_option("--report", d_report,
                     "write the run report (with sentence scores) here");

  // oracle
  auto* oracle = app.add_subcommand(
      "oracle", "exhaustive search over short sentences");
  CommonOpts o_opts;
  o_opts.add_to(oracle, false);
  int o_dist = 6;
  std::string o_in = "-", o_out = "-", o_report;
  oracle->add_option("--distortion-limit", o_dist,
                     "reordering window (negative = unlimited)");
  oracle->add_option("--input", o_in, "source file (- = stdin)");
  oracle->add_option("--output", o_out, "translation file (- = stdout)");
  oracle->add_option("--report", o_report, "write per-sentence scores here");

  // bleu
  auto* bleu = app.add_subcommand("bleu", "corpus BLEU");
  std::string b_hyp, b_ref;
  bleu->add_option("--hypotheses", b_hyp, "candidate translations")->required();
  bleu->add_option("--references", b_ref, "reference translations")->required();

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic language pair");
  SyntheticSpec spec;
  std::string g_out;
  gen->add_option("--out", g_out, "output directory")->required();
  gen->add_option("--seed", spec.seed, "RNG seed");
  gen->add_option("--sentences", spec.sentences, "corpus size");
  gen->add_option("--avg-len", spec.avg_len, "mean sentence length");
  gen->add_option("--len-stddev", spec.len_stddev, "length spread");
  gen->add_option("--min-len", spec.min_len, "shortest sentence");
  gen->add_option("--max-len", spec.max_len, "longest sentence");
  gen->add_option("--oov-rate", spec.oov_rate, "out-of-vocabulary fraction");
  gen->add_option("--source-vocab", spec.source_vocab, "source token count");
  gen->add_option("--target-vocab", spec.target_vocab, "target token count");
  gen->add_option("--bigram-sources", spec.bigram_sources,
                  "two-word source phrases");
  gen->add_option("--rules-per-source", spec.rules_per_source,
                  "translations per source phrase");
  gen->add_option("--max-target-len", spec.max_target_len,
                  "longest target phrase");
  gen->add_option("--target-pool", spec.target_pool,
                  "restrict targets to this many tokens (0 = full vocab)");
  gen->add_option("--lexro-fraction", spec.lexro_fraction,
                  "chance a rule gets a reordering row");
  gen->add_option("--lm-bigrams", spec.lm_bigrams, "bigrams in the model");

  // bench-scaling
  auto* bscale = app.add_subcommand("bench-scaling",
                                    "throughput across thread counts");
  CommonOpts s_opts;
  s_opts.add_to(bscale, true);
  std::string s_in = "-";
  std::vector<std::size_t> s_threads;
  std::size_t s_runs = 3;
  bscale->add_option("--input", s_in, "source file (- = stdin)");
  bscale->add_option("--thread-counts", s_threads,
                     "thread counts to measure (default: powers of two up to "
                     "the physical cores)");
  bscale->add_option("--runs", s_runs, "timed runs per point (median wins)");

  // bench-cache
  auto* bcache = app.add_subcommand("bench-cache",
                                    "hit rates across static cache sizes");
  CommonOpts cc_opts;
  cc_opts.add_to(bcache, true);
  std::string cc_in = "-";
  std::vector<std::size_t> cc_sizes = {0, 1000, 2000, 4000, 10000};
  bcache->add_option("--input", cc_in, "source file (- = stdin)");
  bcache->add_option("--sizes", cc_sizes, "cache sizes to measure");

  // bench-codec
  auto* bcodec = app.add_subcommand(
      "bench-codec", "payload size and decode cost for both codecs");
  std::string bc_pt, bc_lexro, bc_counts, bc_work;
  std::size_t bc_limit = 100, bc_lookups = 100000;
  bcodec->add_option("--phrase-table", bc_pt, "text rules")->required();
  bcodec->add_option("--lexro", bc_lexro, "text reordering table");
  bcodec->add_option("--counts", bc_counts, "source phrase counts");
  bcodec->add_option("--table-limit", bc_limit, "rules kept per source");
  bcodec->add_option("--work", bc_work, "scratch directory")->required();
  bcodec->add_option("--lookups", bc_lookups, "probes per codec");

  // compare
  auto* compare = app.add_subcommand("compare",
                                     "diff two run reports (and translations)");
  std::string cp_a, cp_b, cp_ta, cp_tb;
  double cp_tol = 0;
  compare->add_option("--report-a", cp_a, "first run report")->required();
  compare->add_option("--report-b", cp_b, "second run report")->required();
  compare->add_option("--tolerance", cp_tol, "allowed |score difference|");
  compare->add_option("--text-a", cp_ta, "first translation file");
  compare->add_option("--text-b", cp_tb, "second translation file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compile->parsed())
      return cmd_compile(c_pt, c_lexro, c_counts, c_out, c_limit, c_codec,
                         c_cache, c_load);
    if (decode->parsed()) return cmd_decode(d_opts, d_in, d_out, d_report);
    if (oracle->parsed())
      return cmd_oracle(o_opts, o_dist, o_in, o_out, o_report);
    if (bleu->parsed()) return cmd_bleu(b_hyp, b_ref);
    if (gen->parsed()) return cmd_gen(spec, g_out);
    if (bscale->parsed())
      return cmd_bench_scaling(s_opts, s_in, s_threads, s_runs);
    if (bcache->parsed()) return cmd_bench_cache(cc_opts, cc_in, cc_sizes);
    if (bcodec->parsed())
      return cmd_bench_codec(bc_pt, bc_lexro, bc_counts, bc_limit, bc_work,
                             bc_lookups);
    if (compare->parsed())
      return cmd_compare(cp_a, cp_b, cp_tol, cp_ta, cp_tb);
  } catch (const std::exception& e) {
    std::cerr << "pbmt: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
