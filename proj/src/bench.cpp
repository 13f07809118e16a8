#include "pbmt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <thread>

#include "pbmt/common.hpp"

namespace pbmt {

std::size_t physical_cores() {
  std::set<std::pair<int, int>> cores;
  for (int cpu = 0;; ++cpu) {
    std::string base =
        "/sys/devices/system/cpu/cpu" + std::to_string(cpu) + "/topology/";
    std::ifstream pkg(base + "physical_package_id");
    std::ifstream core(base + "core_id");
    int p = 0, c = 0;
    if (!(pkg >> p) || !(core >> c)) break;
    cores.emplace(p, c);
  }
  if (!cores.empty()) return cores.size();
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

std::uint64_t hash_lines(const std::vector<std::string>& lines) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* data, std::size_t len) {
    h = fnv1a({reinterpret_cast<const std::uint8_t*>(data), len}) ^ (h * 1099511628211ull);
  };
  for (const std::string& line : lines) {
    mix(line.data(), line.size());
    mix("\n", 1);
  }
  return h;
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n == 0) return 0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<ScalingRow> bench_scaling(const LoadedModels& models,
                                      const DecoderConfig& base,
                                      const std::vector<std::string>& input,
                                      const std::vector<std::size_t>& threads,
                                      std::size_t runs) {
  if (runs == 0) runs = 1;
  std::vector<ScalingRow> rows;
  for (std::size_t t : threads) {
    DecoderConfig config = base;
    config.threads = t ? t : 1;
    std::vector<std::string> output;
    run_corpus(models, config, input, output);  // warm-up
    std::vector<double> seconds;
    std::size_t words = 0;
    std::uint64_t hash = 0;
    for (std::size_t r = 0; r < runs; ++r) {
      output.clear();
      RunReport report = run_corpus(models, config, input, output);
      seconds.push_back(report.decode_seconds);
      words = report.source_words;
      std::uint64_t h = hash_lines(output);
      if (r > 0 && h != hash)
        fail("thread count " + std::to_string(t) + ": outputs differ between runs");
      hash = h;
    }
    ScalingRow row;
    row.threads = config.threads;
    row.seconds = median(seconds);
    row.words_per_second = row.seconds > 0 ? double(words) / row.seconds : 0;
    row.output_hash = hash;
    rows.push_back(row);
  }
  return rows;
}

std::vector<CacheRow> bench_cache(const DecoderConfig& base,
                                  const std::vector<std::string>& input,
                                  const std::vector<std::size_t>& sizes) {
  std::vector<CacheRow> rows;
  for (std::size_t size : sizes) {
    DecoderConfig config = base;
    config.cache_size = size;
    LoadedModels models = LoadedModels::load(config);
    std::vector<std::string> output;
    RunReport report = run_corpus(models, config, input, output);
    CacheRow row;
    row.cache_size = size;
    row.cache_entries = models.table.cache_entry_count();
    row.hit_rate = report.cache_hit_rate;
    row.seconds = report.decode_seconds;
    row.output_hash = hash_lines(output);
    rows.push_back(row);
  }
  return rows;
}

namespace {

// Source sides of the text phrase table, deduplicated, resolved against the
// binary table's vocabulary. Phrases the compiler pruned entirely never
// existed, so every listed phrase resolves.
std::vector<std::vector<WordId>> source_phrases(const std::string& text_path,
                                                const RuleTable& table) {
  std::ifstream in(text_path);
  if (!in) fail("cannot open " + text_path);
  std::set<std::vector<WordId>> unique;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_bar_fields(line);
    if (fields.empty()) continue;
    std::vector<WordId> ids;
    bool ok = true;
    for (const std::string& tok : split_tokens(fields[0])) {
      auto id = table.find_token(tok);
      if (!id) {
        ok = false;
        break;
      }
      ids.push_back(*id);
    }
    if (ok && !ids.empty()) unique.insert(std::move(ids));
  }
  return {unique.begin(), unique.end()};
}

double timed_lookups(const RuleTable& table,
                     const std::vector<std::vector<WordId>>& phrases,
                     std::size_t lookups) {
  TargetPhraseCollection scratch;
  RuleTableStats stats;
  std::vector<double> batch_ns;
  const std::size_t batches = 5;
  std::size_t per_batch = lookups / batches ? lookups / batches : 1;
  std::size_t cursor = 0;
  std::uint64_t sink = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    std::uint64_t start = now_ns();
    for (std::size_t i = 0; i < per_batch; ++i) {
      const auto& key = phrases[cursor];
      cursor = cursor + 1 == phrases.size() ? 0 : cursor + 1;
      const TargetPhraseCollection* hit =
          table.lookup(std::span<const WordId>(key), scratch, stats);
      if (hit) sink += hit->rules.size();
    }
    batch_ns.push_back(double(now_ns() - start) / double(per_batch));
  }
  if (sink == 0 && stats.lookups > 0 && stats.misses == stats.lookups)
    fail("codec benchmark: every lookup missed");
  return median(batch_ns);
}

}  // namespace

CodecReport bench_codec(const BuildInputs& inputs, const BuildOptions& base,
                        const std::string& work_dir, std::size_t lookups) {
  namespace fs = std::filesystem;
  CodecReport report;
  std::string dirs[2] = {work_dir + "/identity", work_dir + "/compressed"};
  Codec codecs[2] = {Codec::kIdentity, Codec::kCompressed};
  double* times[2] = {&report.identity_ns_per_lookup,
                      &report.compressed_ns_per_lookup};
  std::uint64_t* sizes[2] = {&report.identity_payload,
                             &report.compressed_payload};
  for (int i = 0; i < 2; ++i) {
    fs::create_directories(dirs[i]);
    BuildOptions options = base;
    options.codec = codecs[i];
    options.cache_size = 0;  // time the decode path, not the cache
    BuildReport built = build_rule_table(inputs, options, dirs[i]);
    *sizes[i] = built.payload_bytes;
    RuleTable table = RuleTable::open(dirs[i]);
    auto phrases = source_phrases(inputs.phrase_table, table);
    if (phrases.empty()) fail("codec benchmark: no source phrases to probe");
    *times[i] = timed_lookups(table, phrases, lookups);
  }
  return report;
}

namespace {

// sentence_score.<i><TAB><value> lines from a run report file.
std::vector<std::pair<std::size_t, double>> read_scores(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::vector<std::pair<std::size_t, double>> scores;
  std::string line;
  std::size_t lineno = 0;
  const std::string prefix = "sentence_score.";
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind(prefix, 0) != 0) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab <= prefix.size())
      fail(path + ": malformed score line " + std::to_string(lineno));
    std::size_t index =
        parse_u64(line.substr(prefix.size(), tab - prefix.size()),
                  "sentence index", lineno);
    double value = parse_double(line.substr(tab + 1), "sentence score", lineno);
    scores.emplace_back(index, value);
  }
  std::sort(scores.begin(), scores.end());
  return scores;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

CompareReport compare_runs(const std::string& report_a,
                           const std::string& report_b, double tolerance,
                           const std::string& text_a,
                           const std::string& text_b) {
  CompareReport out;
  auto a = read_scores(report_a);
  auto b = read_scores(report_b);
  if (a.size() != b.size())
    fail("score counts differ: " + std::to_string(a.size()) + " vs " +
         std::to_string(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].first != b[i].first)
      fail("sentence indices differ at position " + std::to_string(i));
    ++out.scores_compared;
    double diff = std::fabs(a[i].second - b[i].second);
    out.max_abs_diff = std::max(out.max_abs_diff, diff);
    if (!(diff <= tolerance)) ++out.score_mismatches;
  }
  if (!text_a.empty() || !text_b.empty()) {
    if (text_a.empty() || text_b.empty())
      fail("compare needs both translation files or neither");
    auto la = read_lines(text_a);
    auto lb = read_lines(text_b);
    if (la.size() != lb.size())
      fail("line counts differ: " + std::to_string(la.size()) + " vs " +
           std::to_string(lb.size()));
    out.text_lines_compared = la.size();
    for (std::size_t i = 0; i < la.size(); ++i)
      if (la[i] != lb[i]) ++out.text_mismatches;
  }
  return out;
}

}  // namespace pbmt
