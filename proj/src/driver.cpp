#include "pbmt/driver.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

namespace pbmt {
namespace {

std::size_t parse_size(const std::string& value, const std::string& where) {
  return static_cast<std::size_t>(parse_u64(value, where, 0));
}

}  // namespace

void DecoderConfig::apply_kv(const std::string& key, const std::string& value,
                             const std::string& where) {
  if (key == "table")
    table_dir = value;
  else if (key == "lm")
    lm_path = value;
  else if (key == "weights")
    weights_path = value;
  else if (key == "separate-lexro")
    separate_lexro_path = value;
  else if (key == "cache-size")
    cache_size = parse_size(value, where);
  else if (key == "threads")
    threads = parse_size(value, where);
  else if (key == "pop-limit") {
    search.pop_limit = parse_size(value, where);
    if (search.pop_limit == 0) search.pop_limit = SearchParams::kUnlimitedPops;
  }
  else if (key == "distortion-limit")
    search.distortion_limit = static_cast<int>(parse_double(value, where, 0));
  else if (key == "beam")
    search.beam_size = parse_size(value, where);
  else if (key == "stack")
    search.stack = stack_config_from_name(value);
  else if (key == "max-sentence-length")
    search.max_sentence_length = parse_size(value, where);
  else
    fail(where, ": unknown configuration key '", key, "'");
}

DecoderConfig DecoderConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: ", path);
  DecoderConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    auto hash = view.find('#');
    if (hash != std::string_view::npos) view = view.substr(0, hash);
    auto tokens = split_tokens(view);
    if (tokens.empty()) continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos)
      fail(path, " line ", line_no, ": expected 'key = value'");
    auto key = split_tokens(view.substr(0, eq));
    auto value = split_tokens(view.substr(eq + 1));
    if (key.size() != 1 || value.empty())
      fail(path, " line ", line_no, ": expected 'key = value'");
    std::string joined = join_tokens(value);
    std::ostringstream where;
    where << path << " line " << line_no;
    config.apply_kv(key[0], joined, where.str());
  }
  return config;
}

void DecoderConfig::validate() const {
  if (table_dir.empty()) fail("no rule table configured");
  if (lm_path.empty()) fail("no language model configured");
  if (weights_path.empty()) fail("no weights configured");
  if (threads == 0) fail("threads must be positive");
  if (search.pop_limit == 0) fail("pop limit must be positive");
}

LoadedModels LoadedModels::load(const DecoderConfig& config) {
  config.validate();
  std::uint64_t t0 = now_ns();
  OpenOptions open;
  open.cache_size = config.cache_size;
  LoadedModels m{RuleTable::open(config.table_dir, open),
                 NGramModel::load_arpa(config.lm_path),
                 WeightVector::load(config.weights_path),
                 std::nullopt,
                 {},
                 0.0};
  if (!config.separate_lexro_path.empty())
    m.separate_lexro = LexroTable::load(config.separate_lexro_path);
  m.tm_to_lm = build_lm_word_map(m.table, m.lm);
  m.load_seconds = static_cast<double>(now_ns() - t0) / 1e9;
  return m;
}

DecodeModels LoadedModels::view() const {
  DecodeModels v;
  v.table = &table;
  v.lm = &lm;
  v.weights = &weights;
  v.separate_lexro = separate_lexro ? &*separate_lexro : nullptr;
  v.tm_to_lm = &tm_to_lm;
  return v;
}

RunReport run_corpus(const LoadedModels& models, const DecoderConfig& config,
                     const std::vector<std::string>& input,
                     std::vector<std::string>& output) {
  const std::size_t n = input.size();
  const std::size_t thread_count = std::max<std::size_t>(1, config.threads);

  RunReport report;
  report.threads = thread_count;
  report.sentences = n;
  report.load_seconds = models.load_seconds;
  report.sentence_scores.assign(n, 0.0);
  output.assign(n, std::string());

  struct WorkerOut {
    SearchTimers timers;
    RuleTableStats table_stats;
    std::uint64_t busy_ns = 0;
    std::uint64_t sync_ops = 0;
    std::uint64_t pops = 0, created = 0, recombined = 0, oov = 0;
    std::size_t words = 0, partials = 0;
    std::uint64_t resets = 0;
    std::uint64_t capacity = 0;
    std::uint64_t max_sentence_bytes = 0;
    std::vector<std::pair<std::size_t, std::string>> errors;
  };
  std::vector<WorkerOut> outs(thread_count);

  std::atomic<std::size_t> cursor{0};
  const DecodeModels view = models.view();
  const SearchParams params = config.search;

  auto worker = [&](std::size_t widx) {
    WorkerOut& out = outs[widx];
    SearchContext ctx;
    for (;;) {
      std::size_t i = cursor.fetch_add(1, std::memory_order_relaxed);
      ++out.sync_ops;
      if (i >= n) break;
      std::uint64_t t0 = now_ns();
      auto tokens = split_tokens(input[i]);
      out.words += tokens.size();
      DecodeResult res = decode(view, tokens, params, ctx);
      std::uint64_t m0 = now_ns();
      ctx.reset_sentence();
      ctx.timers.memory_ns += now_ns() - m0;
      out.busy_ns += now_ns() - t0;
      if (!res.ok) {
        out.errors.emplace_back(i, res.error);
      } else {
        output[i] = std::move(res.text);
        report.sentence_scores[i] = res.score;
        out.partials += res.stats.partial ? 1 : 0;
      }
      out.pops += res.stats.pops;
      out.created += res.stats.created;
      out.recombined += res.stats.recombined;
      out.oov += res.stats.oov;
    }
    out.timers = ctx.timers;
    out.table_stats = ctx.table_stats;
    out.resets = ctx.sentences;
    out.capacity = ctx.ephemeral_stats().total_capacity;
    out.max_sentence_bytes = ctx.max_sentence_bytes;
  };

  std::uint64_t t0 = now_ns();
  if (thread_count == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(thread_count);
    for (std::size_t w = 0; w < thread_count; ++w)
      threads.emplace_back(worker, w);
    for (auto& t : threads) t.join();
  }
  report.decode_seconds = static_cast<double>(now_ns() - t0) / 1e9;

  SearchTimers timers;
  std::uint64_t busy_ns = 0;
  for (const auto& out : outs) {
    timers += out.timers;
    report.table_stats += out.table_stats;
    busy_ns += out.busy_ns;
    report.sync_ops += out.sync_ops;
    report.pops += out.pops;
    report.hypotheses_created += out.created;
    report.recombined += out.recombined;
    report.oov_tokens += out.oov;
    report.source_words += out.words;
    report.partials += out.partials;
    report.pool_resets += out.resets;
    report.pool_capacity_bytes += out.capacity;
    report.pool_max_sentence_bytes =
        std::max(report.pool_max_sentence_bytes, out.max_sentence_bytes);
    for (auto& e : out.errors) report.sentence_errors.push_back(e);
  }
  std::sort(report.sentence_errors.begin(), report.sentence_errors.end());
  report.errors = report.sentence_errors.size();

  if (report.decode_seconds > 0)
    report.words_per_second =
        static_cast<double>(report.source_words) / report.decode_seconds;
  if (report.table_stats.lookups > 0)
    report.cache_hit_rate = static_cast<double>(report.table_stats.cache_hits) /
                            static_cast<double>(report.table_stats.lookups);

  // Phase split over the total budget (threads x wall). Search is worker
  // busy time not attributed to a model phase; misc is scheduling slack.
  double budget = report.decode_seconds * static_cast<double>(thread_count) * 1e9;
  if (budget > 0) {
    double model_ns = static_cast<double>(timers.table_ns + timers.lm_ns +
                                          timers.lexro_ns + timers.memory_ns);
    double search_ns = std::max(0.0, static_cast<double>(busy_ns) - model_ns);
    double misc_ns = std::max(0.0, budget - static_cast<double>(busy_ns));
    auto pct = [&](double ns) { return 100.0 * ns / budget; };
    report.phases.memory = pct(static_cast<double>(timers.memory_ns));
    report.phases.lm = pct(static_cast<double>(timers.lm_ns));
    report.phases.phrase_table = pct(static_cast<double>(timers.table_ns));
    report.phases.lexro = pct(static_cast<double>(timers.lexro_ns));
    report.phases.search = pct(search_ns);
    report.phases.misc = pct(misc_ns);
  }
  return report;
}

std::string RunReport::to_text(bool with_scores) const {
  std::ostringstream os;
  os.precision(17);
  os << "sentences\t" << sentences << '\n'
     << "source_words\t" << source_words << '\n'
     << "errors\t" << errors << '\n'
     << "partials\t" << partials << '\n'
     << "oov_tokens\t" << oov_tokens << '\n'
     << "threads\t" << threads << '\n'
     << "load_seconds\t" << load_seconds << '\n'
     << "decode_seconds\t" << decode_seconds << '\n'
     << "words_per_second\t" << words_per_second << '\n'
     << "phase_memory_pct\t" << phases.memory << '\n'
     << "phase_lm_pct\t" << phases.lm << '\n'
     << "phase_phrase_table_pct\t" << phases.phrase_table << '\n'
     << "phase_lexro_pct\t" << phases.lexro << '\n'
     << "phase_search_pct\t" << phases.search << '\n'
     << "phase_misc_pct\t" << phases.misc << '\n'
     << "table_lookups\t" << table_stats.lookups << '\n'
     << "table_cache_hits\t" << table_stats.cache_hits << '\n'
     << "table_payload_decodes\t" << table_stats.payload_decodes << '\n'
     << "table_misses\t" << table_stats.misses << '\n'
     << "cache_hit_rate\t" << cache_hit_rate << '\n'
     << "pops\t" << pops << '\n'
     << "hypotheses_created\t" << hypotheses_created << '\n'
     << "recombined\t" << recombined << '\n'
     << "pool_resets\t" << pool_resets << '\n'
     << "pool_capacity_bytes\t" << pool_capacity_bytes << '\n'
     << "pool_max_sentence_bytes\t" << pool_max_sentence_bytes << '\n'
     << "sync_ops\t" << sync_ops << '\n';
  if (sentences > 0)
    os << "sync_ops_per_sentence\t"
       << static_cast<double>(sync_ops) / static_cast<double>(sentences) << '\n';
  if (with_scores) {
    for (std::size_t i = 0; i < sentence_scores.size(); ++i)
      os << "sentence_score." << i << '\t' << sentence_scores[i] << '\n';
    for (const auto& [idx, msg] : sentence_errors)
      os << "error." << idx << '\t' << msg << '\n';
  }
  return os.str();
}

RunReport run_pipeline(const DecoderConfig& config, std::istream& in,
                       std::ostream& out) {
  LoadedModels models = LoadedModels::load(config);
  std::vector<std::string> input;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    input.push_back(line);
  }
  std::vector<std::string> output;
  RunReport report = run_corpus(models, config, input, output);
  for (const auto& text : output) out << text << '\n';
  return report;
}

}  // namespace pbmt
