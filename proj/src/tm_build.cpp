#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "pbmt/features.hpp"
#include "pbmt/tm.hpp"
#include "tm_format.hpp"

namespace pbmt {
namespace {

struct VecHash {
  std::size_t operator()(const std::vector<WordId>& v) const {
    return murmur64(v.data(), v.size() * sizeof(WordId), 0x51ed270b);
  }
};

struct BuildRule {
  std::vector<WordId> target;
  std::string target_text;
  std::array<float, kTmScoreCount> tm{};
  std::array<double, kTmScoreCount> tm_ln{};
  std::array<float, kLexroScoreCount> lexro{};
  std::array<double, kLexroScoreCount> lexro_ln{};
  double mass = 0;  // p(target|source) as parsed
};

struct BuildGroup {
  std::vector<WordId> source;
  std::string source_text;
  std::vector<BuildRule> rules;
  double count = 0;
};

struct LexroEntry {
  std::array<float, kLexroScoreCount> scores{};
  std::array<double, kLexroScoreCount> logs{};
};

double floor_prob(double p, const std::string& file, std::size_t line_no) {
  if (p < 0.0) fail(file, " line ", line_no, ": negative probability ", p);
  return p > 0.0 ? p : kTmFloorProb;
}

void append_checksum(Bytes& bytes) {
  put_u64(bytes, fnv1a(bytes));
}

}  // namespace

std::string BuildReport::to_text() const {
  std::ostringstream os;
  os << "rules_read\t" << rules_read << '\n'
     << "rules_kept\t" << rules_kept << '\n'
     << "rules_pruned\t" << rules_pruned << '\n'
     << "source_phrases\t" << source_phrases << '\n'
     << "max_source_len\t" << max_source_len << '\n'
     << "lexro_entries\t" << lexro_entries << '\n'
     << "lexro_missing\t" << lexro_missing << '\n'
     << "cache_entries\t" << cache_entries << '\n'
     << "counts_missing\t" << (counts_missing ? 1 : 0) << '\n'
     << "fingerprint_collisions\t" << fingerprint_collisions << '\n'
     << "spill_entries\t" << spill_entries << '\n'
     << "max_quantization_error\t" << max_quantization_error << '\n'
     << "payload_bytes\t" << payload_bytes << '\n'
     << "index_slots\t" << index_slots << '\n';
  return os.str();
}

BuildReport build_rule_table(const BuildInputs& inputs, const BuildOptions& options,
                             const std::string& out_dir) {
  if (options.table_limit == 0) fail("table limit must be positive");
  if (options.hash_load_factor <= 0.0 || options.hash_load_factor > 0.95)
    fail("hash load factor must be in (0, 0.95]");

  BuildReport report;
  double max_qerr = 0.0;
  auto track = [&](double ln, float f) {
    max_qerr = std::max(max_qerr, std::fabs(ln - static_cast<double>(f)));
  };

  // Reordering distributions keyed by surface phrase pair.
  std::unordered_map<std::string, LexroEntry> lexro;
  if (!inputs.lexro.empty()) {
    std::ifstream in(inputs.lexro);
    if (!in) fail("cannot open reordering table: ", inputs.lexro);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto fields = split_bar_fields(line);
      if (fields.size() != 3)
        fail(inputs.lexro, " line ", line_no, ": expected 3 fields, got ",
             fields.size());
      auto probs = split_tokens(fields[2]);
      if (probs.size() != kLexroScoreCount)
        fail(inputs.lexro, " line ", line_no, ": expected ", kLexroScoreCount,
             " probabilities, got ", probs.size());
      LexroEntry e;
      for (std::size_t i = 0; i < kLexroScoreCount; ++i) {
        double p = floor_prob(
            parse_double(probs[i], "reordering probability", line_no),
            inputs.lexro, line_no);
        e.logs[i] = std::log(p);
        e.scores[i] = log_prob_f32(p);
      }
      std::string key = join_tokens(split_tokens(fields[0])) + " ||| " +
                        join_tokens(split_tokens(fields[1]));
      lexro[std::move(key)] = e;
    }
    report.lexro_entries = lexro.size();
  }

  // Phrase pairs, grouped by source.
  std::unordered_map<std::string, WordId> vocab;
  std::vector<std::string> tokens;
  auto intern = [&](const std::string& t) {
    auto it = vocab.find(t);
    if (it != vocab.end()) return it->second;
    WordId id = static_cast<WordId>(tokens.size());
    tokens.push_back(t);
    vocab.emplace(t, id);
    return id;
  };

  std::unordered_map<std::vector<WordId>, BuildGroup, VecHash> groups;
  {
    std::ifstream in(inputs.phrase_table);
    if (!in) fail("cannot open phrase table: ", inputs.phrase_table);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto fields = split_bar_fields(line);
      if (fields.size() != 3)
        fail(inputs.phrase_table, " line ", line_no, ": expected 3 fields, got ",
             fields.size());
      auto src_tokens = split_tokens(fields[0]);
      auto tgt_tokens = split_tokens(fields[1]);
      if (src_tokens.empty() || tgt_tokens.empty())
        fail(inputs.phrase_table, " line ", line_no, ": empty phrase");
      auto probs = split_tokens(fields[2]);
      if (probs.size() != kTmScoreCount)
        fail(inputs.phrase_table, " line ", line_no, ": expected ",
             kTmScoreCount, " scores, got ", probs.size());
      // Text column order: p(s|t) lex(s|t) p(t|s) lex(t|s).
      double col[kTmScoreCount];
      for (std::size_t i = 0; i < kTmScoreCount; ++i)
        col[i] = floor_prob(parse_double(probs[i], "translation score", line_no),
                            inputs.phrase_table, line_no);

      BuildRule rule;
      rule.target.reserve(tgt_tokens.size());
      for (const auto& t : tgt_tokens) rule.target.push_back(intern(t));
      rule.target_text = join_tokens(tgt_tokens);
      rule.mass = col[2];
      const double ordered[kTmScoreCount] = {col[2], col[0], col[3], col[1]};
      for (std::size_t i = 0; i < kTmScoreCount; ++i) {
        rule.tm_ln[i] = std::log(ordered[i]);
        rule.tm[i] = log_prob_f32(ordered[i]);
      }

      std::vector<WordId> src_ids;
      src_ids.reserve(src_tokens.size());
      for (const auto& t : src_tokens) src_ids.push_back(intern(t));
      auto [it, fresh] = groups.try_emplace(src_ids);
      if (fresh) {
        it->second.source = src_ids;
        it->second.source_text = join_tokens(src_tokens);
      }
      it->second.rules.push_back(std::move(rule));
      ++report.rules_read;
    }
  }

  // Prune each group, then attach reordering scores to the survivors.
  for (auto& [key, group] : groups) {
    std::sort(group.rules.begin(), group.rules.end(),
              [](const BuildRule& a, const BuildRule& b) {
                if (a.tm[kTmTgtGivenSrc] != b.tm[kTmTgtGivenSrc])
                  return a.tm[kTmTgtGivenSrc] > b.tm[kTmTgtGivenSrc];
                return a.target < b.target;
              });
    for (std::size_t i = 1; i < group.rules.size(); ++i)
      if (group.rules[i].target == group.rules[i - 1].target)
        fail(inputs.phrase_table, ": duplicate rule '", group.source_text,
             " ||| ", group.rules[i].target_text, "'");
    if (group.rules.size() > options.table_limit) {
      report.rules_pruned += group.rules.size() - options.table_limit;
      group.rules.resize(options.table_limit);
    }
    for (auto& rule : group.rules) {
      auto it = lexro.find(group.source_text + " ||| " + rule.target_text);
      if (it == lexro.end()) {
        rule.lexro = uniform_lexro();
        rule.lexro_ln.fill(std::log(1.0 / 3.0));
        ++report.lexro_missing;
      } else {
        rule.lexro = it->second.scores;
        rule.lexro_ln = it->second.logs;
      }
      for (std::size_t i = 0; i < kTmScoreCount; ++i)
        track(rule.tm_ln[i], rule.tm[i]);
      for (std::size_t i = 0; i < kLexroScoreCount; ++i)
        track(rule.lexro_ln[i], rule.lexro[i]);
      report.rules_kept += 1;
    }
  }

  // Cache ranking keys: explicit counts, or kept translation mass when the
  // counts file is absent.
  if (!inputs.counts.empty()) {
    std::unordered_map<std::string, double> counts;
    std::ifstream in(inputs.counts);
    if (!in) fail("cannot open counts file: ", inputs.counts);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      auto fields = split_bar_fields(line);
      if (fields.size() != 2)
        fail(inputs.counts, " line ", line_no, ": expected 2 fields, got ",
             fields.size());
      counts[join_tokens(split_tokens(fields[0]))] =
          parse_double(fields[1], "count", line_no);
    }
    for (auto& [key, group] : groups) {
      auto it = counts.find(group.source_text);
      group.count = it == counts.end() ? 0.0 : it->second;
    }
  } else {
    report.counts_missing = true;
    for (auto& [key, group] : groups)
      for (const auto& rule : group.rules) group.count += rule.mass;
  }

  // Deterministic base order for payload and index construction.
  std::vector<const BuildGroup*> order;
  order.reserve(groups.size());
  for (const auto& [key, group] : groups) order.push_back(&group);
  std::sort(order.begin(), order.end(),
            [](const BuildGroup* a, const BuildGroup* b) {
              return a->source < b->source;
            });

  report.source_phrases = order.size();
  for (const auto* g : order)
    report.max_source_len = std::max(report.max_source_len, g->source.size());

  // Payload records.
  Bytes payload;
  std::vector<std::uint64_t> offsets(order.size());
  std::vector<std::uint32_t> lengths(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    TargetPhraseCollection collection;
    collection.rules.reserve(order[i]->rules.size());
    for (const auto& rule : order[i]->rules) {
      TranslationRule r;
      r.target = rule.target;
      r.tm_scores = rule.tm;
      r.lexro_scores = rule.lexro;
      collection.rules.push_back(std::move(r));
    }
    Bytes record = encode_targets(collection, options.codec);
    offsets[i] = payload.size();
    lengths[i] = static_cast<std::uint32_t>(record.size());
    payload.insert(payload.end(), record.begin(), record.end());
  }

  // Fingerprints; genuine collisions divert to the exact-key spill table.
  std::vector<std::uint64_t> fps(order.size());
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_fp;
  for (std::size_t i = 0; i < order.size(); ++i) {
    fps[i] = murmur64(order[i]->source.data(),
                      order[i]->source.size() * sizeof(WordId),
                      tmfmt::kFingerprintSeed);
    by_fp[fps[i]].push_back(i);
  }
  std::vector<bool> spilled(order.size(), false);
  for (const auto& [fp, members] : by_fp)
    if (members.size() > 1) {
      report.fingerprint_collisions += members.size() - 1;
      for (std::size_t i : members) spilled[i] = true;
    }

  // Linear-probing index, inserted in base order.
  std::uint64_t slot_count = 16;
  while (slot_count * options.hash_load_factor <
         static_cast<double>(order.size()))
    slot_count *= 2;
  struct Slot {
    std::uint64_t fp = 0, offset = 0;
    std::uint32_t len = 0, flags = 0;
  };
  std::vector<Slot> slots(slot_count);
  std::uint64_t mask = slot_count - 1;
  std::unordered_map<std::uint64_t, bool> fp_inserted;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (spilled[i]) {
      if (fp_inserted.count(fps[i])) continue;
      fp_inserted[fps[i]] = true;
    }
    std::uint64_t at = fps[i] & mask;
    while (slots[at].flags & tmfmt::kSlotUsed) at = (at + 1) & mask;
    slots[at].fp = fps[i];
    slots[at].flags = tmfmt::kSlotUsed;
    if (spilled[i]) {
      slots[at].flags |= tmfmt::kSlotSpill;
    } else {
      slots[at].offset = offsets[i];
      slots[at].len = lengths[i];
    }
  }

  // Static cache manifest: most frequent sources first.
  std::vector<std::size_t> by_count(order.size());
  for (std::size_t i = 0; i < by_count.size(); ++i) by_count[i] = i;
  std::sort(by_count.begin(), by_count.end(), [&](std::size_t a, std::size_t b) {
    if (order[a]->count != order[b]->count)
      return order[a]->count > order[b]->count;
    return order[a]->source < order[b]->source;
  });
  by_count.resize(std::min(options.cache_size, by_count.size()));
  report.cache_entries = by_count.size();

  // Serialize.
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto path = [&](const char* file) { return (fs::path(out_dir) / file).string(); };

  Bytes index;
  index.insert(index.end(), tmfmt::kMagic, tmfmt::kMagic + 4);
  put_u32(index, tmfmt::kVersion);
  put_u32(index, static_cast<std::uint32_t>(options.codec));
  put_u32(index, static_cast<std::uint32_t>(options.table_limit));
  put_u32(index, static_cast<std::uint32_t>(report.max_source_len));
  put_u64(index, tmfmt::kFingerprintSeed);
  put_u64(index, slot_count);
  put_u64(index, order.size());
  put_u64(index, payload.size());
  put_u32(index, kTmScoreCount);
  put_u32(index, kLexroScoreCount);
  for (const auto& s : slots) {
    put_u64(index, s.fp);
    put_u64(index, s.offset);
    put_u32(index, s.len);
    put_u32(index, s.flags);
  }
  append_checksum(index);
  write_file(path(tmfmt::kIndexFile), index);

  Bytes vocab_bytes;
  put_u32(vocab_bytes, static_cast<std::uint32_t>(tokens.size()));
  for (const auto& t : tokens) {
    put_u32(vocab_bytes, static_cast<std::uint32_t>(t.size()));
    vocab_bytes.insert(vocab_bytes.end(), t.begin(), t.end());
  }
  append_checksum(vocab_bytes);
  write_file(path(tmfmt::kVocabFile), vocab_bytes);

  write_file(path(tmfmt::kPayloadFile), payload);

  Bytes cache_bytes;
  put_u32(cache_bytes, static_cast<std::uint32_t>(by_count.size()));
  for (std::size_t i : by_count) {
    put_u32(cache_bytes, static_cast<std::uint32_t>(order[i]->source.size()));
    for (WordId w : order[i]->source) put_u32(cache_bytes, w);
  }
  append_checksum(cache_bytes);
  write_file(path(tmfmt::kCacheFile), cache_bytes);

  Bytes spill_bytes;
  std::uint32_t spill_count = 0;
  for (std::size_t i = 0; i < order.size(); ++i) spill_count += spilled[i];
  put_u32(spill_bytes, spill_count);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!spilled[i]) continue;
    put_u32(spill_bytes, static_cast<std::uint32_t>(order[i]->source.size()));
    for (WordId w : order[i]->source) put_u32(spill_bytes, w);
    put_u64(spill_bytes, offsets[i]);
    put_u32(spill_bytes, lengths[i]);
  }
  append_checksum(spill_bytes);
  write_file(path(tmfmt::kSpillFile), spill_bytes);

  report.spill_entries = spill_count;
  report.max_quantization_error = max_qerr;
  report.payload_bytes = payload.size();
  report.index_slots = slot_count;
  return report;
}

}  // namespace pbmt
