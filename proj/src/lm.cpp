#include "pbmt/lm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace pbmt {
namespace {

// Unigram log10 probability used when a model declares no <unk>.
constexpr double kUnkFloor = -99.0;

bool blank(const std::string& s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string strip_cr(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  return s;
}

}  // namespace

LmWordId NGramModel::intern(std::string_view token) {
  auto it = vocab_.find(std::string(token));
  if (it != vocab_.end()) return it->second;
  LmWordId id = static_cast<LmWordId>(words_.size());
  words_.emplace_back(token);
  vocab_.emplace(words_.back(), id);
  return id;
}

LmWordId NGramModel::word_id(std::string_view token) const {
  auto it = vocab_.find(std::string(token));
  return it == vocab_.end() ? kUnk : it->second;
}

std::optional<LmWordId> NGramModel::find_word(std::string_view token) const {
  auto it = vocab_.find(std::string(token));
  if (it == vocab_.end()) return std::nullopt;
  return it->second;
}

const NGramModel::Entry* NGramModel::find(const LmWordId* words,
                                          std::size_t len) const {
  Key k;
  k.len = static_cast<std::uint8_t>(len);
  std::copy(words, words + len, k.w.begin());
  auto it = entries_.find(k);
  return it == entries_.end() ? nullptr : &it->second;
}

NGramModel NGramModel::load_arpa(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open language model: ", path);
  return parse_arpa(in, path);
}

NGramModel NGramModel::parse_arpa(std::istream& in, const std::string& name) {
  NGramModel m;
  m.words_ = {"<s>", "</s>", "<unk>"};
  for (LmWordId i = 0; i < m.words_.size(); ++i) m.vocab_[m.words_[i]] = i;

  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](std::string& out) {
    if (!std::getline(in, out)) return false;
    ++line_no;
    out = strip_cr(std::move(out));
    return true;
  };

  // Header.
  for (;;) {
    if (!next_line(line)) fail(name, ": missing \\data\\ header");
    if (blank(line)) continue;
    if (line == "\\data\\") break;
    fail(name, " line ", line_no, ": expected \\data\\ header, got '", line, "'");
  }

  // Count declarations.
  std::string marker;
  for (;;) {
    if (!next_line(line)) fail(name, ": truncated after \\data\\");
    if (blank(line)) continue;
    if (line.rfind("ngram ", 0) != 0) {
      marker = line;
      break;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(name, " line ", line_no, ": malformed count line '", line, "'");
    std::uint64_t n = parse_u64(line.substr(6, eq - 6), "n-gram order", line_no);
    std::uint64_t c = parse_u64(line.substr(eq + 1), "n-gram count", line_no);
    if (n < 1 || n > kMaxLmOrder)
      fail(name, " line ", line_no, ": order ", n, " outside supported range 1..",
           kMaxLmOrder);
    m.counts_[n] = c;
    m.order_ = std::max(m.order_, static_cast<std::size_t>(n));
  }
  if (m.order_ == 0) fail(name, ": no n-gram counts declared");

  // Sections, in order; empty orders may omit their section entirely.
  for (std::size_t k = 1; k <= m.order_; ++k) {
    std::ostringstream expect;
    expect << "\\" << k << "-grams:";
    if (marker != expect.str()) {
      if (m.counts_[k] == 0) continue;
      fail(name, " line ", line_no, ": expected section ", expect.str(),
           ", got '", marker, "'");
    }

    std::size_t found = 0;
    for (;;) {
      if (!next_line(line))
        fail(name, ": truncated inside section ", expect.str());
      if (blank(line)) continue;
      if (line[0] == '\\') {
        marker = line;
        break;
      }
      auto tokens = split_tokens(line);
      if (tokens.size() != k + 1 && tokens.size() != k + 2)
        fail(name, " line ", line_no, ": expected ", k + 1, " or ", k + 2,
             " fields in ", expect.str(), " entry, got ", tokens.size());
      Key key;
      key.len = static_cast<std::uint8_t>(k);
      Entry e;
      e.prob = parse_double(tokens[0], "log probability", line_no);
      for (std::size_t i = 0; i < k; ++i) key.w[i] = m.intern(tokens[1 + i]);
      if (tokens.size() == k + 2)
        e.backoff = parse_double(tokens[k + 1], "back-off weight", line_no);
      if (!m.entries_.emplace(key, e).second)
        fail(name, " line ", line_no, ": duplicate ", k, "-gram '", line, "'");
      if (k >= 2) {
        Key prefix;
        prefix.len = static_cast<std::uint8_t>(k - 1);
        std::copy(key.w.begin(), key.w.begin() + k - 1, prefix.w.begin());
        m.has_continuation_.insert(prefix);
      }
      ++found;
    }
    if (found != m.counts_[k])
      fail(name, " line ", line_no, ": section ", expect.str(), " declared ",
           m.counts_[k], " entries, found ", found);
  }

  if (marker != "\\end\\")
    fail(name, " line ", line_no, ": expected \\end\\, got '", marker, "'");

  Key unk;
  unk.len = 1;
  unk.w[0] = kUnk;
  if (!m.entries_.count(unk)) {
    m.entries_.emplace(unk, Entry{kUnkFloor, 0.0});
    m.synthesized_unk_ = true;
  }
  return m;
}

LMState NGramModel::begin_state() const {
  LmWordId w = kBegin;
  LMState s;
  // Reuse the truncation logic: a begin marker that no bigram extends and
  // that carries no back-off weight is droppable like any other context.
  std::size_t len = 1;
  const LmWordId* start = &w;
  while (len > 0) {
    Key k;
    k.len = static_cast<std::uint8_t>(len);
    std::copy(start, start + len, k.w.begin());
    if (has_continuation_.count(k)) break;
    const Entry* e = find(start, len);
    if (e && e->backoff != 0.0) break;
    ++start;
    --len;
  }
  s.length = static_cast<std::uint8_t>(len);
  std::copy(start, start + len, s.words.begin());
  return s;
}

std::pair<double, LMState> NGramModel::score_word(const LMState& state,
                                                  LmWordId word) const {
  std::size_t ctx = std::min<std::size_t>(state.length, order_ - 1);
  LmWordId buf[kMaxLmOrder];
  const LmWordId* sw = state.words.data() + (state.length - ctx);
  std::copy(sw, sw + ctx, buf);
  buf[ctx] = word;

  // Back-off walk: charge the skipped contexts' weights, then the longest
  // matching n-gram's probability.
  double score = 0.0;
  for (std::size_t m = ctx;; --m) {
    if (const Entry* e = find(buf + (ctx - m), m + 1)) {
      score += e->prob;
      break;
    }
    if (m == 0) {
      LmWordId u = kUnk;
      const Entry* e = find(&u, 1);
      score += e ? e->prob : kUnkFloor;
      break;
    }
    if (const Entry* bo = find(buf + (ctx - m), m)) score += bo->backoff;
  }

  // Successor context: newest order-1 words, then drop left words that no
  // stored n-gram extends and whose back-off is zero. Dropping such a word
  // provably never changes a future back-off walk.
  std::size_t nlen = std::min(ctx + 1, order_ - 1);
  const LmWordId* start = buf + (ctx + 1 - nlen);
  while (nlen > 0) {
    Key k;
    k.len = static_cast<std::uint8_t>(nlen);
    std::copy(start, start + nlen, k.w.begin());
    if (has_continuation_.count(k)) break;
    const Entry* e = find(start, nlen);
    if (e && e->backoff != 0.0) break;
    ++start;
    --nlen;
  }
  LMState next;
  next.length = static_cast<std::uint8_t>(nlen);
  std::copy(start, start + nlen, next.words.begin());
  return {score, next};
}

std::pair<double, LMState> NGramModel::score_phrase(
    const LMState& state, std::span<const LmWordId> words) const {
  double total = 0.0;
  LMState s = state;
  for (LmWordId w : words) {
    auto [p, next] = score_word(s, w);
    total += p;
    s = next;
  }
  return {total, s};
}

}  // namespace pbmt
