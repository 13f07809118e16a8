#include "pbmt/common.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>

namespace pbmt {

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

static std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_bar_fields(std::string_view line) {
  static constexpr std::string_view kSep = "|||";
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(kSep, pos);
    if (next == std::string_view::npos) {
      out.emplace_back(trim(line.substr(pos)));
      break;
    }
    out.emplace_back(trim(line.substr(pos, next - pos)));
    pos = next + kSep.size();
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

double parse_double(const std::string& text, std::string_view what,
                    std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE)
    fail("line ", line_no, ": expected a number for ", what, ", got '", text, "'");
  return v;
}

std::uint64_t parse_u64(const std::string& text, std::string_view what,
                        std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE)
    fail("line ", line_no, ": expected an integer for ", what, ", got '", text, "'");
  return v;
}

}  // namespace pbmt
