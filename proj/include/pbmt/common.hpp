// common.hpp -- shared scalar types, errors and small string helpers
#pragma once

#include <chrono>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pbmt {

using WordId = std::uint32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename... Args>
[[noreturn]] void fail(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  throw Error(os.str());
}

// Whitespace-separated tokens.
std::vector<std::string> split_tokens(std::string_view line);

// Fields separated by " ||| ". Separator-less lines come back as a single
// field. Fields are trimmed of surrounding whitespace.
std::vector<std::string> split_bar_fields(std::string_view line);

std::string join_tokens(const std::vector<std::string>& tokens);

// strtod with full-token validation; on failure reports `what` and the line.
double parse_double(const std::string& text, std::string_view what,
                    std::size_t line_no);

std::uint64_t parse_u64(const std::string& text, std::string_view what,
                        std::size_t line_no);

inline std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

}  // namespace pbmt
