#include <cmath>
#include <fstream>

#include "doctest.h"
#include "pbmt/common.hpp"
#include "pbmt/features.hpp"
#include "pbmt/lexro.hpp"

using namespace pbmt;

namespace {

std::string write_temp(const std::string& text) {
  std::string path = "/tmp/pbmt_lexro_test.txt";
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("reordering table loads and scores six cells per pair") {
  std::string path = write_temp(
      "a b ||| x ||| 0.5 0.25 0.25 0.1 0.6 0.3\n"
      "c ||| y z ||| 0.2 0.3 0.5 0.4 0.4 0.2\n");
  LexroTable table = LexroTable::load(path);
  CHECK(table.size() == 2);
  const auto& scores = table.lookup("a b", "x");
  CHECK(scores[0] == log_prob_f32(0.5));
  CHECK(scores[1] == log_prob_f32(0.25));
  CHECK(scores[5] == log_prob_f32(0.3));
}

TEST_CASE("absent pairs fall back to the uniform distribution") {
  std::string path = write_temp("a ||| x ||| 0.5 0.25 0.25 0.1 0.6 0.3\n");
  LexroTable table = LexroTable::load(path);
  const auto& scores = table.lookup("never", "seen");
  for (float s : scores) CHECK(s == log_prob_f32(1.0 / 3.0));
}

TEST_CASE("extra whitespace normalizes to the same key") {
  std::string path = write_temp("a   b ||| x  y ||| 0.5 0.25 0.25 0.1 0.6 0.3\n");
  LexroTable table = LexroTable::load(path);
  CHECK(table.lookup("a b", "x y")[0] == log_prob_f32(0.5));
}

TEST_CASE("zero probabilities get the floor instead of -inf") {
  std::string path = write_temp("a ||| x ||| 0 0.5 0.5 0.2 0.4 0.4\n");
  LexroTable table = LexroTable::load(path);
  CHECK(table.lookup("a", "x")[0] == log_prob_f32(kTmFloorProb));
  CHECK(std::isfinite(table.lookup("a", "x")[0]));
}

TEST_CASE("malformed reordering rows are rejected") {
  CHECK_THROWS_AS(LexroTable::load(write_temp("a ||| x ||| 0.5 0.25\n")),
                  Error);  // arity
  CHECK_THROWS_AS(LexroTable::load(write_temp("a ||| 0.1 0.2 0.3 0.4 0.5 0.6\n")),
                  Error);  // missing field
  CHECK_THROWS_AS(
      LexroTable::load(write_temp("a ||| x ||| -0.1 0.2 0.3 0.4 0.5 0.6\n")),
      Error);  // negative probability
  CHECK_THROWS_AS(
      LexroTable::load(write_temp("a ||| x ||| q 0.2 0.3 0.4 0.5 0.6\n")),
      Error);  // not a number
  CHECK_THROWS_AS(LexroTable::load("/tmp/pbmt_no_such_lexro"), Error);
}
