#include "weep/csv.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace weep;

TEST_CASE("format_double emits the shortest round-trip form") {
  CHECK(csv::format_double(0.5) == "0.5");
  CHECK(csv::format_double(0.1) == "0.1");
  CHECK(csv::format_double(1.0) == "1");
  CHECK(csv::format_double(-0.25) == "-0.25");
  CHECK(csv::format_double(0.0) == "0");
  CHECK(csv::format_double(0.8250000000000001) == "0.8250000000000001");
}

TEST_CASE("format_double round-trips random doubles exactly") {
  std::mt19937_64 rng(20260815);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> scale(-12, 12);
  for (int trial = 0; trial < 2000; ++trial) {
    const double v = (unit(rng) - 0.5) * std::pow(10.0, scale(rng));
    const auto parsed = csv::parse_double(csv::format_double(v));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == v);
  }
}

TEST_CASE("format_decimal keeps a decimal point on integral values") {
  CHECK(csv::format_decimal(20.0) == "20.0");
  CHECK(csv::format_decimal(1.0) == "1.0");
  CHECK(csv::format_decimal(0.0) == "0.0");
  CHECK(csv::format_decimal(-3.0) == "-3.0");
  CHECK(csv::format_decimal(0.5) == "0.5");
  CHECK(csv::format_decimal(75.0) == "75.0");
  const std::string big = csv::format_decimal(1e30);
  CHECK(big.find('e') != std::string::npos);
}

TEST_CASE("split_fields and join_fields are inverses on comma-free fields") {
  CHECK(csv::split_fields("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(csv::split_fields("") == std::vector<std::string>{""});
  CHECK(csv::split_fields("a,,b") == std::vector<std::string>{"a", "", "b"});
  CHECK(csv::split_fields(",x") == std::vector<std::string>{"", "x"});
  CHECK(csv::join_fields({"a", "b", "c"}) == "a,b,c");
  CHECK(csv::join_fields({}) == "");

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> fields;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      std::string f;
      const int len = static_cast<int>(rng() % 5);
      for (int k = 0; k < len; ++k) f += static_cast<char>('a' + rng() % 26);
      fields.push_back(f);
    }
    CHECK(csv::split_fields(csv::join_fields(fields)) == fields);
  }
}

TEST_CASE("split_lines handles LF, CRLF, and trailing newlines") {
  CHECK(csv::split_lines("a\nb\n") == std::vector<std::string>{"a", "b"});
  CHECK(csv::split_lines("a\nb") == std::vector<std::string>{"a", "b"});
  CHECK(csv::split_lines("a\r\nb\r\n") == std::vector<std::string>{"a", "b"});
  CHECK(csv::split_lines("a\n\nb\n") == std::vector<std::string>{"a", "", "b"});
  CHECK(csv::split_lines("").empty());
  CHECK(csv::split_lines("\n") == std::vector<std::string>{""});
  CHECK(csv::split_lines("x") == std::vector<std::string>{"x"});
}

TEST_CASE("parse_double is strict about trailing garbage") {
  CHECK(csv::parse_double("0.5") == 0.5);
  CHECK(csv::parse_double("-1e-3") == -1e-3);
  CHECK_FALSE(csv::parse_double("").has_value());
  CHECK_FALSE(csv::parse_double("0.5x").has_value());
  CHECK_FALSE(csv::parse_double(" 0.5").has_value());
  CHECK_FALSE(csv::parse_double("0.5 ").has_value());
  CHECK_FALSE(csv::parse_double("abc").has_value());
}

TEST_CASE("parse_int is strict about trailing garbage") {
  CHECK(csv::parse_int("42") == 42);
  CHECK(csv::parse_int("-7") == -7);
  CHECK(csv::parse_int("0") == 0);
  CHECK_FALSE(csv::parse_int("").has_value());
  CHECK_FALSE(csv::parse_int("4.2").has_value());
  CHECK_FALSE(csv::parse_int("12x").has_value());
  CHECK_FALSE(csv::parse_int(" 1").has_value());
}
