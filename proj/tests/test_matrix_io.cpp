#include "coca/error.hpp"
#include "coca/matrix_io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace coca;

TEST_CASE("parse_csv") {
  std::istringstream in("a,b\n1,2.5\n-3,4e-2\n");
  const auto t = parse_csv(in, true);
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.values.rows() == 2);
  CHECK(t.values(1, 0) == -3);
  CHECK(t.values(1, 1) == 0.04);

  std::istringstream crlf("1, 2\r\n3,4\r\n");
  const auto c = parse_csv(crlf, false);
  CHECK(c.header.empty());
  CHECK(c.values(0, 1) == 2);

  const auto line_of = [](const std::string& text) {
    std::istringstream s(text);
    try {
      (void)parse_csv(s, false);
    } catch (const InvalidData& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(line_of("1,2\n3\n").find("line 2") != std::string::npos);
  CHECK(line_of("1,2\n3,x\n").find("line 2") != std::string::npos);
  CHECK(line_of("1,,2\n").find("line 1") != std::string::npos);
  CHECK_FALSE(line_of("").empty());
}

TEST_CASE("write_csv round-trips bit for bit") {
  std::mt19937_64 rng(9);
  Matrix m = oracle::random_data(rng, 7, 4);
  m(0, 0) = 0.1;
  m(1, 1) = 1e-300;
  m(2, 2) = -123456789.123456789;
  std::stringstream io;
  write_csv(io, m, {"w", "x", "y", "z"});
  const auto back = parse_csv(io, true);
  CHECK(back.values == m);
  CHECK(back.header.size() == 4);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("estimate JSON") {
  Matrix m(2, 2);
  m << 1, 0.3, 0.3, 1;
  const auto text = estimate_to_json(m, "spearman-sine");
  std::string kind;
  CHECK(estimate_from_json(text, &kind) == m);
  CHECK(kind == "spearman-sine");
  CHECK_THROWS_AS((void)estimate_from_json("{\"rows\": 2}"), InvalidData);
  CHECK_THROWS_AS((void)estimate_from_json("not json"), InvalidData);
  CHECK_THROWS_AS((void)estimate_from_json(R"({"kind":"x","rows":2,"cols":2,"matrix":[[1,2]]})"), InvalidData);
}
