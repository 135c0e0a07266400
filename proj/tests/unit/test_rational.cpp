#include "microlearn/rational.hpp"

#include <doctest.h>

using namespace microlearn;

TEST_SUITE("rational") {

TEST_CASE("fractions, integers and decimals parse exactly") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("0.75") == Rational(3, 4));
  CHECK(parse_rational("2") == Rational(2));
  CHECK(parse_rational("-1.5") == Rational(-3, 2));
  CHECK(parse_rational("0.49") == Rational(49, 100));
  CHECK(parse_rational("6/8") == Rational(3, 4));
  CHECK(parse_rational("1.0") == Rational(1));
}

TEST_CASE("decimal boundaries are not rounded") {
  CHECK(parse_rational("0.4999999") < Rational(1, 2));
  CHECK(parse_rational("0.79") < Rational(4, 5));
  CHECK(parse_rational("0.8") == Rational(4, 5));
}

TEST_CASE("malformed text is rejected") {
  for (std::string bad : {"", "abc", "1/0", "1/", "/2", "0.5.1", "1e3", " 1", "--1", "-+1", "1.-5"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_rational(bad), std::invalid_argument);
  }
}

TEST_CASE("canonical text") {
  CHECK(to_string(Rational(3, 4)) == "3/4");
  CHECK(to_string(Rational(4, 2)) == "2");
  CHECK(to_string(Rational(-1, 3)) == "-1/3");
  CHECK(to_double(Rational(1, 4)) == 0.25);
  for (const auto& r : {Rational(7, 9), Rational(-5, 3), Rational(0), Rational(12)}) {
    CHECK(parse_rational(to_string(r)) == r);
  }
}

}
