#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace microlearn {

/// Exact score/weight arithmetic. Band boundaries are compared without rounding.
using Rational = boost::rational<std::int64_t>;

/// Accepts "3/4", "0.75", "2", "-1.5". Decimals are converted exactly
/// (0.49 -> 49/100). Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

/// Canonical text: "3/4", or "2" when the denominator is 1.
std::string to_string(const Rational& value);

double to_double(const Rational& value);

}  // namespace microlearn
