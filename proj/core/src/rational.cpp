#include "microlearn/rational.hpp"

#include <charconv>
#include <limits>
#include <stdexcept>

namespace microlearn {

namespace {

std::int64_t parse_integer(std::string_view digits, std::string_view whole) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw std::invalid_argument("malformed rational: '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view whole = text;
  if (text.empty()) throw std::invalid_argument("malformed rational: empty");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = parse_integer(text.substr(0, slash), whole);
    const auto den = parse_integer(text.substr(slash + 1), whole);
    if (den == 0) throw std::invalid_argument("rational with zero denominator: '" + std::string(whole) + "'");
    return Rational(num, den);
  }

  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  std::string_view int_part = text.substr(0, dot);
  std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (int_part.empty() && frac_part.empty()) {
    throw std::invalid_argument("malformed rational: '" + std::string(whole) + "'");
  }
  if (frac_part.size() > 17) {
    throw std::invalid_argument("too many decimal places: '" + std::string(whole) + "'");
  }
  for (char c : int_part) {
    if (c < '0' || c > '9') throw std::invalid_argument("malformed rational: '" + std::string(whole) + "'");
  }
  for (char c : frac_part) {
    if (c < '0' || c > '9') throw std::invalid_argument("malformed rational: '" + std::string(whole) + "'");
  }

  std::int64_t scale = 1;
  for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
  const std::int64_t integer = int_part.empty() ? 0 : parse_integer(int_part, whole);
  const std::int64_t fraction = frac_part.empty() ? 0 : parse_integer(frac_part, whole);
  if (integer > (std::numeric_limits<std::int64_t>::max() - fraction) / scale) {
    throw std::invalid_argument("rational out of range: '" + std::string(whole) + "'");
  }
  Rational value(integer * scale + fraction, scale);
  return negative ? -value : value;
}

std::string to_string(const Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
}

double to_double(const Rational& value) {
  return boost::rational_cast<double>(value);
}

}  // namespace microlearn
