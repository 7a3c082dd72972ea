#include "crn/rational.hpp"

#include <cctype>

namespace crn {

std::string rational_to_string(const Rational& q) {
  std::string s = numerator(q).str();
  if (denominator(q) != 1) {
    s += "/";
    s += denominator(q).str();
  }
  return s;
}

std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '+' || text[pos] == '-') {
    negative = (text[pos] == '-');
    ++pos;
  }
  if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
    return std::nullopt;

  auto read_digits = [&](Integer& out) -> bool {
    bool any = false;
    out = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      out = out * 10 + (text[pos] - '0');
      ++pos;
      any = true;
    }
    return any;
  };

  Integer whole;
  if (!read_digits(whole)) return std::nullopt;

  Rational value(whole);
  if (pos < text.size() && text[pos] == '/') {
    ++pos;
    Integer den;
    if (!read_digits(den) || den == 0 || pos != text.size()) return std::nullopt;
    value = Rational(whole, den);
  } else if (pos < text.size() && text[pos] == '.') {
    ++pos;
    Integer frac = 0;
    Integer scale = 1;
    bool any = false;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      frac = frac * 10 + (text[pos] - '0');
      scale *= 10;
      ++pos;
      any = true;
    }
    if (!any || pos != text.size()) return std::nullopt;
    value = Rational(whole * scale + frac, scale);
  } else if (pos != text.size()) {
    return std::nullopt;
  }
  if (negative) value = -value;
  return value;
}

} // namespace crn
