#ifndef BILATERAL_RATIONAL_HPP
#define BILATERAL_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bilateral {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(long long num, long long den = 1) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

namespace detail {

inline bool parse_integer(std::string_view text, BigInt& out) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    negative = text[i] == '-';
    ++i;
  }
  if (i == text.size()) return false;
  BigInt value = 0;
  for (; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    value = value * 10 + (text[i] - '0');
  }
  out = negative ? BigInt(-value) : value;
  return true;
}

inline std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  return text;
}

}  // namespace detail

// Parses "a/b" or "a" with optional sign on the numerator.
inline Rational parse_rational(std::string_view text) {
  const std::string_view body = detail::trim(text);
  const auto slash = body.find('/');
  BigInt num;
  BigInt den = 1;
  const bool ok =
      slash == std::string_view::npos
          ? detail::parse_integer(body, num)
          : detail::parse_integer(body.substr(0, slash), num) &&
                detail::parse_integer(body.substr(slash + 1), den);
  if (!ok) {
    throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
  }
  if (den == 0) {
    throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  }
  return Rational(num, den);
}

inline std::string to_string(const Rational& value) {
  const BigInt num = boost::multiprecision::numerator(value);
  const BigInt den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double to_double(const Rational& value) {
  return value.convert_to<double>();
}

}  // namespace bilateral

#endif  // BILATERAL_RATIONAL_HPP
