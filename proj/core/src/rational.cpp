#include "manirank/rational.hpp"

#include <cctype>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace manirank {
namespace {

__extension__ typedef __int128 i128;

Rational from_wide(i128 num, i128 den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 a = num < 0 ? -num : num;
  i128 b = den;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  constexpr i128 kMax = INT64_MAX;
  if (num > kMax || num < -kMax || den > kMax) throw std::overflow_error("rational overflow");
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  if (denominator == 0) throw std::domain_error("rational with zero denominator");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  const std::int64_t g = std::gcd(numerator, denominator);
  num_ = g > 1 ? numerator / g : numerator;
  den_ = g > 1 ? denominator / g : denominator;
}

Rational Rational::parse_decimal(std::string_view text, int max_fraction_digits) {
  const std::string original(text);
  auto fail = [&](const char* why) {
    throw std::invalid_argument("invalid decimal '" + original + "': " + why);
  };
  if (text.empty()) fail("empty");
  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  std::int64_t scale = 1;
  bool seen_point = false;
  bool seen_digit = false;
  int frac_digits = 0;
  for (char ch : text) {
    if (ch == '.') {
      if (seen_point) fail("multiple decimal points");
      seen_point = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(ch))) fail("unexpected character");
    seen_digit = true;
    const int digit = ch - '0';
    if (seen_point) {
      if (++frac_digits > max_fraction_digits) fail("too many fractional digits");
      frac = frac * 10 + digit;
      scale *= 10;
    } else {
      if (whole > (INT64_MAX - digit) / 10 / 1'000'000) fail("out of range");
      whole = whole * 10 + digit;
    }
  }
  if (!seen_digit) fail("no digits");
  const std::int64_t num = whole * scale + frac;
  return Rational(negative ? -num : num, scale);
}

std::string Rational::to_decimal(int digits) const {
  i128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const bool negative = num_ < 0;
  const i128 mag = negative ? -static_cast<i128>(num_) : static_cast<i128>(num_);
  // round half away from zero
  const i128 scaled = (mag * scale * 2 + den_) / (static_cast<i128>(den_) * 2);
  const auto whole = static_cast<std::int64_t>(scaled / scale);
  auto frac = static_cast<std::int64_t>(scaled % scale);
  std::string out;
  if (negative && scaled != 0) out.push_back('-');
  out += std::to_string(whole);
  if (digits > 0) {
    std::string f = std::to_string(frac);
    out.push_back('.');
    out.append(static_cast<std::size_t>(digits) - f.size(), '0');
    out += f;
  }
  return out;
}

Rational operator+(const Rational& a, const Rational& b) {
  return from_wide(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                   static_cast<i128>(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  return from_wide(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const i128 lhs = static_cast<i128>(a.num_) * b.den_;
  const i128 rhs = static_cast<i128>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace manirank
