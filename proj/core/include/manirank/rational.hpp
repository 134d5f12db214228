#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace manirank {

/// Exact rational number with a positive denominator, always kept in lowest
/// terms. Comparisons cross-multiply in 128-bit arithmetic so no threshold
/// decision ever depends on floating point.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t numerator, std::int64_t denominator = 1);

  /// Parses a decimal literal such as "0.1", "1", "-0.25" with at most
  /// `max_fraction_digits` digits after the point.
  static Rational parse_decimal(std::string_view text, int max_fraction_digits = 6);

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Fixed-point rendering rounded half away from zero, e.g. "0.333333".
  std::string to_decimal(int digits = 6) const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

using Score = Rational;

}  // namespace manirank
