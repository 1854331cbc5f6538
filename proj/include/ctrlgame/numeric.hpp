#pragma once

// Exact number types: Money (fixed two-decimal amounts) and Rational scores.

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "ctrlgame/error.hpp"

namespace ctrlgame {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Non-negative decimal amount with at most two fractional digits, stored as
/// an integer count of hundredths. Unit-agnostic.
class Money {
 public:
  // Upper bound keeps sums over a few thousand controls inside int64.
  static constexpr std::int64_t kMaxCents = std::int64_t{1} << 52;

  constexpr Money() = default;

  static Money from_cents(std::int64_t cents) {
    if (cents < 0 || cents > kMaxCents)
      throw Error(ErrorCode::InvalidArgument, "amount out of range");
    Money m;
    m.cents_ = cents;
    return m;
  }

  static Money from_units(std::int64_t units) { return from_cents(units * 100); }

  /// Accepts `123`, `123.4`, `123.45`, with an optional thousands separator
  /// style of plain digits only. Rejects signs, exponents and >2 decimals.
  static Money parse(std::string_view text) {
    auto fail = [&](const char* why) -> Money {
      throw Error(ErrorCode::InvalidArgument,
                  "invalid amount '" + std::string(text) + "': " + why);
    };
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (text.empty()) return fail("empty");
    if (text.front() == '-') return fail("negative");
    auto dot = text.find('.');
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (whole.empty()) return fail("missing integer part");
    if (dot != std::string_view::npos && frac.empty()) return fail("missing fractional digits");
    if (frac.size() > 2) return fail("more than two fractional digits");
    for (char c : whole)
      if (c < '0' || c > '9') return fail("not a decimal number");
    for (char c : frac)
      if (c < '0' || c > '9') return fail("not a decimal number");
    if (whole.size() > 15) return fail("too large");
    std::int64_t units = 0;
    std::from_chars(whole.data(), whole.data() + whole.size(), units);
    std::int64_t cents = 0;
    if (!frac.empty()) {
      std::from_chars(frac.data(), frac.data() + frac.size(), cents);
      if (frac.size() == 1) cents *= 10;
    }
    if (units > kMaxCents / 100) return fail("too large");
    return from_cents(units * 100 + cents);
  }

  constexpr std::int64_t cents() const noexcept { return cents_; }

  /// Canonical text: integer part, plus exactly two decimals when non-integral.
  std::string to_string() const {
    std::string out = std::to_string(cents_ / 100);
    if (auto frac = cents_ % 100; frac != 0) {
      out += '.';
      out += static_cast<char>('0' + frac / 10);
      out += static_cast<char>('0' + frac % 10);
    }
    return out;
  }

  Money operator+(Money other) const { return from_cents(cents_ + other.cents_); }
  Money& operator+=(Money other) { return *this = *this + other; }

  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  std::int64_t cents_ = 0;
};

/// "p/q" with q > 0, always including the denominator.
inline std::string to_fraction_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

inline Rational parse_fraction(std::string_view text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string_view::npos) return Rational(BigInt(std::string(text)));
    BigInt num(std::string(text.substr(0, slash)));
    BigInt den(std::string(text.substr(slash + 1)));
    if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    throw Error(ErrorCode::InvalidArgument, "invalid fraction '" + std::string(text) + "'");
  }
}

/// Decimal rendering of a non-negative rational rounded half-up to
/// `significant` significant digits, trailing zeros trimmed. Display only.
inline std::string to_decimal_string(const Rational& value, int significant = 6) {
  if (value < 0) return "-" + to_decimal_string(-value, significant);
  if (value == 0) return "0";
  BigInt num = boost::multiprecision::numerator(value);
  BigInt den = boost::multiprecision::denominator(value);
  // Find exponent e with 10^e <= value < 10^(e+1).
  int exponent = 0;
  BigInt scaled_num = num, scaled_den = den;
  while (scaled_num >= scaled_den * 10) {
    scaled_den *= 10;
    ++exponent;
  }
  while (scaled_num < scaled_den) {
    scaled_num *= 10;
    --exponent;
  }
  // digits = round(value * 10^(significant-1-exponent))
  int shift = significant - 1 - exponent;
  BigInt n = num, d = den;
  for (int i = 0; i < shift; ++i) n *= 10;
  for (int i = 0; i < -shift; ++i) d *= 10;
  BigInt digits = (2 * n + d) / (2 * d);
  std::string s = digits.str();
  // Rounding may carry into an extra digit (e.g. 0.9999995 -> 1.00000).
  if (static_cast<int>(s.size()) > significant) {
    s.pop_back();
    --shift;
  }
  // value ~= s * 10^-shift
  std::string out;
  if (shift <= 0) {
    out = s + std::string(static_cast<std::size_t>(-shift), '0');
  } else if (static_cast<std::size_t>(shift) >= s.size()) {
    out = "0." + std::string(static_cast<std::size_t>(shift) - s.size(), '0') + s;
  } else {
    out = s.substr(0, s.size() - shift) + "." + s.substr(s.size() - shift);
  }
  if (out.find('.') != std::string::npos) {
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return out;
}

}  // namespace ctrlgame
