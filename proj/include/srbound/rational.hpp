#pragma once

// Exact rational arithmetic on top of GMP, plus the conversions the rest of
// the library needs: exact decimal parsing, correctly rounded conversion to a
// t-bit binary significand, and fixed-significant-digit decimal printing.

#include <gmpxx.h>

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

#include "srbound/errors.hpp"

namespace srb {

using Rational = mpq_class;

// mpq_set_d is exact for every finite double.
inline Rational to_rational(double x) {
  if (!std::isfinite(x)) throw OutOfRange("non-finite value has no rational form");
  return Rational(x);
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

namespace detail {

inline mpz_class pow10(unsigned long k) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, k);
  return r;
}

inline mpz_class shifted(const mpz_class& z, long k) {
  mpz_class r;
  if (k >= 0)
    mpz_mul_2exp(r.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
  else
    mpz_fdiv_q_2exp(r.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(-k));
  return r;
}

// floor(log2(num/den)) for num, den > 0.
inline long floor_log2(const mpz_class& num, const mpz_class& den) {
  long e = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2)) -
           static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  // 2^e <= num/den  <=>  num * 2^-e >= den, compared without losing bits.
  auto ge = [&](long k) {
    return k >= 0 ? num >= shifted(den, k) : shifted(num, -k) >= den;
  };
  while (!ge(e)) --e;
  while (ge(e + 1)) ++e;
  return e;
}

// Round num/den (> 0) to the nearest integer, ties to even.
inline mpz_class round_half_even(const mpz_class& num, const mpz_class& den) {
  mpz_class q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  mpz_class twice = r * 2;
  int c = cmp(twice, den);
  if (c > 0 || (c == 0 && mpz_odd_p(q.get_mpz_t()))) ++q;
  return q;
}

}  // namespace detail

struct RoundedRational {
  double value;
  bool inexact;
};

// Round q to the nearest number with a `bits`-bit significand (ties to even).
// Throws OutOfRange outside binary64's normal range.
inline RoundedRational round_rational(const Rational& q, int bits) {
  if (q == 0) return {0.0, false};
  mpz_class num = abs(q).get_num();
  const mpz_class& den = q.get_den();
  const long e = detail::floor_log2(num, den);
  if (e < -1022 || e > 1023) throw OutOfRange("value outside the binary64 normal range");
  const long k = bits - 1 - e;
  mpz_class sn = k >= 0 ? detail::shifted(num, k) : num;
  mpz_class sd = k >= 0 ? mpz_class(den) : detail::shifted(den, -k);
  mpz_class i = detail::round_half_even(sn, sd);
  const bool inexact = i * sd != sn;
  double v = std::ldexp(i.get_d(), static_cast<int>(-k));
  if (!std::isfinite(v)) throw OutOfRange("value overflows binary64");
  return {q < 0 ? -v : v, inexact};
}

inline double to_double(const Rational& q) { return round_rational(q, 53).value; }

// Decimal literal: [sign] digits [. digits] [(e|E) [sign] digits], or
// [sign] . digits [...]. Returns nullopt on malformed text.
inline std::optional<Rational> parse_decimal(std::string_view s) {
  std::size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
  std::string digits;
  long scale = 0;
  bool any = false;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    digits += s[i++];
    any = true;
  }
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits += s[i++];
      --scale;
      any = true;
    }
  }
  if (!any) return std::nullopt;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) eneg = s[i++] == '-';
    if (i == s.size()) return std::nullopt;
    long ex = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      ex = ex * 10 + (s[i++] - '0');
      if (ex > 100000) return std::nullopt;
    }
    scale += eneg ? -ex : ex;
  }
  if (i != s.size()) return std::nullopt;
  Rational r{mpz_class(digits, 10)};
  if (scale > 0) r *= Rational(detail::pow10(static_cast<unsigned long>(scale)));
  if (scale < 0) r /= Rational(detail::pow10(static_cast<unsigned long>(-scale)));
  r.canonicalize();
  return neg ? Rational(-r) : r;
}

// Scientific notation with `digits` significant digits, correctly rounded
// (ties to even): 7/4 -> "1.7500000000000000e+00".
inline std::string to_scientific(const Rational& q, int digits = 17) {
  if (q == 0) return "0." + std::string(static_cast<std::size_t>(digits - 1), '0') + "e+00";
  const mpz_class num = abs(q).get_num();
  const mpz_class& den = q.get_den();
  long e = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 10)) -
           static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 10));
  // Establish 10^e <= |q| < 10^(e+1).
  auto ge = [&](long k) {
    return k >= 0 ? num >= den * detail::pow10(static_cast<unsigned long>(k))
                  : num * detail::pow10(static_cast<unsigned long>(-k)) >= den;
  };
  while (!ge(e)) --e;
  while (ge(e + 1)) ++e;
  const long k = digits - 1 - e;
  mpz_class sn = k >= 0 ? num * detail::pow10(static_cast<unsigned long>(k)) : num;
  mpz_class sd = k >= 0 ? den : den * detail::pow10(static_cast<unsigned long>(-k));
  mpz_class i = detail::round_half_even(sn, sd);
  if (i == detail::pow10(static_cast<unsigned long>(digits))) {
    i /= 10;
    ++e;
  }
  std::string m = i.get_str();
  std::string out = q < 0 ? "-" : "";
  out += m[0];
  out += '.';
  out += m.substr(1);
  out += e < 0 ? "e-" : "e+";
  std::string es = std::to_string(e < 0 ? -e : e);
  if (es.size() < 2) es.insert(0, "0");
  return out + es;
}

}  // namespace srb
