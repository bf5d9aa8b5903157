#pragma once

// Reduced-precision floating-point emulation on top of binary64.
//
// A format keeps `t` significand bits (implicit bit included) and binary64's
// normal exponent range; subnormals and overflow are not emulated. Exact
// operation results are carried as unevaluated two-word sums hi + lo, which
// lets SR-nearness see the exact value of a + b, a - b and a * b.

#include <cfloat>
#include <cmath>
#include <stdexcept>
#include <string>

#include "srbound/errors.hpp"
#include "srbound/random.hpp"

namespace srb {

// Unit roundoff convention. `half_ulp` is 2^-t (half an ulp at 1); `step_bound`
// is 2^(1-t), which bounds the relative error of either SR neighbor.
enum class UMode { half_ulp, step_bound };

class FpFormat {
 public:
  explicit FpFormat(int t, UMode mode = UMode::step_bound) : t_(t), mode_(mode) {
    if (t < 2 || t > 52)
      throw std::invalid_argument("significand width must lie in [2, 52], got " +
                                  std::to_string(t));
  }

  static FpFormat binary16(UMode mode = UMode::step_bound) { return FpFormat(11, mode); }
  static FpFormat binary32(UMode mode = UMode::step_bound) { return FpFormat(24, mode); }

  int precision() const noexcept { return t_; }
  UMode u_mode() const noexcept { return mode_; }

  double unit_roundoff() const noexcept {
    return std::ldexp(1.0, mode_ == UMode::half_ulp ? -t_ : 1 - t_);
  }

  // Spacing of the format in the binade of x (x nonzero, normal).
  double ulp(double x) const noexcept { return std::ldexp(1.0, std::ilogb(x) - t_ + 1); }

  friend bool operator==(const FpFormat&, const FpFormat&) = default;

 private:
  int t_;
  UMode mode_;
};

// Exact value hi + lo with hi = fl64(hi + lo).
struct ExactValue {
  double hi;
  double lo = 0.0;
};

struct Neighbors {
  double down;
  double up;
};

// Rounded result; delta = (value - x) / x, 0 when x = 0.
struct RoundedValue {
  double value;
  double delta;
};

enum class Op { add, sub, mul };

inline char op_symbol(Op op) {
  switch (op) {
    case Op::add: return '+';
    case Op::sub: return '-';
    case Op::mul: return '*';
  }
  return '?';
}

namespace detail {

inline void check_range(double x) {
  if (!std::isfinite(x)) throw OutOfRange("non-finite value");
  if (x != 0.0 && std::fabs(x) < DBL_MIN)
    throw OutOfRange("value is subnormal in the emulated format");
}

inline double next_down_positive(double x, const FpFormat& fmt) {
  const int e = std::ilogb(x);
  const bool power_of_two = x == std::ldexp(1.0, e);
  double r = x - std::ldexp(1.0, e - fmt.precision() + (power_of_two ? 0 : 1));
  check_range(r);
  return r;
}

inline double next_up_positive(double x, const FpFormat& fmt) {
  double r = x + fmt.ulp(x);
  check_range(r);
  return r;
}

inline double next_up(double x, const FpFormat& fmt) {
  return x > 0 ? next_up_positive(x, fmt) : -next_down_positive(-x, fmt);
}

inline double next_down(double x, const FpFormat& fmt) {
  return x > 0 ? next_down_positive(x, fmt) : -next_up_positive(-x, fmt);
}

inline bool even_significand(double v, const FpFormat& fmt) {
  if (v == 0.0) return true;
  const double sig = std::ldexp(std::fabs(v), -(std::ilogb(v) - fmt.precision() + 1));
  return std::fmod(sig, 2.0) == 0.0;
}

inline double relative_delta(double value, ExactValue x) {
  if (x.hi == 0.0) return 0.0;
  return ((value - x.hi) - x.lo) / (x.hi + x.lo);
}

}  // namespace detail

inline Neighbors neighbors(double x, const FpFormat& fmt) {
  detail::check_range(x);
  if (x == 0.0) return {0.0, 0.0};
  const int shift = std::ilogb(x) - fmt.precision() + 1;
  const double scaled = std::ldexp(x, -shift);
  Neighbors n{std::ldexp(std::floor(scaled), shift), std::ldexp(std::ceil(scaled), shift)};
  if (!std::isfinite(n.down) || !std::isfinite(n.up))
    throw OutOfRange("rounding neighbor overflows the emulated range");
  return n;
}

inline Neighbors neighbors(ExactValue x, const FpFormat& fmt) {
  Neighbors n = neighbors(x.hi, fmt);
  if (x.lo == 0.0 || n.down != n.up) return n;
  // hi is representable; the exact value sits just beside it.
  if (x.lo > 0) return {x.hi, detail::next_up(x.hi, fmt)};
  return {detail::next_down(x.hi, fmt), x.hi};
}

inline bool is_representable(double x, const FpFormat& fmt) {
  Neighbors n = neighbors(x, fmt);
  return n.down == n.up;
}

// Fraction of the gap covered by x. Exact for one-word x (the numerator is a
// Sterbenz subtraction and the gap is a power of two).
inline double p_fraction(ExactValue x, const FpFormat& fmt) {
  Neighbors n = neighbors(x, fmt);
  if (n.down == n.up) return 0.0;
  return ((x.hi - n.down) + x.lo) / (n.up - n.down);
}

inline double p_fraction(double x, const FpFormat& fmt) { return p_fraction(ExactValue{x}, fmt); }

// SR-nearness: round up with probability p(x), down otherwise. `gen` is a
// 64-bit uniform random bit generator; one 53-bit sample is drawn per
// inexact rounding.
template <class Gen>
RoundedValue sr_round(ExactValue x, const FpFormat& fmt, Gen& gen) {
  Neighbors n = neighbors(x, fmt);
  if (n.down == n.up) return {n.down, 0.0};
  const double p = ((x.hi - n.down) + x.lo) / (n.up - n.down);
  const double value = uniform01(gen) < p ? n.up : n.down;
  return {value, detail::relative_delta(value, x)};
}

template <class Gen>
RoundedValue sr_round(double x, const FpFormat& fmt, Gen& gen) {
  return sr_round(ExactValue{x}, fmt, gen);
}

// Round to nearest, ties to even.
inline RoundedValue rn_round(ExactValue x, const FpFormat& fmt) {
  Neighbors n = neighbors(x, fmt);
  if (n.down == n.up) return {n.down, 0.0};
  // Both distances are exact multiples of the binary64 spacing near hi.
  const double below = x.hi - n.down;
  const double above = n.up - x.hi;
  const double diff = (below - above) + 2.0 * x.lo;
  double value;
  if (diff < 0)
    value = n.down;
  else if (diff > 0)
    value = n.up;
  else
    value = detail::even_significand(n.down, fmt) ? n.down : n.up;
  return {value, detail::relative_delta(value, x)};
}

inline RoundedValue rn_round(double x, const FpFormat& fmt) { return rn_round(ExactValue{x}, fmt); }

// Exact a op b as a two-word sum (TwoSum / FMA-based TwoProduct).
inline ExactValue exact_op(double a, double b, Op op) {
  if (op == Op::sub) b = -b;
  if (op == Op::mul) {
    const double hi = a * b;
    detail::check_range(hi);
    // Below this magnitude the FMA residual may itself be subnormal.
    if (hi != 0.0 && std::fabs(hi) < 0x1p-969)
      throw OutOfRange("product too small for an exact two-word residual");
    return {hi, std::fma(a, b, -hi)};
  }
  const double s = a + b;
  detail::check_range(s);
  const double bb = s - a;
  const double lo = (a - (s - bb)) + (b - bb);
  return {s, lo};
}

namespace detail {
inline void require_representable(double a, double b, const FpFormat& fmt) {
  if (!is_representable(a, fmt) || !is_representable(b, fmt))
    throw NotRepresentable("SR operand is not representable with " +
                           std::to_string(fmt.precision()) + " significand bits");
}
}  // namespace detail

template <class Gen>
RoundedValue sr_op(double a, double b, Op op, const FpFormat& fmt, Gen& gen) {
  detail::require_representable(a, b, fmt);
  return sr_round(exact_op(a, b, op), fmt, gen);
}

inline RoundedValue rn_op(double a, double b, Op op, const FpFormat& fmt) {
  detail::require_representable(a, b, fmt);
  return rn_round(exact_op(a, b, op), fmt);
}

}  // namespace srb
