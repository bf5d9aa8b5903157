#pragma once

// Azuma-Hoeffding bounds on the relative error of a DAG node under SR.
//
// A node with martingale length L and condition bound K has martingale steps
// bounded by K u (1+u)^(i-1), i = 1..L. Summing their squares and relaxing
// u^2/(u^2+2u) <= u/2 gives, with probability at least 1 - lambda,
//
//   |z^ - z| / |z| <= K sqrt(u gamma_2L(u)) sqrt(ln(2/lambda)),
//   gamma_N(u) = (1+u)^N - 1.
//
// All bound arithmetic uses 113-bit binary floating point.

#include <boost/math/special_functions/expm1.hpp>
#include <boost/math/special_functions/log1p.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cstdint>
#include <span>
#include <stdexcept>

#include "srbound/dag.hpp"
#include "srbound/errors.hpp"
#include "srbound/fp_format.hpp"
#include "srbound/rational.hpp"

namespace srb {

using Real = boost::multiprecision::cpp_bin_float_quad;

struct Analysis {
  std::uint32_t length = 0;   // L, number of martingale steps
  Rational condition{1};      // K
  double u = 0.0;             // unit roundoff
};

inline Real to_real(const Rational& q) {
  return Real(q.get_num().get_str()) / Real(q.get_den().get_str());
}

inline Real gamma(std::uint64_t n, double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("unit roundoff must lie in (0, 1)");
  if (n == 0) return Real(0);
  return boost::math::expm1(Real(n) * boost::math::log1p(Real(u)));
}

inline void check_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidLambda(lambda);
}

// Relative-error bound holding with probability at least 1 - lambda.
inline Real ah_bound(const Analysis& a, double lambda) {
  check_lambda(lambda);
  if (a.length == 0) return Real(0);
  using boost::multiprecision::log;
  using boost::multiprecision::sqrt;
  const Real u(a.u);
  return to_real(a.condition) * sqrt(u * gamma(2ull * a.length, a.u)) * sqrt(log(Real(2) / Real(lambda)));
}

// P(|M_n - M_0| >= threshold) for a martingale with |M_k - M_(k-1)| <= b_k,
// clamped to [0, 1].
inline Real azuma_generic(std::span<const Real> step_bounds, const Real& threshold) {
  if (!(threshold > 0)) throw std::invalid_argument("threshold must be positive");
  Real sq = 0;
  for (const Real& b : step_bounds) {
    if (!(b > 0)) throw std::invalid_argument("step bounds must be positive");
    sq += b * b;
  }
  if (sq == 0) return Real(0);
  using boost::multiprecision::exp;
  Real p = 2 * exp(-(threshold * threshold) / (2 * sq));
  return p > 1 ? Real(1) : p;
}

// Threshold at which azuma_generic(step_bounds, .) equals lambda.
inline Real azuma_threshold(std::span<const Real> step_bounds, double lambda) {
  check_lambda(lambda);
  using boost::multiprecision::log;
  using boost::multiprecision::sqrt;
  Real sq = 0;
  for (const Real& b : step_bounds) sq += b * b;
  return sqrt(2 * sq * log(Real(2) / Real(lambda)));
}

// Step bounds K u (1+u)^(i-1), i = 1..L, of the martingale behind `a`.
inline std::vector<Real> martingale_steps(const Analysis& a) {
  std::vector<Real> steps;
  steps.reserve(a.length);
  const Real u(a.u);
  Real b = to_real(a.condition) * u;
  for (std::uint32_t i = 0; i < a.length; ++i) {
    steps.push_back(b);
    b *= 1 + u;
  }
  return steps;
}

inline Analysis analyze(const Dag& dag, NodeId id, const FpFormat& fmt) {
  const Node& n = dag.node(id);
  if (!n.condition) throw ConditionUndefined(id);
  return {n.length, *n.condition, fmt.unit_roundoff()};
}

}  // namespace srb
