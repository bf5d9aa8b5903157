#pragma once

// DAG generators for recursive summation, pairwise (tree) summation, Horner
// evaluation and subtractive Karatsuba polynomial multiplication, together
// with the Karatsuba closed-form martingale length and a schoolbook
// convolution oracle.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "srbound/dag.hpp"
#include "srbound/errors.hpp"
#include "srbound/rational.hpp"

namespace srb {

// Coefficient i is the node holding the coefficient of X^i.
struct Polynomial {
  std::vector<NodeId> coeffs;

  std::size_t size() const noexcept { return coeffs.size(); }
  NodeId operator[](std::size_t i) const { return coeffs[i]; }
};

// Left fold ((x0 + x1) + x2) + ...
inline NodeId recursive_sum(DagBuilder& b, std::span<const NodeId> terms) {
  if (terms.empty()) throw std::invalid_argument("sum of an empty sequence");
  NodeId acc = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) acc = b.add(acc, terms[i]);
  return acc;
}

// Balanced binary summation; the left half takes ceil(n/2) terms.
inline NodeId tree_sum(DagBuilder& b, std::span<const NodeId> terms) {
  if (terms.empty()) throw std::invalid_argument("sum of an empty sequence");
  if (terms.size() == 1) return terms[0];
  const std::size_t half = (terms.size() + 1) / 2;
  const NodeId l = tree_sum(b, terms.first(half));
  const NodeId r = tree_sum(b, terms.subspan(half));
  return b.add(l, r);
}

// (((a_n x + a_(n-1)) x + ...) x + a_0; coeffs[i] is a_i.
inline NodeId horner(DagBuilder& b, std::span<const NodeId> coeffs, NodeId x) {
  if (coeffs.empty()) throw std::invalid_argument("horner needs at least one coefficient");
  NodeId acc = coeffs.back();
  for (std::size_t i = coeffs.size() - 1; i-- > 0;) acc = b.add(b.mul(acc, x), coeffs[i]);
  return acc;
}

namespace detail {

inline Polynomial karatsuba_rec(DagBuilder& b, std::span<const NodeId> a, std::span<const NodeId> c) {
  const std::size_t n = a.size();
  if (n == 1) return {{b.mul(a[0], c[0])}};
  const std::size_t h = n / 2;
  const Polynomial p0 = karatsuba_rec(b, a.first(h), c.first(h));
  const Polynomial p2 = karatsuba_rec(b, a.subspan(h), c.subspan(h));
  std::vector<NodeId> ad(h), cd(h);
  for (std::size_t j = 0; j < h; ++j) {
    ad[j] = b.sub(a[h + j], a[j]);  // A_h - A_l
    cd[j] = b.sub(c[j], c[h + j]);  // B_l - B_h
  }
  const Polynomial p1 = karatsuba_rec(b, ad, cd);

  // R = P2 X^n + (P0 + P1 + P2) X^h + P0. Each r_i sums the contributions
  // present at index i as  P1 + ((P2 X^n + P2 X^h) + (P0 X^h + P0)),
  // so the longer P1 martingale sits right under the root.
  const std::size_t plen = n - 1;
  auto at = [plen](const Polynomial& p, std::ptrdiff_t i) -> std::optional<NodeId> {
    if (i < 0 || static_cast<std::size_t>(i) >= plen) return std::nullopt;
    return p[static_cast<std::size_t>(i)];
  };
  auto combine = [&b](std::optional<NodeId> x, std::optional<NodeId> y) -> std::optional<NodeId> {
    if (x && y) return b.add(*x, *y);
    return x ? x : y;
  };
  Polynomial r;
  r.coeffs.reserve(2 * n - 1);
  const auto sn = static_cast<std::ptrdiff_t>(n), sh = static_cast<std::ptrdiff_t>(h);
  for (std::ptrdiff_t i = 0; i < 2 * sn - 1; ++i) {
    auto hi = combine(at(p2, i - sn), at(p2, i - sh));
    auto lo = combine(at(p0, i - sh), at(p0, i));
    auto rest = combine(hi, lo);
    r.coeffs.push_back(*combine(at(p1, i - sh), rest));
  }
  return r;
}

}  // namespace detail

// Subtractive Karatsuba product of two polynomials with 2^n coefficients
// each. The operands must come from independent computations.
inline Polynomial karatsuba(DagBuilder& b, const Polynomial& a, const Polynomial& c) {
  if (a.size() != c.size() || a.size() == 0 || !std::has_single_bit(a.size()))
    throw ShapeMismatch("karatsuba operands need equal power-of-two coefficient counts, got " +
                        std::to_string(a.size()) + " and " + std::to_string(c.size()));
  std::unordered_set<NodeId> a_errors;
  for (NodeId id : a.coeffs)
    for (NodeId e : detail::op_ancestors(b.nodes(), id)) a_errors.insert(e);
  if (!a_errors.empty()) {
    for (NodeId cid : c.coeffs) {
      for (NodeId e : detail::op_ancestors(b.nodes(), cid)) {
        if (!a_errors.contains(e)) continue;
        for (NodeId aid : a.coeffs)
          if (auto w = b.shared_error(aid, cid)) throw BiasedMultiplication(aid, cid, *w);
      }
    }
  }
  return detail::karatsuba_rec(b, a.coeffs, c.coeffs);
}

// Martingale length of coefficient i in a Karatsuba product of degree d,
// d = 2^(n+1) - 2: 1 + 3 floor(log2 min(i+1, d-i+1)) + mA + mB.
inline std::uint32_t m_closed_form(std::uint64_t i, std::uint64_t d, std::uint32_t m_a, std::uint32_t m_b) {
  if (!std::has_single_bit(d + 2) || d + 2 < 2)
    throw InvalidDegree("degree " + std::to_string(d) + " is not of the form 2^(n+1) - 2");
  if (i > d) throw InvalidDegree("coefficient index " + std::to_string(i) + " exceeds degree " + std::to_string(d));
  const std::uint64_t m = std::min(i + 1, d - i + 1);
  return 1 + 3 * static_cast<std::uint32_t>(std::bit_width(m) - 1) + m_a + m_b;
}

inline std::vector<Rational> schoolbook_poly_mul(std::span<const Rational> a, std::span<const Rational> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<Rational> r(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

// ---- standalone generators ----------------------------------------------

struct ScalarDag {
  Dag dag;
  NodeId output;
};

struct PolyDag {
  Dag dag;
  Polynomial output;
};

namespace detail {
inline std::vector<NodeId> inputs(DagBuilder& b, std::span<const Rational> values) {
  std::vector<NodeId> ids;
  ids.reserve(values.size());
  for (const auto& v : values) ids.push_back(b.input(v));
  return ids;
}
}  // namespace detail

inline ScalarDag recursive_sum_dag(std::span<const Rational> values) {
  DagBuilder b;
  const auto ids = detail::inputs(b, values);
  const NodeId out = recursive_sum(b, ids);
  b.output("sum", out);
  return {std::move(b).build(), out};
}

inline ScalarDag tree_sum_dag(std::span<const Rational> values) {
  DagBuilder b;
  const auto ids = detail::inputs(b, values);
  const NodeId out = tree_sum(b, ids);
  b.output("sum", out);
  return {std::move(b).build(), out};
}

inline ScalarDag horner_dag(std::span<const Rational> coeffs, const Rational& x) {
  DagBuilder b;
  const auto ids = detail::inputs(b, coeffs);
  const NodeId xn = b.input(x);
  const NodeId out = horner(b, ids, xn);
  b.output("p", out);
  return {std::move(b).build(), out};
}

inline PolyDag karatsuba_dag(std::span<const Rational> a, std::span<const Rational> c) {
  DagBuilder b;
  Polynomial pa{detail::inputs(b, a)};
  Polynomial pc{detail::inputs(b, c)};
  Polynomial r = karatsuba(b, pa, pc);
  for (std::size_t i = 0; i < r.size(); ++i) b.output("r[" + std::to_string(i) + "]", r[i]);
  return {std::move(b).build(), std::move(r)};
}

}  // namespace srb
