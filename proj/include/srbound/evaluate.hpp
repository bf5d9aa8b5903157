#pragma once

// Floating-point evaluation of a DAG in an emulated format. Inputs are
// rounded to nearest once; every operation node is rounded exactly once, so
// shared subexpressions carry a single rounding error.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "srbound/dag.hpp"
#include "srbound/fp_format.hpp"
#include "srbound/random.hpp"
#include "srbound/rational.hpp"

namespace srb {

struct Evaluation {
  std::vector<double> values;  // indexed by node id
  std::vector<double> deltas;  // relative error of each node's own rounding
  bool input_rounded = false;  // some input was not representable
};

namespace detail {

template <class RoundOp>
Evaluation evaluate(const Dag& dag, const FpFormat& fmt, RoundOp&& round_op) {
  Evaluation ev;
  const auto nodes = dag.nodes();
  ev.values.resize(nodes.size());
  ev.deltas.resize(nodes.size());
  for (NodeId id = 0; id < nodes.size(); ++id) {
    const Node& n = nodes[id];
    RoundedValue r;
    if (n.kind == NodeKind::input) {
      const auto q = round_rational(n.exact, fmt.precision());
      ev.input_rounded |= q.inexact;
      r = {q.value, 0.0};
    } else {
      const Op op = n.kind == NodeKind::add ? Op::add : n.kind == NodeKind::sub ? Op::sub : Op::mul;
      r = round_op(id, ev.values[n.left], ev.values[n.right], op);
    }
    ev.values[id] = r.value;
    ev.deltas[id] = r.delta;
  }
  return ev;
}

}  // namespace detail

// SR-nearness evaluation. Node `id` draws from substream(seed, id), so the
// result depends only on (dag, fmt, seed).
inline Evaluation evaluate_sr(const Dag& dag, const FpFormat& fmt, std::uint64_t seed) {
  return detail::evaluate(dag, fmt, [&](NodeId id, double a, double b, Op op) {
    SplitMix64 gen = substream(seed, id);
    return sr_op(a, b, op, fmt, gen);
  });
}

inline Evaluation evaluate_rn(const Dag& dag, const FpFormat& fmt) {
  return detail::evaluate(dag, fmt, [&](NodeId, double a, double b, Op op) { return rn_op(a, b, op, fmt); });
}

// |computed - exact| / |exact|, evaluated exactly and rounded once.
inline double relative_error(double computed, const Rational& exact) {
  if (exact == 0) throw std::domain_error("relative error of an exact zero");
  return to_double(abs(Rational(to_rational(computed) - exact)) / abs(exact));
}

}  // namespace srb
