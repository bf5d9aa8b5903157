#pragma once

// Experiment drivers behind the command-line tool: per-output analysis,
// Monte Carlo simulation of a DAG, the Karatsuba central-coefficient
// experiment, the martingale-length table and the stagnation demo.
// Everything here is deterministic given its arguments.

#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "srbound/algorithms.hpp"
#include "srbound/bounds.hpp"
#include "srbound/dag.hpp"
#include "srbound/evaluate.hpp"
#include "srbound/fp_format.hpp"
#include "srbound/random.hpp"
#include "srbound/rational.hpp"

namespace srb {

// ---- number formatting ------------------------------------------------------

// Shortest decimal that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string format_real(const Real& x, int digits = 17) {
  return x.str(digits - 1, std::ios_base::scientific);
}

// ---- analyze ----------------------------------------------------------------

struct OutputReport {
  std::string name;
  NodeId node;
  std::uint32_t length;
  std::optional<Rational> condition;  // nullopt: undefined
  double u;
  std::optional<Real> bound;
};

inline std::vector<OutputReport> analyze_outputs(const Dag& dag, const FpFormat& fmt, double lambda) {
  check_lambda(lambda);
  std::vector<OutputReport> out;
  for (const auto& o : dag.outputs()) {
    const Node& n = dag.node(o.node);
    OutputReport r{o.name, o.node, n.length, n.condition, fmt.unit_roundoff(), std::nullopt};
    if (n.condition) r.bound = ah_bound(analyze(dag, o.node, fmt), lambda);
    out.push_back(std::move(r));
  }
  return out;
}

inline void write_analysis(std::ostream& os, const std::vector<OutputReport>& reports) {
  os << "output,L,K,u,bound\n";
  for (const auto& r : reports) {
    os << r.name << ',' << r.length << ',' << (r.condition ? to_scientific(*r.condition) : "undefined") << ','
       << format_double(r.u) << ',' << (r.bound ? format_real(*r.bound) : "undefined") << '\n';
  }
}

// ---- simulate ---------------------------------------------------------------

struct TrialRecord {
  std::string output;
  std::uint32_t trial;
  std::uint64_t seed;
  double sr_value;
  Rational exact;
  std::optional<double> sr_error;  // nullopt when the exact value is 0
  std::optional<double> rn_error;
  std::optional<Real> bound;       // nullopt when K is undefined
  std::optional<Rational> condition;
  std::uint32_t length;
  double u;
  double lambda;
  bool input_rounded;
};

struct Coverage {
  std::size_t covered = 0;
  std::size_t counted = 0;
  double fraction() const { return counted ? static_cast<double>(covered) / static_cast<double>(counted) : 1.0; }
};

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t key) {
  SplitMix64 g = substream(seed, key);
  return g();
}

inline bool within_bound(const TrialRecord& r) { return r.sr_error && r.bound && Real(*r.sr_error) <= *r.bound; }

inline Coverage coverage(const std::vector<TrialRecord>& rows) {
  Coverage c;
  for (const auto& r : rows) {
    if (!r.sr_error || !r.bound) continue;
    ++c.counted;
    if (within_bound(r)) ++c.covered;
  }
  return c;
}

namespace detail {
inline std::optional<double> rel_error_or_none(double v, const Rational& exact) {
  if (exact == 0) return std::nullopt;
  return relative_error(v, exact);
}
}  // namespace detail

// One row per (output, trial), outputs in program order.
inline std::vector<TrialRecord> simulate(const Dag& dag, const FpFormat& fmt, std::uint32_t trials, std::uint64_t seed,
                                         double lambda) {
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  const auto reports = analyze_outputs(dag, fmt, lambda);
  const Evaluation rn = evaluate_rn(dag, fmt);
  std::vector<std::optional<double>> rn_err;
  for (const auto& o : dag.outputs()) rn_err.push_back(detail::rel_error_or_none(rn.values[o.node], dag.node(o.node).exact));

  std::vector<std::vector<TrialRecord>> per_output(dag.outputs().size());
  for (std::uint32_t t = 0; t < trials; ++t) {
    const std::uint64_t ts = trial_seed(seed, t);
    const Evaluation ev = evaluate_sr(dag, fmt, ts);
    for (std::size_t k = 0; k < dag.outputs().size(); ++k) {
      const auto& rep = reports[k];
      const Rational& exact = dag.node(rep.node).exact;
      const double v = ev.values[rep.node];
      per_output[k].push_back({rep.name, t, ts, v, exact, detail::rel_error_or_none(v, exact), rn_err[k], rep.bound,
                               rep.condition, rep.length, rep.u, lambda, ev.input_rounded});
    }
  }
  std::vector<TrialRecord> rows;
  for (auto& v : per_output)
    for (auto& r : v) rows.push_back(std::move(r));
  return rows;
}

inline const char* simulate_header() {
  return "output,trial,seed,sr_value,exact_value,sr_error,rn_error,bound,K,L,u,lambda,input_rounded";
}

namespace detail {
inline std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }
inline std::string opt(const std::optional<Real>& v) { return v ? format_real(*v) : ""; }
inline std::string opt(const std::optional<Rational>& v) { return v ? to_scientific(*v) : "undefined"; }
}  // namespace detail

inline void write_simulation_csv(std::ostream& os, const std::vector<TrialRecord>& rows) {
  os << simulate_header() << '\n';
  for (const auto& r : rows) {
    os << r.output << ',' << r.trial << ',' << r.seed << ',' << format_double(r.sr_value) << ','
       << to_scientific(r.exact) << ',' << detail::opt(r.sr_error) << ',' << detail::opt(r.rn_error) << ','
       << detail::opt(r.bound) << ',' << detail::opt(r.condition) << ',' << r.length << ',' << format_double(r.u)
       << ',' << format_double(r.lambda) << ',' << (r.input_rounded ? 1 : 0) << '\n';
  }
}

// ---- karatsuba experiment ---------------------------------------------------

// unit: coefficients uniform in [0, 1); sym: uniform in [-0.5, 0.5).
enum class Dist { unit, sym };

struct KaratsubaInstance {
  unsigned n;
  std::vector<Rational> a, b;
  bool input_rounded = false;
};

// 2^n coefficients per operand, drawn from substream(seed, n) and rounded to
// nearest in `fmt`. The same seed gives paired unit/sym instances (sym is
// the unit draw shifted by -0.5).
inline KaratsubaInstance sample_karatsuba(unsigned n, Dist dist, std::uint64_t seed, const FpFormat& fmt) {
  SplitMix64 gen = substream(seed, n);
  const std::size_t len = std::size_t{1} << n;
  KaratsubaInstance inst{n, {}, {}, false};
  auto draw = [&] {
    double v = uniform01(gen);
    if (dist == Dist::sym) v -= 0.5;
    const auto r = round_rational(to_rational(v), fmt.precision());
    inst.input_rounded |= r.inexact;
    return to_rational(r.value);
  };
  for (std::size_t i = 0; i < len; ++i) inst.a.push_back(draw());
  for (std::size_t i = 0; i < len; ++i) inst.b.push_back(draw());
  return inst;
}

struct KaratsubaRow {
  unsigned n;
  std::uint64_t d;
  std::uint64_t coeff_index;
  std::uint32_t trial;
  std::uint64_t seed;
  double sr_value;
  Rational exact;
  std::optional<double> sr_error;
  std::optional<double> rn_error;
  std::optional<Real> bound;
  std::optional<Rational> condition;
  std::uint32_t length;
  double u;
  double lambda;
  bool input_rounded;
};

struct KaratsubaConfig {
  unsigned n_min = 0;
  unsigned n_max = 10;
  Dist dist = Dist::unit;
  std::uint32_t trials = 3;
  std::uint64_t seed = 1;
  double lambda = 0.1;
  FpFormat fmt = FpFormat::binary32();
};

// Condition bound and length of the central coefficient r_(d/2).
struct CentralCoefficient {
  std::uint64_t d;
  NodeId node;
  std::optional<Rational> condition;
  std::uint32_t length;
};

inline CentralCoefficient central_coefficient(const PolyDag& pd) {
  const std::uint64_t d = pd.output.size() - 1;
  const NodeId id = pd.output[d / 2];
  const Node& n = pd.dag.node(id);
  return {d, id, n.condition, n.length};
}

inline std::vector<KaratsubaRow> karatsuba_experiment(const KaratsubaConfig& cfg) {
  if (cfg.n_min > cfg.n_max) throw std::invalid_argument("n-min must not exceed n-max");
  if (cfg.trials == 0) throw std::invalid_argument("trials must be at least 1");
  check_lambda(cfg.lambda);
  std::vector<KaratsubaRow> rows;
  for (unsigned n = cfg.n_min; n <= cfg.n_max; ++n) {
    const KaratsubaInstance inst = sample_karatsuba(n, cfg.dist, cfg.seed, cfg.fmt);
    const PolyDag pd = karatsuba_dag(inst.a, inst.b);
    const CentralCoefficient cc = central_coefficient(pd);
    const Rational& exact = pd.dag.node(cc.node).exact;
    std::optional<Real> bound;
    if (cc.condition) bound = ah_bound(analyze(pd.dag, cc.node, cfg.fmt), cfg.lambda);
    const Evaluation rn = evaluate_rn(pd.dag, cfg.fmt);
    const auto rn_error = detail::rel_error_or_none(rn.values[cc.node], exact);
    for (std::uint32_t t = 0; t < cfg.trials; ++t) {
      const std::uint64_t ts = trial_seed(cfg.seed, (std::uint64_t{n} << 32) | t);
      const Evaluation ev = evaluate_sr(pd.dag, cfg.fmt, ts);
      const double v = ev.values[cc.node];
      rows.push_back({n, cc.d, cc.d / 2, t, ts, v, exact, detail::rel_error_or_none(v, exact), rn_error, bound,
                      cc.condition, cc.length, cfg.fmt.unit_roundoff(), cfg.lambda,
                      inst.input_rounded || ev.input_rounded});
    }
  }
  return rows;
}

inline const char* karatsuba_header() {
  return "n,d,coeff_index,trial,seed,sr_value,exact_value,sr_error,rn_error,bound,K,L,u,lambda,input_rounded";
}

inline void write_karatsuba_csv(std::ostream& os, const std::vector<KaratsubaRow>& rows) {
  os << karatsuba_header() << '\n';
  for (const auto& r : rows) {
    os << r.n << ',' << r.d << ',' << r.coeff_index << ',' << r.trial << ',' << r.seed << ','
       << format_double(r.sr_value) << ',' << to_scientific(r.exact) << ',' << detail::opt(r.sr_error) << ','
       << detail::opt(r.rn_error) << ',' << detail::opt(r.bound) << ',' << detail::opt(r.condition) << ','
       << r.length << ',' << format_double(r.u) << ',' << format_double(r.lambda) << ','
       << (r.input_rounded ? 1 : 0) << '\n';
  }
}

inline Coverage coverage(const std::vector<KaratsubaRow>& rows) {
  Coverage c;
  for (const auto& r : rows) {
    if (!r.sr_error || !r.bound) continue;
    ++c.counted;
    if (Real(*r.sr_error) <= *r.bound) ++c.covered;
  }
  return c;
}

// ---- martingale-length table -------------------------------------------------

// Row n holds m(d, d) ... m(0, d) for d = 2^(n+1) - 2, printed highest index
// first.
inline std::vector<std::uint32_t> m_table_row(unsigned n) {
  const std::uint64_t d = (std::uint64_t{2} << n) - 2;
  std::vector<std::uint32_t> row;
  for (std::uint64_t i = d + 1; i-- > 0;) row.push_back(m_closed_form(i, d, 0, 0));
  return row;
}

// The same row read off a Karatsuba DAG with exact inputs.
inline std::vector<std::uint32_t> dag_length_row(unsigned n) {
  const std::size_t len = std::size_t{1} << n;
  std::vector<Rational> a(len), b(len);
  for (std::size_t i = 0; i < len; ++i) {
    a[i] = Rational(static_cast<long>(i + 1));
    b[i] = Rational(static_cast<long>(2 * i + 1));
  }
  const PolyDag pd = karatsuba_dag(a, b);
  std::vector<std::uint32_t> row;
  for (std::size_t i = pd.output.size(); i-- > 0;) row.push_back(pd.dag.node(pd.output[i]).length);
  return row;
}

// ---- stagnation demo ---------------------------------------------------------

struct StagnationReport {
  Rational exact;
  double rn_final;
  double sr_final;
  double rn_error;
  double sr_error;
};

// Recursive sum 1 + increment + ... + increment (count terms) under RN and SR.
inline StagnationReport stagnation(const FpFormat& fmt, std::uint32_t count, double increment, std::uint64_t seed) {
  std::vector<Rational> terms;
  terms.reserve(count + 1);
  terms.emplace_back(1);
  const Rational inc = to_rational(increment);
  for (std::uint32_t i = 0; i < count; ++i) terms.push_back(inc);
  const ScalarDag sd = recursive_sum_dag(terms);
  const Rational& exact = sd.dag.node(sd.output).exact;
  const double rn = evaluate_rn(sd.dag, fmt).values[sd.output];
  const double sr = evaluate_sr(sd.dag, fmt, seed).values[sd.output];
  return {exact, rn, sr, relative_error(rn, exact), relative_error(sr, exact)};
}

// True when adding `increment` to 1 rounds back to 1 under RN.
inline bool stagnates_under_rn(const FpFormat& fmt, double increment) {
  return rn_round(exact_op(1.0, increment, Op::add), fmt).value == 1.0;
}

}  // namespace srb
