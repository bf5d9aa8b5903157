// srbound: stochastic-rounding error analysis from the command line.
//
// Exit status: 0 on success, 1 on analysis errors, 2 on usage errors.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "srbound/srbound.hpp"

namespace {

constexpr int kAnalysisError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

srb::FpFormat make_format(int t, const std::string& mode) {
  if (t < 2 || t > 52) throw UsageError("--t must lie in [2, 52]");
  return srb::FpFormat(t, mode == "paper" ? srb::UMode::half_ulp : srb::UMode::step_bound);
}

void require_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw UsageError("--lambda must lie in (0, 1)");
}

double parse_increment(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !(v > 0.0)) throw UsageError("--increment must be a positive number");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-rounding error analysis: martingale lengths, condition bounds, "
               "Azuma-Hoeffding bounds and Monte Carlo validation"};
  app.require_subcommand(1);

  std::string file;
  double lambda = 0.1;
  int t = 24;
  std::string u_mode = "step";
  std::uint32_t trials = 0;
  std::uint64_t seed = 1;

  auto* analyze = app.add_subcommand("analyze", "Per-output L, K, u and bound for a .srd program");
  analyze->add_option("file", file, "Program file")->required();
  analyze->add_option("--lambda", lambda, "Failure probability of the bound")->capture_default_str();
  analyze->add_option("--t", t, "Significand bits of the emulated format")->capture_default_str();
  analyze->add_option("--u-mode", u_mode, "Unit roundoff convention")
      ->check(CLI::IsMember({"step", "paper"}))
      ->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo SR evaluation of a .srd program (CSV)");
  simulate->add_option("file", file, "Program file")->required();
  simulate->add_option("--trials", trials, "Number of SR trials")->required();
  simulate->add_option("--seed", seed, "Base seed")->required();
  simulate->add_option("--lambda", lambda, "Failure probability of the bound")->capture_default_str();
  simulate->add_option("--t", t, "Significand bits of the emulated format")->capture_default_str();
  simulate->add_option("--u-mode", u_mode, "Unit roundoff convention")
      ->check(CLI::IsMember({"step", "paper"}))
      ->capture_default_str();

  unsigned n_min = 0, n_max = 0;
  std::string dist;
  auto* kara = app.add_subcommand("karatsuba", "Karatsuba central-coefficient experiment (CSV)");
  kara->add_option("--n-min", n_min, "Smallest n (2^n coefficients per operand)")->required();
  kara->add_option("--n-max", n_max, "Largest n")->required();
  kara->add_option("--dist", dist, "Coefficient distribution")->required()->check(CLI::IsMember({"unit", "sym"}));
  kara->add_option("--trials", trials, "SR trials per n")->required();
  kara->add_option("--seed", seed, "Base seed")->required();
  kara->add_option("--lambda", lambda, "Failure probability of the bound")->capture_default_str();
  kara->add_option("--t", t, "Significand bits of the emulated format")->capture_default_str();

  unsigned table_n = 3;
  auto* mtable = app.add_subcommand("mtable", "Karatsuba martingale lengths m(i, d)");
  mtable->add_option("--n", table_n, "Largest n (at most 8)")->required()->check(CLI::Range(0u, 8u));

  std::uint32_t count = 0;
  std::string increment;
  auto* stag = app.add_subcommand("stagnation", "Chain sum 1 + increment * count under RN and SR");
  stag->add_option("--t", t, "Significand bits")->required();
  stag->add_option("--count", count, "Number of increments")->required();
  stag->add_option("--increment", increment, "Increment (decimal or hex float)")->required();
  stag->add_option("--seed", seed, "Seed for the SR run")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (*analyze) {
      require_lambda(lambda);
      const auto fmt = make_format(t, u_mode);
      const srb::Dag dag = srb::dsl::compile(read_file(file));
      srb::write_analysis(std::cout, srb::analyze_outputs(dag, fmt, lambda));
    } else if (*simulate) {
      require_lambda(lambda);
      if (trials == 0) throw UsageError("--trials must be at least 1");
      const auto fmt = make_format(t, u_mode);
      const srb::Dag dag = srb::dsl::compile(read_file(file));
      const auto rows = srb::simulate(dag, fmt, trials, seed, lambda);
      srb::write_simulation_csv(std::cout, rows);
      const auto c = srb::coverage(rows);
      std::cerr << "coverage " << c.covered << '/' << c.counted << " = " << srb::format_double(c.fraction()) << '\n';
    } else if (*kara) {
      require_lambda(lambda);
      if (trials == 0) throw UsageError("--trials must be at least 1");
      if (n_min > n_max) throw UsageError("--n-min must not exceed --n-max");
      srb::KaratsubaConfig cfg{n_min, n_max, dist == "sym" ? srb::Dist::sym : srb::Dist::unit, trials, seed, lambda,
                               make_format(t, "step")};
      const auto rows = srb::karatsuba_experiment(cfg);
      srb::write_karatsuba_csv(std::cout, rows);
      const auto c = srb::coverage(rows);
      std::cerr << "coverage " << c.covered << '/' << c.counted << " = " << srb::format_double(c.fraction()) << '\n';
    } else if (*mtable) {
      std::cout << "n d m(d,d)...m(0,d)\n";
      for (unsigned n = 0; n <= table_n; ++n) {
        const auto row = srb::m_table_row(n);
        std::cout << n << ' ' << (2u << n) - 2;
        for (auto m : row) std::cout << ' ' << m;
        std::cout << '\n';
        if (n <= 6 && srb::dag_length_row(n) != row) {
          std::cerr << "error: closed form disagrees with the Karatsuba DAG at n = " << n << '\n';
          return kAnalysisError;
        }
      }
    } else if (*stag) {
      const auto fmt = make_format(t, "step");
      if (count == 0) throw UsageError("--count must be at least 1");
      const double inc = parse_increment(increment);
      if (!srb::stagnates_under_rn(fmt, inc))
        std::cerr << "warning: increment is not below the RN half-ulp threshold at 1.0\n";
      const auto r = srb::stagnation(fmt, count, inc, seed);
      std::cout << "mode,final,exact,rel_error\n";
      std::cout << "rn," << srb::format_double(r.rn_final) << ',' << srb::to_scientific(r.exact) << ','
                << srb::format_double(r.rn_error) << '\n';
      std::cout << "sr," << srb::format_double(r.sr_final) << ',' << srb::to_scientific(r.exact) << ','
                << srb::format_double(r.sr_error) << '\n';
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const srb::dsl::ParseError& e) {
    std::cerr << file << ':' << e.what() << '\n';
    return kAnalysisError;
  } catch (const std::exception& e) {
    std::cerr << (file.empty() ? "" : file + ": ") << "error: " << e.what() << '\n';
    return kAnalysisError;
  }
  return 0;
}
