#pragma once

// Verification suites behind `eba verify`. Each suite yields CSV rows ending
// in a margin column and PASS/FAIL.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "eba/format.hpp"
#include "eba/inequalities.hpp"

namespace eba {

struct SuiteResult {
  std::string name;
  std::string columns;
  std::vector<std::string> rows;
  bool pass = true;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int trials = 1000;    // rho-l2 trials in total over the (n, m) grid
  double tol = 1e-10;   // lattice/Poisson agreement
  int threads = 1;
};

inline const char* status(bool ok) { return ok ? "PASS" : "FAIL"; }

/// The 61 log-spaced values of m in [0.1, 16].
inline std::vector<double> lattice_m_grid() { return log_grid(0.1, 16.0, 61); }

inline SuiteResult verify_lattice_F(const VerifyOptions&) {
  SuiteResult r{"lattice-F", "m,F_direct,tail_bound,F_plus_tail,margin,status", {}, true};
  for (double m : lattice_m_grid()) {
    const auto s = lattice_F(m, 4000);
    const bool ok = s.margin > 0.0;
    r.pass = r.pass && ok;
    r.rows.push_back(csv_row(m, s.F_direct, s.tail_bound, s.F_direct + s.tail_bound, s.margin, status(ok)));
  }
  // Large-m asymptotics F = pi - 1/m^2 + O(e^{-Cm}).
  const auto s4 = lattice_F(4.0, 1000000);
  const double dev = std::abs(s4.F_direct - (kPi - 1.0 / 16.0));
  const bool ok = dev + s4.tail_bound < 1e-6;
  r.pass = r.pass && ok;
  r.rows.push_back(csv_row(4.0, s4.F_direct, s4.tail_bound, s4.F_direct + s4.tail_bound, 1e-6 - dev - s4.tail_bound,
                           status(ok)));
  return r;
}

inline SuiteResult verify_poisson_F(const VerifyOptions& o) {
  SuiteResult r{"poisson-F", "m,F_lattice,F_poisson,abs_diff,margin,status", {}, true};
  for (double m : {1.0, 2.0, 4.0}) {
    const double fl = lattice_F(m, 2000000).F_direct;
    const double fp = poisson_F(m);
    const double d = std::abs(fl - fp);
    const bool ok = d < o.tol;
    r.pass = r.pass && ok;
    r.rows.push_back(csv_row(m, fl, fp, d, o.tol - d, status(ok)));
  }
  // F increasing on (0, 1]
  double prev = -1.0;
  bool mono = true;
  for (double m : log_grid(0.05, 1.0, 40)) {
    const double f = poisson_F(m);
    mono = mono && f > prev;
    prev = f;
  }
  r.pass = r.pass && mono;
  r.rows.push_back(csv_row(std::string("monotone(0.05..1)"), prev, prev, 0.0, mono ? 1.0 : -1.0, status(mono)));
  return r;
}

inline SuiteResult verify_k1_bound(const VerifyOptions&) {
  SuiteResult r{"k1-bound", "x,K1,bound,margin,status", {}, true};
  for (double x : log_grid(0.01, 50.0, 500)) {
    const double k = bessel_k1(x);
    const double b = k1_upper_bound(x);
    const bool ok = b - k > 0.0;
    r.pass = r.pass && ok;
    r.rows.push_back(csv_row(x, k, b, b - k, status(ok)));
  }
  return r;
}

inline SuiteResult verify_psi(const VerifyOptions&) {
  SuiteResult r{"psi", "quantity,value,expected,margin,status", {}, true};
  auto add = [&](const char* name, double v, double expected, double tol) {
    const double margin = tol - std::abs(v - expected);
    r.pass = r.pass && margin > 0.0;
    r.rows.push_back(csv_row(std::string(name), v, expected, margin, status(margin > 0.0)));
  };
  add("Psi(1)", psi_big(1.0), -0.141093, 1e-5);
  add("x0", phi_argmax(), 1.5936, 1e-3);
  const auto [m1, m2] = psi_thresholds();
  add("m1", m1, 0.47824, 1e-4);
  add("m2", m2, 0.35868, 1e-4);
  // Psi decreasing on [1, 10] and negative at 1.
  double worst = std::numeric_limits<double>::infinity();
  double prev = psi_big(1.0);
  for (int i = 1; i <= 90; ++i) {
    const double v = psi_big(1.0 + 0.1 * i);
    worst = std::min(worst, prev - v);
    prev = v;
  }
  r.pass = r.pass && worst > 0.0;
  r.rows.push_back(csv_row(std::string("Psi decreasing on [1,10]"), worst, 0.0, worst, status(worst > 0.0)));
  return r;
}

inline SuiteResult verify_rho_l2(const VerifyOptions& o) {
  SuiteResult r{"rho-l2", "n,m,solenoidal,trials,worst_ratio,violations,margin,status", {}, true};
  const int grid_n = 16;
  const int per = (o.trials + 8) / 9;
  for (int n : {1, 4, 16}) {
    for (double m : {0.5, 1.0, 4.0}) {
      for (bool sol : {false, true}) {
        const std::uint64_t seed = o.seed * 1000003ull + static_cast<std::uint64_t>(n) * 131 +
                                   static_cast<std::uint64_t>(m * 64) + (sol ? 7 : 0);
        const auto samples = rho_l2_check(n, m, per, grid_n, seed, sol, o.threads);
        double worst = 0.0;
        int bad = 0;
        for (const auto& s : samples) {
          worst = std::max(worst, s.rho_l2 / s.bound);
          if (!(s.rho_l2 <= s.bound)) ++bad;
        }
        const bool ok = bad == 0;
        r.pass = r.pass && ok;
        r.rows.push_back(csv_row(n, m, sol ? 1 : 0, per, worst, bad, 1.0 - worst, status(ok)));
      }
    }
  }
  return r;
}

inline SuiteResult verify_trace_k2(const VerifyOptions& o) {
  SuiteResult r{"trace-k2", "m,trials,worst_ratio,violations,margin,status", {}, true};
  const int grid_n = 32, basis = 40, w_band = 2;
  for (double m : {0.5, 1.0, 2.0}) {
    double worst = 0.0;
    int bad = 0;
    for (int t = 0; t < 100; ++t) {
      const auto v = random_nonnegative_potential(grid_n, w_band, o.seed, static_cast<std::uint64_t>(t));
      const auto c = trace_k2_check(v, grid_n, m, basis);
      const double ratio = (c.lhs + c.tail) / c.rhs;
      worst = std::max(worst, ratio);
      if (!(ratio <= 1.0)) ++bad;
    }
    const bool ok = bad == 0;
    r.pass = r.pass && ok;
    r.rows.push_back(csv_row(m, 100, worst, bad, 1.0 - worst, status(ok)));
  }
  return r;
}

inline std::vector<SuiteResult> run_verify(const std::string& suite, const VerifyOptions& o) {
  std::vector<SuiteResult> out;
  const bool all = suite == "all";
  if (all || suite == "lattice-F") out.push_back(verify_lattice_F(o));
  if (all || suite == "poisson-F") out.push_back(verify_poisson_F(o));
  if (all || suite == "k1-bound") out.push_back(verify_k1_bound(o));
  if (all || suite == "psi") out.push_back(verify_psi(o));
  if (all || suite == "rho-l2") out.push_back(verify_rho_l2(o));
  if (all || suite == "trace-k2") out.push_back(verify_trace_k2(o));
  return out;
}

}  // namespace eba
