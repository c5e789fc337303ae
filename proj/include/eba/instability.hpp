#pragma once

// Linear instability of the Kolmogorov family g_s = (gamma lambda/(sqrt2 pi)) sin(s x2) e_1.
//
// Linearizing about omega_s couples a mode (t, k2) only to (t, k2 +- s), so the
// eigenproblem splits into chains labelled by (t, r) with modes (t, s n + r).
// On a chain the coefficients e_n obey d_n e_n + e_{n-1} - e_{n+1} = 0 with
// d_n = A_n (gamma + sigma). A decaying solution exists iff f(sigma) = g(sigma),
// where f = -d_0 and g is the sum of the two tail continued fractions.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "eba/error.hpp"
#include "eba/format.hpp"
#include "eba/parallel.hpp"
#include "eba/spectral.hpp"

namespace eba {

inline constexpr double kSqrt2 = std::numbers::sqrt2;

struct KolmogorovSpec {
  int s;
  double lambda;
  double gamma;
};

inline void validate(const KolmogorovSpec& k) {
  if (k.s < 1) throw ParameterError("Kolmogorov wavenumber s must be >= 1");
  if (!(k.lambda >= 0.0)) throw ParameterError("Kolmogorov amplitude lambda must be >= 0");
  if (!(k.gamma > 0.0)) throw ParameterError("gamma must be positive");
}

/// g_s = ((gamma lambda / (sqrt2 pi)) sin(s x2), 0).
inline VectorField kolmogorov_forcing(const KolmogorovSpec& k, const FourierGrid& grid) {
  validate(k);
  if (k.s > grid.kmax())
    throw ParameterError("forcing wavenumber s = " + std::to_string(k.s) + " beyond de-aliased band kmax = " +
                         std::to_string(grid.kmax()));
  VectorField g(grid);
  const double amp = k.gamma * k.lambda / (kSqrt2 * kPi);
  // sin(s x2) = (e^{i s x2} - e^{-i s x2}) / (2i)
  g.u1.set(0, k.s, Complex(0.0, -0.5 * amp));
  return g;
}

/// Stationary vorticity omega_s = -(1/(sqrt2 pi)) lambda s cos(s x2) = curl g_s / gamma.
inline SpectralField kolmogorov_vorticity(const KolmogorovSpec& k, const FourierGrid& grid) {
  validate(k);
  if (k.s > grid.kmax()) throw ParameterError("wavenumber s beyond de-aliased band");
  SpectralField w(grid);
  w.set(0, k.s, Complex(-0.5 * k.lambda * k.s / (kSqrt2 * kPi), 0.0));
  return w;
}

/// Lambda = lambda / (2 sqrt2 pi (1 + alpha s^2)).
inline double chain_lambda(double lambda, int s, double alpha) {
  return lambda / (2.0 * kSqrt2 * kPi * (1.0 + alpha * s * s));
}

/// One chain of modes (t, s n + r), n in Z.
struct Chain {
  int s;
  int t;
  int r;
  double alpha;
  double gamma;
  double Lambda;

  double ksq_at(long n) const {
    const double k2 = static_cast<double>(s) * static_cast<double>(n) + r;
    return static_cast<double>(t) * t + k2 * k2;
  }
  /// 1/A_n = Lambda t (K - s^2) / (K + alpha K^2), K = t^2 + (s n + r)^2.
  double inv_A(long n) const {
    const double K = ksq_at(n);
    return Lambda * t * (K - static_cast<double>(s) * s) / (K + alpha * K * K);
  }
  double A(long n) const { return 1.0 / inv_A(n); }
  /// d_n(sigma) = A_n (gamma + sigma).
  double d(long n, double sigma) const { return (gamma + sigma) / inv_A(n); }
};

inline Chain make_chain(int s, int t, int r, double alpha, double gamma, double Lambda) {
  if (s < 1 || t < 1) throw ParameterError("chain requires s >= 1 and t >= 1");
  if (!(alpha >= 0.0) || !(gamma > 0.0) || !(Lambda > 0.0))
    throw ParameterError("chain requires alpha >= 0, gamma > 0, Lambda > 0");
  return Chain{s, t, r, alpha, gamma, Lambda};
}

// ---------------------------------------------------------------------------
// Region A(delta)

inline void check_delta(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0 / std::sqrt(3.0)))
    throw ParameterError("delta must lie in (0, 1/sqrt(3)), got " + format_double(delta));
}

/// Strict membership test; integer comparisons wherever possible.
inline bool in_region(int s, double delta, int t, int r) {
  const long S = s, T = t, R = r;
  if (!(3 * (T * T + R * R) < S * S)) return false;
  if (!(T * T + (R - S) * (R - S) > S * S)) return false;
  if (!(T * T + (R + S) * (R + S) > S * S)) return false;
  if (!(static_cast<double>(t) >= delta * s)) return false;
  return -S < 6 * R && 6 * R < S;
}

/// All integer (t, r) in A(delta), ordered by (t, r).
inline std::vector<std::pair<int, int>> region_lattice(int s, double delta) {
  check_delta(delta);
  if (s < 1) throw ParameterError("s must be >= 1");
  std::vector<std::pair<int, int>> out;
  for (int t = 1; 3 * t * t < s * s; ++t)
    for (int r = -s / 6; r <= s / 6; ++r)
      if (in_region(s, delta, t, r)) out.emplace_back(t, r);
  return out;
}

// ---------------------------------------------------------------------------
// Continued fractions

struct ContinuedFractionValue {
  double value;      // evaluated at depth 2 n_max
  double change;     // |value(2 n_max) - value(n_max)|
  bool converged;    // change <= 1e-10
};

namespace detail {

/// 1/(d_{dir} + 1/(d_{2 dir} + ...)) truncated at depth with tail d_{depth}.
inline double cf_tail(const Chain& c, double sigma, int dir, long depth) {
  double x = c.d(dir * depth, sigma);
  for (long n = depth - 1; n >= 1; --n) x = c.d(dir * n, sigma) + 1.0 / x;
  return 1.0 / x;
}

inline double cf_sum(const Chain& c, double sigma, long depth) {
  return cf_tail(c, sigma, -1, depth) + cf_tail(c, sigma, +1, depth);
}

}  // namespace detail

/// g(sigma) = [1/(d_{-1} + 1/(d_{-2} + ...))] + [1/(d_1 + 1/(d_2 + ...))].
inline ContinuedFractionValue continued_fraction_g(const Chain& c, double sigma, long n_max) {
  if (!(sigma > -c.gamma)) throw ParameterError("continued_fraction_g requires sigma > -gamma");
  if (n_max < 2) throw ParameterError("continued_fraction_g requires n_max >= 2");
  const double coarse = detail::cf_sum(c, sigma, n_max);
  const double fine = detail::cf_sum(c, sigma, 2 * n_max);
  const double change = std::abs(fine - coarse);
  return {fine, change, change <= 1e-10};
}

/// g(sigma) with the depth doubled until successive values agree to
/// near machine precision.
inline double continued_fraction_g_adaptive(const Chain& c, double sigma) {
  long depth = 32;
  double prev = detail::cf_sum(c, sigma, depth);
  for (int it = 0; it < 16; ++it) {
    depth *= 2;
    const double next = detail::cf_sum(c, sigma, depth);
    if (std::abs(next - prev) <= 1e-15 * std::abs(next)) return next;
    prev = next;
  }
  return prev;
}

/// f(sigma) = -d_0 = (gamma + sigma)(K0 + alpha K0^2) / (Lambda t (s^2 - K0)).
inline double f_sigma(const Chain& c, double sigma) { return -c.d(0, sigma); }

// ---------------------------------------------------------------------------
// Eigenvalue

/// Two-sided bounds on sigma for chains in A(delta).
struct SigmaBounds {
  double lower;
  double upper;
};

inline SigmaBounds sigma_bounds(const Chain& c, double delta) {
  const double q = (1.0 + c.alpha * c.s * c.s);
  return {c.Lambda * 21.0 * kSqrt2 * delta * delta * c.s / (55.0 * q) - c.gamma,
          c.Lambda * kSqrt2 * c.s / (delta * q) - c.gamma};
}

/// Bounds on Lambda_0 (sigma(Lambda_0) = 0) for chains in A(delta).
inline SigmaBounds lambda0_bounds(int s, double delta, double alpha, double gamma) {
  const double q = (1.0 + alpha * s * s) / s;
  return {gamma * delta / kSqrt2 * q, 55.0 * gamma / (21.0 * kSqrt2 * delta * delta) * q};
}

/// The unique real sigma > -gamma with f(sigma) = g(sigma), by bisection.
inline double solve_sigma(const Chain& c) {
  const double eps = 1e-10 * c.gamma;
  auto h = [&](double sigma) { return f_sigma(c, sigma) - continued_fraction_g_adaptive(c, sigma); };

  // (gamma + sigma)^2 <= 2 Lambda^2 t^2 (s^2 - K0) / ((K0 + alpha K0^2)(1 + alpha s^2))
  // for chains in A(delta); start just above it and expand if needed.
  const double K0 = c.ksq_at(0);
  const double S2 = static_cast<double>(c.s) * c.s;
  double hi_sq = 2.0 * c.Lambda * c.Lambda * c.t * c.t * std::max(S2 - K0, 1.0) /
                 ((K0 + c.alpha * K0 * K0) * (1.0 + c.alpha * S2));
  double lo = -c.gamma + eps;
  double hi = -c.gamma + 1.1 * std::sqrt(hi_sq) + eps;
  if (h(lo) >= 0.0) {
    std::ostringstream os;
    os << "solve_sigma: no sign change at the lower end for chain (s,t,r)=(" << c.s << "," << c.t << "," << c.r
       << "): f=" << f_sigma(c, lo) << " g=" << continued_fraction_g_adaptive(c, lo);
    throw NumericalError(os.str());
  }
  for (int it = 0; h(hi) <= 0.0; ++it) {
    if (it > 200) {
      std::ostringstream os;
      os << "solve_sigma: bracket failure for chain (s,t,r)=(" << c.s << "," << c.t << "," << c.r
         << "): f(hi)=" << f_sigma(c, hi) << " g(hi)=" << continued_fraction_g_adaptive(c, hi);
      throw NumericalError(os.str());
    }
    hi = -c.gamma + 2.0 * (hi + c.gamma);
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-12 * std::max({std::abs(lo), std::abs(hi), c.gamma})) break;
  }
  return 0.5 * (lo + hi);
}

/// Lambda_0 with sigma(Lambda_0) = 0, i.e. f = g at sigma = 0 as a function of Lambda.
inline double solve_lambda0(const Chain& c) {
  auto h = [&](double Lambda) {
    Chain ch = c;
    ch.Lambda = Lambda;
    return f_sigma(ch, 0.0) - continued_fraction_g_adaptive(ch, 0.0);
  };
  // sigma increases with Lambda, so h decreases in Lambda.
  double lo = 1e-3 * c.gamma, hi = c.gamma;
  for (int it = 0; h(lo) <= 0.0; ++it) {
    if (it > 200) throw NumericalError("solve_lambda0: cannot bracket from below");
    lo *= 0.5;
  }
  for (int it = 0; h(hi) >= 0.0; ++it) {
    if (it > 200) throw NumericalError("solve_lambda0: cannot bracket from above");
    hi *= 2.0;
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-14 * hi) break;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Tridiagonal matrix oracle

/// Truncation of (gamma + sigma) e_n = (e_{n+1} - e_{n-1}) / A_n to
/// n in [-depth, depth]: zero diagonal, off-diagonals +-1/A_n.
inline Eigen::MatrixXd chain_matrix(const Chain& c, long depth) {
  const long size = 2 * depth + 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  for (long i = 0; i < size; ++i) {
    const double ia = c.inv_A(i - depth);
    if (i + 1 < size) m(i, i + 1) = ia;
    if (i > 0) m(i, i - 1) = -ia;
  }
  return m;
}

/// All eigenvalues sigma = mu - gamma of the truncated chain operator.
inline std::vector<std::complex<double>> chain_matrix_spectrum(const Chain& c, long depth) {
  if (depth < 1) throw ParameterError("chain matrix depth must be >= 1");
  Eigen::EigenSolver<Eigen::MatrixXd> es(chain_matrix(c, depth), false);
  if (es.info() != Eigen::Success) throw NumericalError("chain_matrix_spectrum: eigen-solver failed");
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(es.eigenvalues().size()));
  for (const auto& mu : es.eigenvalues()) out.emplace_back(mu.real() - c.gamma, mu.imag());
  return out;
}

/// Largest real eigenvalue sigma of the truncated chain operator.
inline double chain_matrix_eigen(const Chain& c, long depth) {
  const auto spec = chain_matrix_spectrum(c, depth);
  double scale = c.gamma;
  for (const auto& z : spec) scale = std::max(scale, std::abs(z + c.gamma));
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& z : spec)
    if (std::abs(z.imag()) <= 1e-9 * scale) best = std::max(best, z.real());
  if (!std::isfinite(best)) throw NumericalError("chain_matrix_eigen: no real eigenvalue");
  return best;
}

/// Largest Re(sigma) of the linearization about omega_s over all chains with
/// 1 <= t <= t_max and modes inside |k2| <= k2_max (the retained band of a grid).
inline double kolmogorov_leading_eigenvalue(int s, double Lambda, double alpha, double gamma, int t_max,
                                            int k2_max) {
  double best = -gamma;  // t = 0 modes decay at exactly -gamma
  for (int t = 1; t <= t_max; ++t) {
    for (int r = 0; r < s; ++r) {
      const long n_lo = -static_cast<long>((k2_max + r) / s);
      const long n_hi = static_cast<long>((k2_max - r) / s);
      if (n_hi < n_lo) continue;
      const long size = n_hi - n_lo + 1;
      const Chain c = make_chain(s, t, r, alpha, gamma, Lambda);
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
      for (long i = 0; i < size; ++i) {
        const double ia = c.inv_A(n_lo + i);
        if (i + 1 < size) m(i, i + 1) = ia;
        if (i > 0) m(i, i - 1) = -ia;
      }
      Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
      if (es.info() != Eigen::Success) throw NumericalError("kolmogorov_leading_eigenvalue: eigen-solver failed");
      for (const auto& mu : es.eigenvalues()) best = std::max(best, mu.real() - gamma);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Unstable manifold

/// lambda(s) = (110 pi / 21) gamma delta^{-2} (1 + alpha s^2)^2 / s.
inline double lambda_choice(int s, double delta, double alpha, double gamma) {
  check_delta(delta);
  if (s < 1) throw ParameterError("s must be >= 1");
  const double q = 1.0 + alpha * s * s;
  return 110.0 * kPi / 21.0 * gamma / (delta * delta) * q * q / s;
}

struct ChainReport {
  int s;
  int t;
  int r;
  double delta;
  double Lambda;
  double sigma;
  double sigma_lower_bound;
  double sigma_upper_bound;
  double oracle_sigma;
};

/// Solves every chain of A(delta) at the given Lambda. oracle_depth <= 0 skips
/// the matrix oracle (reported as NaN).
inline std::vector<ChainReport> analyze_region(int s, double delta, double alpha, double gamma, double Lambda,
                                               long oracle_depth, int threads = 1) {
  const auto lattice = region_lattice(s, delta);
  std::vector<ChainReport> out(lattice.size());
  parallel_for(lattice.size(), threads, [&](std::size_t i) {
    const auto [t, r] = lattice[i];
    const Chain c = make_chain(s, t, r, alpha, gamma, Lambda);
    const SigmaBounds b = sigma_bounds(c, delta);
    const double oracle = oracle_depth > 0 ? chain_matrix_eigen(c, oracle_depth) : std::nan("");
    out[i] = ChainReport{s, t, r, delta, Lambda, solve_sigma(c), b.lower, b.upper, oracle};
  });
  return out;
}

/// 2 |A(delta) cap Z^2| with every chain certified unstable at the lambda(s)
/// of lambda_choice; throws CertificationError otherwise.
inline int unstable_count(int s, double delta, double alpha, double gamma, int threads = 1) {
  const double Lambda = chain_lambda(lambda_choice(s, delta, alpha, gamma), s, alpha);
  const auto reports = analyze_region(s, delta, alpha, gamma, Lambda, 0, threads);
  for (const auto& rep : reports) {
    if (!(rep.sigma > 0.0)) {
      std::ostringstream os;
      os << "chain (s,t,r)=(" << rep.s << "," << rep.t << "," << rep.r << ") not unstable: sigma=" << rep.sigma;
      throw CertificationError(os.str());
    }
  }
  return 2 * static_cast<int>(reports.size());
}

}  // namespace eba
