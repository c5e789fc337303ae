#pragma once

// Two-sided attractor dimension estimates
//   c1 ||curl g_s||^2 / (alpha gamma^4) <= dim <= ||curl g||^2 / (8 pi alpha gamma^4).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "eba/error.hpp"
#include "eba/format.hpp"
#include "eba/inequalities.hpp"
#include "eba/instability.hpp"
#include "eba/spectral.hpp"

namespace eba {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw ParameterError(std::string(what) + " must be positive");
}

/// ||curl g||^2 / (8 pi alpha gamma^4)
inline double upper_bound(double alpha, double gamma, double curl_g_norm_sq) {
  require_positive(alpha, "alpha");
  require_positive(gamma, "gamma");
  require_positive(curl_g_norm_sq, "||curl g||^2");
  return curl_g_norm_sq / (8.0 * kPi * alpha * gamma * gamma * gamma * gamma);
}

/// -gamma n + (B2/sqrt2) n^{1/2} ||curl g|| / (sqrt(alpha) gamma)
inline double trace_bound_q(double n, double alpha, double gamma, double curl_g_norm) {
  return -gamma * n + kB2 / std::numbers::sqrt2 * std::sqrt(n) * curl_g_norm / (std::sqrt(alpha) * gamma);
}

/// Positive root of trace_bound_q in n.
inline double trace_bound_root(double alpha, double gamma, double curl_g_norm) {
  const double c = kB2 / std::numbers::sqrt2 * curl_g_norm / (std::sqrt(alpha) * gamma * gamma);
  return c * c;
}

/// (1/8)(21/(110 pi))^2
inline double lower_bound_prefactor() {
  const double q = 21.0 / (110.0 * kPi);
  return q * q / 8.0;
}

/// Area of A(delta) at s = 1 by midpoint counting on a res x res grid over
/// t in [0, 1/sqrt3], r in [-1/6, 1/6]. For each t-row the admissible r form
/// one interval, so the count per row is exact.
inline double area_a(double delta, int res = 1000) {
  check_delta(delta);
  if (res < 10) throw ParameterError("area_a: resolution too low");
  const double t_hi = 1.0 / std::sqrt(3.0);
  const double ht = t_hi / res;
  const double hr = (1.0 / 3.0) / res;
  long count = 0;
  for (int i = 0; i < res; ++i) {
    const double t = (i + 0.5) * ht;
    if (t < delta) continue;
    const double disc = 1.0 / 3.0 - t * t;
    if (disc <= 0.0) continue;
    const double circ = 1.0 - std::sqrt(1.0 - t * t);
    const double lo = std::max({-1.0 / 6.0, -std::sqrt(disc), -circ});
    const double hi = std::min({1.0 / 6.0, std::sqrt(disc), circ});
    if (!(hi > lo)) continue;
    // r_j = -1/6 + (j + 1/2) hr with lo < r_j < hi
    const double jlo = (lo + 1.0 / 6.0) / hr - 0.5;
    const double jhi = (hi + 1.0 / 6.0) / hr - 0.5;
    const long first = std::max(0L, static_cast<long>(std::floor(jlo)) + 1);
    const long last = std::min(static_cast<long>(res) - 1, static_cast<long>(std::ceil(jhi)) - 1);
    if (last >= first) count += last - first + 1;
  }
  return static_cast<double>(count) * ht * hr;
}

struct LowerBoundConstant {
  double c1;
  double delta_star;
  double max_a_delta4;
};

/// Maximizes a(delta) delta^4 on a 200-point grid, then refines by golden
/// section between the neighbours of the best grid point.
inline LowerBoundConstant lower_bound_constant(int res = 1000) {
  const double lo = 0.01, hi = 1.0 / std::sqrt(3.0) - 0.01;
  constexpr int points = 200;
  auto objective = [res](double d) { return area_a(d, res) * d * d * d * d; };
  std::vector<double> vals(points);
  int best = 0;
  for (int i = 0; i < points; ++i) {
    vals[i] = objective(lo + (hi - lo) * i / (points - 1));
    if (vals[i] > vals[best]) best = i;
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / (points - 1);
  double b = lo + (hi - lo) * std::min(best + 1, points - 1) / (points - 1);
  double best_x = lo + (hi - lo) * best / (points - 1);
  double best_v = vals[best];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 60 && b - a > 1e-9; ++it) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    }
    if (f1 > best_v) best_v = f1, best_x = x1;
    if (f2 > best_v) best_v = f2, best_x = x2;
  }
  return {best_v * lower_bound_prefactor(), best_x, best_v};
}

struct DimensionReport {
  double alpha;
  double gamma;
  int s;
  double lambda;
  double curl_g_sq;  // ||curl g_s||^2 = gamma^2 lambda^2 s^2
  double upper;
  double lower;
  double constant_c1;
  double delta_star;
};

/// s = ceil(1/sqrt(alpha)), guarded against rounding when 1/sqrt(alpha) is an integer.
inline int kolmogorov_s_for(double alpha) {
  require_positive(alpha, "alpha");
  const double x = 1.0 / std::sqrt(alpha);
  return static_cast<int>(std::ceil(x * (1.0 - 1e-12)));
}

/// Both bounds for the Kolmogorov forcing g_s with s = ceil(1/sqrt(alpha)).
inline DimensionReport lower_bound(double alpha, double gamma, const LowerBoundConstant& c) {
  require_positive(alpha, "alpha");
  require_positive(gamma, "gamma");
  const int s = kolmogorov_s_for(alpha);
  if (s < 4 || region_lattice(s, c.delta_star).empty())
    throw CertificationError("no lower bound certified at this alpha = " + format_double(alpha));
  const double lambda = lambda_choice(s, c.delta_star, alpha, gamma);
  const double curl_sq = gamma * gamma * lambda * lambda * s * s;
  const double g4 = gamma * gamma * gamma * gamma;
  return {alpha, gamma, s, lambda, curl_sq, upper_bound(alpha, gamma, curl_sq), c.c1 * curl_sq / (alpha * g4),
          c.c1, c.delta_star};
}

inline DimensionReport lower_bound(double alpha, double gamma) { return lower_bound(alpha, gamma, lower_bound_constant()); }

}  // namespace eba
