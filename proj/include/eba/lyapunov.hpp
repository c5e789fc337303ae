#pragma once

// Global Lyapunov exponents by the Benettin method. Tangent vectors are
// divergence-free velocity fields advanced by the derivative of the same
// integrating-factor RK4 scheme as the base flow, and re-orthonormalized in
// the alpha inner product every renorm_every steps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "eba/dynamics.hpp"
#include "eba/error.hpp"
#include "eba/format.hpp"
#include "eba/parallel.hpp"
#include "eba/spectral.hpp"

namespace eba {

struct LyapunovOptions {
  int n_vectors = 1;
  int renorm_every = 10;
  double dt = 0.01;
  double t_transient = -1.0;  // < 0: 50 / gamma
  double t_average = -1.0;    // < 0: 500 / gamma
  std::uint64_t seed = 1;
  int n_blocks = 10;
  int threads = 1;
  std::function<void(const std::string&)> warn;
};

struct LyapunovReport {
  std::vector<double> exponents;     // descending
  std::vector<double> std_errors;    // block-average standard errors, same order
  std::vector<double> partial_sums;  // q(n)
  double lyapunov_dimension = 0.0;   // Kaplan-Yorke
  bool dimension_saturated = false;  // q(n) >= 0 for every computed n
  double averaging_time = 0.0;
  int reseeds = 0;
};

/// Kaplan-Yorke dimension j + q(j) / |mu_{j+1}|, j the last index with q(j) >= 0.
/// Returns {dimension, saturated}; saturated means q stays nonnegative so the
/// value is only a lower estimate.
inline std::pair<double, bool> kaplan_yorke(const std::vector<double>& sorted_exponents) {
  double q = 0.0;
  for (std::size_t j = 0; j < sorted_exponents.size(); ++j) {
    const double next = q + sorted_exponents[j];
    if (next < 0.0) return {static_cast<double>(j) + q / std::abs(sorted_exponents[j]), false};
    q = next;
  }
  return {static_cast<double>(sorted_exponents.size()), !sorted_exponents.empty()};
}

namespace detail {

/// Two-pass modified Gram-Schmidt in the alpha inner product. Returns the
/// diagonal r_jj; columns whose residual falls below 1e-10 of their
/// pre-orthogonalization norm are flagged in `collapsed`.
inline std::vector<double> alpha_mgs(std::vector<VectorField>& v, double alpha, std::vector<bool>& collapsed) {
  std::vector<double> r(v.size());
  collapsed.assign(v.size(), false);
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double before = alpha_norm(v[j], alpha);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < j; ++i) v[j].axpy(-alpha_inner(v[j], v[i], alpha), v[i]);
    const double nrm = alpha_norm(v[j], alpha);
    r[j] = nrm;
    if (!(nrm > 1e-10 * before) || !std::isfinite(nrm)) {
      collapsed[j] = true;
      continue;
    }
    v[j] *= 1.0 / nrm;
  }
  return r;
}

inline VectorField fresh_tangent(const FourierGrid& g, std::uint64_t seed) {
  return random_solenoidal(g, seed, 2.0);
}

/// Re-draws collapsed columns and orthonormalizes them against the rest.
inline int reseed_collapsed(std::vector<VectorField>& v, double alpha, const std::vector<bool>& collapsed,
                            std::uint64_t& seed_counter) {
  int count = 0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!collapsed[j]) continue;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 16) throw NumericalError("lyapunov: cannot re-seed collapsed tangent vector");
      v[j] = fresh_tangent(v[j].grid(), seed_counter++);
      const double before = alpha_norm(v[j], alpha);
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < v.size(); ++i)
          if (i != j && !collapsed[i]) v[j].axpy(-alpha_inner(v[j], v[i], alpha), v[i]);
      for (std::size_t i = 0; i < j; ++i)
        if (collapsed[i]) v[j].axpy(-alpha_inner(v[j], v[i], alpha), v[i]);
      const double nrm = alpha_norm(v[j], alpha);
      if (nrm > 1e-6 * before) {
        v[j] *= 1.0 / nrm;
        break;
      }
    }
    ++count;
  }
  return count;
}

}  // namespace detail

/// Advances base and tangents together by one step; tangents are updated in place.
inline SimState step_with_tangents(const SimState& s, double dt, std::vector<VectorField>& tangents,
                                   int threads = 1) {
  auto st = detail::rk4_stages(s, dt);
  const double e1 = std::exp(-0.5 * s.params.gamma * dt);
  const double e2 = e1 * e1;
  const LinearizedOperator l0(s.omega, s.params);
  const LinearizedOperator la(st.a, s.params);
  const LinearizedOperator lb(st.b, s.params);
  const LinearizedOperator lc(st.c, s.params);
  parallel_for(tangents.size(), threads, [&](std::size_t j) {
    VectorField& th = tangents[j];
    const VectorField m1 = l0.advective(th);
    VectorField a = th;
    a.axpy(0.5 * dt, m1);
    a *= e1;
    const VectorField m2 = la.advective(a);
    VectorField b = th;
    b *= e1;
    b.axpy(0.5 * dt, m2);
    const VectorField m3 = lb.advective(b);
    VectorField c = th;
    c *= e2;
    c.axpy(dt * e1, m3);
    const VectorField m4 = lc.advective(c);
    th *= e2;
    th.axpy(dt / 6.0 * e2, m1);
    th.axpy(dt / 3.0 * e1, m2);
    th.axpy(dt / 3.0 * e1, m3);
    th.axpy(dt / 6.0, m4);
  });
  return SimState(std::move(st.next), s.params, s.forcing_curl, s.time + dt);
}

inline LyapunovReport lyapunov_spectrum(const SimState& initial, const LyapunovOptions& opts) {
  const double gamma = initial.params.gamma;
  const double alpha = initial.params.alpha;
  if (opts.n_vectors < 1) throw ParameterError("lyapunov: need at least one tangent vector");
  if (opts.renorm_every < 1) throw ParameterError("lyapunov: renorm_every must be >= 1");
  if (opts.n_blocks < 2) throw ParameterError("lyapunov: n_blocks must be >= 2");
  if (!(opts.dt > 0.0)) throw ParameterError("lyapunov: dt must be positive");
  const double t_transient = opts.t_transient < 0.0 ? 50.0 / gamma : opts.t_transient;
  const double t_average = opts.t_average < 0.0 ? 500.0 / gamma : opts.t_average;

  const long n_renorm = steps_between(0.0, t_average, opts.dt) / opts.renorm_every;
  if (n_renorm < opts.n_blocks)
    throw ParameterError("lyapunov: t_average too short, need at least n_blocks * renorm_every * dt");

  const FourierGrid& g = initial.grid();
  const std::size_t n = static_cast<std::size_t>(opts.n_vectors);

  std::uint64_t seed_counter = opts.seed * 0x9e3779b97f4a7c15ull + 1;
  std::vector<VectorField> tangents;
  tangents.reserve(n);
  for (std::size_t j = 0; j < n; ++j) tangents.push_back(detail::fresh_tangent(g, seed_counter++));
  std::vector<bool> collapsed;
  LyapunovReport rep;
  detail::alpha_mgs(tangents, alpha, collapsed);
  rep.reseeds += detail::reseed_collapsed(tangents, alpha, collapsed, seed_counter);

  // Transient: base and tangents both evolve, growth is discarded, so the
  // tangent frame is aligned with the leading directions before averaging.
  SimState state = initial;
  const long transient_steps = steps_between(0.0, t_transient, opts.dt);
  for (long k = 1; k <= transient_steps; ++k) {
    state = step_with_tangents(state, opts.dt, tangents, opts.threads);
    if (k % opts.renorm_every == 0 || k == transient_steps) {
      detail::alpha_mgs(tangents, alpha, collapsed);
      rep.reseeds += detail::reseed_collapsed(tangents, alpha, collapsed, seed_counter);
    }
  }

  const int nb = opts.n_blocks;
  std::vector<std::vector<double>> block_log(static_cast<std::size_t>(nb), std::vector<double>(n, 0.0));
  std::vector<double> block_time(static_cast<std::size_t>(nb), 0.0);
  const double interval = opts.renorm_every * opts.dt;

  for (long m = 0; m < n_renorm; ++m) {
    for (int k = 0; k < opts.renorm_every; ++k) state = step_with_tangents(state, opts.dt, tangents, opts.threads);
    const auto r = detail::alpha_mgs(tangents, alpha, collapsed);
    const std::size_t blk = static_cast<std::size_t>(m * nb / n_renorm);
    for (std::size_t j = 0; j < n; ++j) block_log[blk][j] += std::log(std::max(r[j], 1e-300));
    block_time[blk] += interval;
    const int re = detail::reseed_collapsed(tangents, alpha, collapsed, seed_counter);
    if (re > 0) {
      rep.reseeds += re;
      if (opts.warn)
        opts.warn("lyapunov: " + std::to_string(re) + " tangent vector(s) collapsed at t = " +
                  format_double(state.time) + ", re-seeded");
    }
  }

  const double total_time = std::accumulate(block_time.begin(), block_time.end(), 0.0);
  std::vector<double> mean(n, 0.0), err(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double total_log = 0.0;
    for (int b = 0; b < nb; ++b) total_log += block_log[b][j];
    mean[j] = total_log / total_time;
    double var = 0.0;
    for (int b = 0; b < nb; ++b) {
      const double d = block_log[b][j] / block_time[b] - mean[j];
      var += d * d;
    }
    err[j] = std::sqrt(var / (nb - 1) / nb);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });
  double q = 0.0;
  for (std::size_t j : order) {
    rep.exponents.push_back(mean[j]);
    rep.std_errors.push_back(err[j]);
    q += mean[j];
    rep.partial_sums.push_back(q);
  }
  std::tie(rep.lyapunov_dimension, rep.dimension_saturated) = kaplan_yorke(rep.exponents);
  rep.averaging_time = total_time;
  return rep;
}

}  // namespace eba
