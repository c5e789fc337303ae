#pragma once

// Regularized vorticity dynamics
//   d_t omega + J(psibar, omegabar) + gamma omega = curl g,
//   omegabar = (1 - alpha Lap)^{-1} omega,  psibar = Lap^{-1} omegabar,
// its velocity form, and the linearized (variational) operator.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "eba/error.hpp"
#include "eba/format.hpp"
#include "eba/spectral.hpp"

namespace eba {

struct SimState {
  SpectralField omega;
  double time = 0.0;
  ModelParams params;
  SpectralField forcing_curl;

  SimState(SpectralField omega_, ModelParams params_, SpectralField forcing_curl_, double time_ = 0.0)
      : omega(std::move(omega_)), time(time_), params(params_), forcing_curl(std::move(forcing_curl_)) {
    omega.check_same_grid(forcing_curl);
  }

  const FourierGrid& grid() const { return omega.grid(); }
};

/// ||omegabar||^2_{L2}
inline double enstrophy_bar(const SpectralField& omega, double alpha) {
  return norm_l2_sq(smooth(omega, alpha));
}

/// alpha ||grad omegabar||^2_{L2}
inline double grad_enstrophy_bar(const SpectralField& omega, double alpha) {
  const SpectralField wb = smooth(omega, alpha);
  double s = 0.0;
  for_each_mode(wb.grid(), [&](std::size_t i, int k1, int k2, double w) { s += w * ksq(k1, k2) * std::norm(wb[i]); });
  return alpha * kTorusArea * s;
}

/// ||omegabar||^2 + alpha ||grad omegabar||^2, the quantity bounded by R0^2.
inline double alpha_enstrophy(const SpectralField& omega, double alpha) {
  const SpectralField wb = smooth(omega, alpha);
  double s = 0.0;
  for_each_mode(wb.grid(), [&](std::size_t i, int k1, int k2, double w) {
    s += w * (1.0 + alpha * ksq(k1, k2)) * std::norm(wb[i]);
  });
  return kTorusArea * s;
}

/// R0 with R0^2 = gamma^{-2} min(||g||^2 / alpha, ||curl g||^2).
inline double absorbing_radius(const ModelParams& params, const VectorField& g) {
  const double g_sq = norm_l2_sq(g.u1) + norm_l2_sq(g.u2);
  const double curl_sq = norm_l2_sq(curl(g));
  return std::sqrt(std::min(g_sq / params.alpha, curl_sq)) / params.gamma;
}

namespace detail {

struct Advection {
  SpectralField term;  // J(psibar, omegabar), de-aliased
  double max_speed;    // max |ubar| on the grid
};

inline Advection vorticity_advection(const SpectralField& omega, double alpha) {
  const FourierGrid& g = omega.grid();
  const Transform& tr = transform_for(g);
  const SpectralField wb = smooth(dealias(omega), alpha);
  const VectorField ub = perp_gradient(inverse_laplacian(wb));
  const auto u1 = tr.to_real(ub.u1);
  const auto u2 = tr.to_real(ub.u2);
  const auto w1 = tr.to_real(d1(wb));
  const auto w2 = tr.to_real(d2(wb));
  std::vector<double> prod(g.real_size());
  double vmax = 0.0;
  for (std::size_t i = 0; i < prod.size(); ++i) {
    // (ubar . grad) omegabar = J(psibar, omegabar)
    prod[i] = u1[i] * w1[i] + u2[i] * w2[i];
    vmax = std::max(vmax, std::hypot(u1[i], u2[i]));
  }
  return {dealias(tr.to_spectral(prod)), vmax};
}

}  // namespace detail

/// -J(psibar, omegabar) - gamma omega + curl g.
inline SpectralField vorticity_rhs(const SimState& s) {
  SpectralField rhs = s.forcing_curl;
  rhs -= detail::vorticity_advection(s.omega, s.params.alpha).term;
  rhs.axpy(-s.params.gamma, s.omega);
  return rhs;
}

namespace detail {

/// Intermediate vorticities of one integrating-factor RK4 step. The tangent
/// integrator linearizes about exactly these states.
struct StepStages {
  SpectralField a;
  SpectralField b;
  SpectralField c;
  SpectralField next;
  double max_speed;
};

inline StepStages rk4_stages(const SimState& s, double dt) {
  if (!(dt > 0.0)) throw ParameterError("step: dt must be positive");
  const double alpha = s.params.alpha;
  const double e1 = std::exp(-0.5 * s.params.gamma * dt);
  const double e2 = e1 * e1;
  auto nonlinear = [&](const SpectralField& w, double* speed) {
    auto adv = vorticity_advection(w, alpha);
    if (speed) *speed = adv.max_speed;
    SpectralField out = s.forcing_curl;
    out -= adv.term;
    return out;
  };

  double speed = 0.0;
  const SpectralField n1 = nonlinear(s.omega, &speed);
  if (speed * dt > s.grid().spacing())
    throw ParameterError("step: CFL violated, dt*max|ubar| = " + format_double(speed * dt) +
                         " > grid spacing " + format_double(s.grid().spacing()));

  SpectralField a = s.omega;
  a.axpy(0.5 * dt, n1);
  a *= e1;
  const SpectralField n2 = nonlinear(a, nullptr);

  SpectralField b = e1 * s.omega;
  b.axpy(0.5 * dt, n2);
  const SpectralField n3 = nonlinear(b, nullptr);

  SpectralField c = e2 * s.omega;
  c.axpy(dt * e1, n3);
  const SpectralField n4 = nonlinear(c, nullptr);

  SpectralField next = e2 * s.omega;
  next.axpy(dt / 6.0 * e2, n1);
  next.axpy(dt / 3.0 * e1, n2);
  next.axpy(dt / 3.0 * e1, n3);
  next.axpy(dt / 6.0, n4);
  if (!next.all_finite())
    throw NumericalError("step: non-finite vorticity at t = " + format_double(s.time + dt));
  return {std::move(a), std::move(b), std::move(c), std::move(next), speed};
}

}  // namespace detail

/// Integrating-factor RK4 step: the damping is integrated exactly, the
/// advection and forcing by classical RK4. Throws ParameterError if
/// dt * max|ubar| exceeds the grid spacing and NumericalError on NaN/inf.
inline SimState step(const SimState& s, double dt) {
  auto st = detail::rk4_stages(s, dt);
  return SimState(std::move(st.next), s.params, s.forcing_curl, s.time + dt);
}

// ---------------------------------------------------------------------------
// Trajectories

struct ObserverRow {
  double time;
  double enstrophy_bar;       // ||omegabar||^2
  double grad_enstrophy_bar;  // alpha ||grad omegabar||^2
  double r0_margin;           // R0^2 - (sum of the two above)
};

struct SimulateOptions {
  int observe_every = 1;     // steps between observer rows (0: none)
  int checkpoint_every = 0;  // steps between checkpoint callbacks (0: none)
  std::function<void(const SimState&)> on_checkpoint;
  std::function<void(const ObserverRow&)> on_row;
};

struct Trajectory {
  SimState final_state;
  std::vector<ObserverRow> rows;
  double r0_sq;
};

inline ObserverRow observe(const SimState& s, double r0_sq) {
  const double e = enstrophy_bar(s.omega, s.params.alpha);
  const double ge = grad_enstrophy_bar(s.omega, s.params.alpha);
  return {s.time, e, ge, r0_sq - (e + ge)};
}

/// Number of steps of size dt from t0 to t_end.
inline long steps_between(double t0, double t_end, double dt) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  const double n = std::round((t_end - t0) / dt);
  return n > 0 ? static_cast<long>(n) : 0;
}

inline Trajectory simulate(const SimState& initial, double t_end, double dt, const SimulateOptions& opts = {}) {
  const double r0 = absorbing_radius(initial.params, velocity_from_curl(initial.forcing_curl));
  Trajectory traj{initial, {}, r0 * r0};
  const long n_steps = steps_between(initial.time, t_end, dt);
  auto emit = [&](const SimState& s) {
    ObserverRow row = observe(s, traj.r0_sq);
    if (opts.on_row) opts.on_row(row);
    traj.rows.push_back(row);
  };
  if (opts.observe_every > 0) emit(traj.final_state);
  for (long k = 1; k <= n_steps; ++k) {
    traj.final_state = step(traj.final_state, dt);
    if (opts.observe_every > 0 && k % opts.observe_every == 0) emit(traj.final_state);
    if (opts.checkpoint_every > 0 && opts.on_checkpoint && k % opts.checkpoint_every == 0)
      opts.on_checkpoint(traj.final_state);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Velocity form and equation of variations

/// -gamma u - P[(ubar . grad) ubar] + g with ubar = (1 - alpha Lap)^{-1} u.
inline VectorField velocity_rhs(const VectorField& u, const ModelParams& p, const VectorField& g) {
  const FourierGrid& grid = u.grid();
  const Transform& tr = transform_for(grid);
  const VectorField ub = dealias(smooth(u, p.alpha));
  const auto a1 = tr.to_real(ub.u1);
  const auto a2 = tr.to_real(ub.u2);
  const auto a11 = tr.to_real(d1(ub.u1));
  const auto a12 = tr.to_real(d2(ub.u1));
  const auto a21 = tr.to_real(d1(ub.u2));
  const auto a22 = tr.to_real(d2(ub.u2));
  std::vector<double> w1(grid.real_size()), w2(grid.real_size());
  for (std::size_t i = 0; i < w1.size(); ++i) {
    w1[i] = a1[i] * a11[i] + a2[i] * a12[i];
    w2[i] = a1[i] * a21[i] + a2[i] * a22[i];
  }
  VectorField adv = leray_project(VectorField(dealias(tr.to_spectral(w1)), dealias(tr.to_spectral(w2))));
  VectorField out = g;
  out -= adv;
  out.axpy(-p.gamma, u);
  return out;
}

/// L_u theta = -gamma theta - P[(ubar . grad) thetabar + (thetabar . grad) ubar]
/// for a fixed base vorticity. The base flow is sampled once at construction.
class LinearizedOperator {
 public:
  LinearizedOperator(const SpectralField& omega, const ModelParams& params)
      : grid_(omega.grid()), params_(params) {
    const Transform& tr = transform_for(grid_);
    const VectorField ub = velocity_from_vorticity(dealias(omega), params.alpha);
    u1_ = tr.to_real(ub.u1);
    u2_ = tr.to_real(ub.u2);
    u1_x1_ = tr.to_real(d1(ub.u1));
    u1_x2_ = tr.to_real(d2(ub.u1));
    u2_x1_ = tr.to_real(d1(ub.u2));
    u2_x2_ = tr.to_real(d2(ub.u2));
  }

  const ModelParams& params() const { return params_; }

  /// -P[(ubar . grad) thetabar + (thetabar . grad) ubar]
  VectorField advective(const VectorField& theta) const {
    if (!(theta.grid() == grid_)) throw GridMismatch("variational operator grid mismatch");
    const Transform& tr = transform_for(grid_);
    const VectorField tb = dealias(smooth(theta, params_.alpha));
    const auto t1 = tr.to_real(tb.u1);
    const auto t2 = tr.to_real(tb.u2);
    const auto t11 = tr.to_real(d1(tb.u1));
    const auto t12 = tr.to_real(d2(tb.u1));
    const auto t21 = tr.to_real(d1(tb.u2));
    const auto t22 = tr.to_real(d2(tb.u2));
    std::vector<double> w1(grid_.real_size()), w2(grid_.real_size());
    for (std::size_t i = 0; i < w1.size(); ++i) {
      w1[i] = u1_[i] * t11[i] + u2_[i] * t12[i] + t1[i] * u1_x1_[i] + t2[i] * u1_x2_[i];
      w2[i] = u1_[i] * t21[i] + u2_[i] * t22[i] + t1[i] * u2_x1_[i] + t2[i] * u2_x2_[i];
    }
    VectorField out = leray_project(VectorField(dealias(tr.to_spectral(w1)), dealias(tr.to_spectral(w2))));
    out *= -1.0;
    return out;
  }

  VectorField apply(const VectorField& theta) const {
    VectorField out = advective(theta);
    out.axpy(-params_.gamma, theta);
    return out;
  }

 private:
  FourierGrid grid_;
  ModelParams params_;
  std::vector<double> u1_, u2_, u1_x1_, u1_x2_, u2_x1_, u2_x2_;
};

inline VectorField variational_rhs(const VectorField& theta, const SimState& state) {
  return LinearizedOperator(state.omega, state.params).apply(theta);
}

}  // namespace eba
