#pragma once

// Fourier representation of real, zero-mean fields on the torus (0,2*pi)^2.
//
// Convention: f(x) = sum_k fhat(k) exp(i k.x), so ||f||^2_{L2} = (2 pi)^2
// sum_k |fhat(k)|^2. Coefficients are stored in the real-to-complex half
// layout: row a in [0,n) carries k1 (FFT order), column b in [0,n/2] carries
// k2 >= 0. Modes with k2 < 0 follow from Hermitian symmetry.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eba/error.hpp"

namespace eba {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// |T^2| = (2 pi)^2, the Parseval factor.
inline constexpr double kTorusArea = 4.0 * std::numbers::pi * std::numbers::pi;

using Complex = std::complex<double>;

/// Regularization length^2 (alpha) and Ekman damping (gamma).
struct ModelParams {
  double alpha;
  double gamma;

  ModelParams(double alpha_, double gamma_) : alpha(alpha_), gamma(gamma_) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw ParameterError("alpha must be positive, got " + std::to_string(alpha));
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw ParameterError("gamma must be positive, got " + std::to_string(gamma));
  }
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Integer wavenumber lattice [-n/2, n/2)^2 with the 2/3 de-aliasing band.
class FourierGrid {
 public:
  explicit FourierGrid(int n_modes) : n_(n_modes), kmax_((n_modes - 1) / 3) {
    if (n_modes < 4 || n_modes % 2 != 0)
      throw ParameterError("grid size must be even and >= 4, got " + std::to_string(n_modes));
  }

  int n() const { return n_; }
  /// Largest |k_i| kept by the 2/3 rule (3 kmax < n).
  int kmax() const { return kmax_; }
  int half() const { return n_ / 2 + 1; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(n_) * half(); }
  std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_; }
  double spacing() const { return kTwoPi / n_; }

  int k1_at(int a) const { return a < n_ / 2 ? a : a - n_; }
  int row(int k1) const { return k1 >= 0 ? k1 : k1 + n_; }
  std::size_t index(int a, int b) const {
    return static_cast<std::size_t>(a) * half() + static_cast<std::size_t>(b);
  }
  bool in_range(int k1, int k2) const {
    return k1 >= -n_ / 2 && k1 < n_ / 2 && k2 >= -n_ / 2 && k2 < n_ / 2;
  }
  bool dealiased(int k1, int k2) const { return std::abs(k1) <= kmax_ && std::abs(k2) <= kmax_; }
  /// Inside the de-aliasing band and not the mean mode.
  bool retained(int k1, int k2) const { return dealiased(k1, k2) && (k1 != 0 || k2 != 0); }

  friend bool operator==(const FourierGrid&, const FourierGrid&) = default;

 private:
  int n_;
  int kmax_;
};

/// Calls fn(index, k1, k2, weight) for every stored coefficient. `weight` is
/// the number of lattice modes the stored entry stands for (2 for interior
/// columns, 1 on the self-conjugate columns b = 0 and b = n/2).
template <class Fn>
void for_each_mode(const FourierGrid& g, Fn&& fn) {
  const int n = g.n();
  const int h = g.half();
  for (int a = 0; a < n; ++a) {
    const int k1 = g.k1_at(a);
    for (int b = 0; b < h; ++b) {
      const double w = (b == 0 || b == n / 2) ? 1.0 : 2.0;
      fn(g.index(a, b), k1, b, w);
    }
  }
}

/// Real field on the torus stored by its Fourier coefficients.
class SpectralField {
 public:
  explicit SpectralField(FourierGrid grid) : grid_(grid), c_(grid.spectral_size()) {}

  const FourierGrid& grid() const { return grid_; }
  std::span<Complex> coeffs() { return c_; }
  std::span<const Complex> coeffs() const { return c_; }
  Complex& operator[](std::size_t i) { return c_[i]; }
  const Complex& operator[](std::size_t i) const { return c_[i]; }

  /// Coefficient of exp(i k.x) for any k in [-n/2, n/2)^2.
  Complex get(int k1, int k2) const {
    if (!grid_.in_range(k1, k2)) return {};
    if (k2 >= 0) return c_[grid_.index(grid_.row(k1), k2)];
    const int mk1 = (k1 == -grid_.n() / 2) ? k1 : -k1;
    return std::conj(c_[grid_.index(grid_.row(mk1), -k2)]);
  }

  /// Sets the coefficient of exp(i k.x) and its Hermitian partner at -k.
  void set(int k1, int k2, Complex v) {
    if (!grid_.in_range(k1, k2))
      throw ParameterError("mode (" + std::to_string(k1) + "," + std::to_string(k2) +
                           ") outside grid");
    const int n = grid_.n();
    if (k2 < 0 || (k2 == 0 && k1 < 0)) {
      k1 = (k1 == -n / 2) ? k1 : -k1;
      k2 = -k2;
      v = std::conj(v);
    }
    c_[grid_.index(grid_.row(k1), k2)] = v;
    if (k2 == 0 || k2 == n / 2) {
      const int mk1 = (k1 == -n / 2) ? k1 : -k1;
      if (mk1 == k1) {
        c_[grid_.index(grid_.row(k1), k2)] = v.real();
      } else {
        c_[grid_.index(grid_.row(mk1), k2)] = std::conj(v);
      }
    }
  }

  void check_same_grid(const SpectralField& other) const {
    if (!(grid_ == other.grid_))
      throw GridMismatch("fields live on grids of size " + std::to_string(grid_.n()) + " and " +
                         std::to_string(other.grid_.n()));
  }

  SpectralField& operator+=(const SpectralField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  /// this += s * o
  SpectralField& axpy(double s, const SpectralField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * o.c_[i];
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend SpectralField operator-(SpectralField a) { return a *= -1.0; }

  bool all_finite() const {
    for (const auto& v : c_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

 private:
  FourierGrid grid_;
  std::vector<Complex> c_;
};

/// Pair of scalar components (u1, u2).
struct VectorField {
  SpectralField u1;
  SpectralField u2;

  explicit VectorField(FourierGrid g) : u1(g), u2(g) {}
  VectorField(SpectralField a, SpectralField b) : u1(std::move(a)), u2(std::move(b)) {
    u1.check_same_grid(u2);
  }

  const FourierGrid& grid() const { return u1.grid(); }

  VectorField& operator+=(const VectorField& o) {
    u1 += o.u1;
    u2 += o.u2;
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    u1 -= o.u1;
    u2 -= o.u2;
    return *this;
  }
  VectorField& operator*=(double s) {
    u1 *= s;
    u2 *= s;
    return *this;
  }
  VectorField& axpy(double s, const VectorField& o) {
    u1.axpy(s, o.u1);
    u2.axpy(s, o.u2);
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }
};

// ---------------------------------------------------------------------------
// Transforms

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// FFTW plans for one grid size. Execution uses the new-array interface and
/// per-call buffers, so a single instance may be shared across threads.
class Transform {
 public:
  explicit Transform(const FourierGrid& g) : grid_(g) {
    const int n = g.n();
    std::lock_guard lock(detail::fftw_planner_mutex());
    double* r = fftw_alloc_real(g.real_size());
    fftw_complex* c = fftw_alloc_complex(g.spectral_size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c_2d(n, n, r, c, flags);
    inverse_ = fftw_plan_dft_c2r_2d(n, n, c, r, flags);
    fftw_free(r);
    fftw_free(c);
    if (forward_ == nullptr || inverse_ == nullptr) throw NumericalError("FFTW planning failed");
  }
  ~Transform() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (inverse_) fftw_destroy_plan(inverse_);
  }
  Transform(const Transform&) = delete;
  Transform& operator=(const Transform&) = delete;

  const FourierGrid& grid() const { return grid_; }

  /// Samples f at x = 2 pi (i1, i2) / n, row-major with i1 slow.
  void to_real(const SpectralField& f, std::span<double> out) const {
    if (!(f.grid() == grid_)) throw GridMismatch("transform grid mismatch");
    if (out.size() != grid_.real_size()) throw GridMismatch("real buffer has wrong size");
    std::vector<Complex> scratch(f.coeffs().begin(), f.coeffs().end());
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  }
  std::vector<double> to_real(const SpectralField& f) const {
    std::vector<double> out(grid_.real_size());
    to_real(f, out);
    return out;
  }

  /// Forward transform, normalized and exactly Hermitian on the
  /// self-conjugate columns.
  SpectralField to_spectral(std::span<const double> x) const {
    if (x.size() != grid_.real_size()) throw GridMismatch("real buffer has wrong size");
    SpectralField f(grid_);
    fftw_execute_dft_r2c(forward_, const_cast<double*>(x.data()),
                         reinterpret_cast<fftw_complex*>(f.coeffs().data()));
    const double scale = 1.0 / static_cast<double>(grid_.real_size());
    for (auto& v : f.coeffs()) v *= scale;
    enforce_hermitian(f);
    return f;
  }

  static void enforce_hermitian(SpectralField& f) {
    const FourierGrid& g = f.grid();
    const int n = g.n();
    for (int b : {0, n / 2}) {
      for (int a = 0; a <= n / 2; ++a) {
        const int pa = (n - a) % n;
        Complex& x = f[g.index(a, b)];
        if (pa == a) {
          x = x.real();
          continue;
        }
        Complex& y = f[g.index(pa, b)];
        const Complex avg = 0.5 * (x + std::conj(y));
        x = avg;
        y = std::conj(avg);
      }
    }
  }

 private:
  FourierGrid grid_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

/// Per-thread cache of transforms keyed by grid size.
inline const Transform& transform_for(const FourierGrid& g) {
  thread_local std::map<int, std::unique_ptr<Transform>> cache;
  auto& slot = cache[g.n()];
  if (!slot) slot = std::make_unique<Transform>(g);
  return *slot;
}

inline std::vector<double> to_real(const SpectralField& f) { return transform_for(f.grid()).to_real(f); }
inline SpectralField to_spectral(const FourierGrid& g, std::span<const double> x) {
  return transform_for(g).to_spectral(x);
}

/// Samples fn(x1, x2) on the grid and transforms.
template <class Fn>
SpectralField sample(const FourierGrid& g, Fn&& fn) {
  const int n = g.n();
  std::vector<double> x(g.real_size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      x[static_cast<std::size_t>(i) * n + j] = fn(g.spacing() * i, g.spacing() * j);
  return to_spectral(g, x);
}

// ---------------------------------------------------------------------------
// Mode-wise operators

/// Multiplies every coefficient by m(k1, k2) (real or complex).
template <class Multiplier>
SpectralField apply_multiplier(const SpectralField& f, Multiplier&& m) {
  SpectralField out(f.grid());
  for_each_mode(f.grid(), [&](std::size_t i, int k1, int k2, double) { out[i] = f[i] * m(k1, k2); });
  return out;
}

inline double ksq(int k1, int k2) { return static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2; }

/// Zeroes every mode outside the de-aliasing band and the mean.
inline SpectralField dealias(const SpectralField& f) {
  const FourierGrid& g = f.grid();
  return apply_multiplier(f, [&](int k1, int k2) { return g.retained(k1, k2) ? 1.0 : 0.0; });
}

/// (1 - alpha Lap)^{-1} f.
inline SpectralField smooth(const SpectralField& f, double alpha) {
  if (!(alpha >= 0.0)) throw ParameterError("smooth: alpha must be >= 0");
  return apply_multiplier(f, [alpha](int k1, int k2) { return 1.0 / (1.0 + alpha * ksq(k1, k2)); });
}

/// (1 - alpha Lap) f.
inline SpectralField helmholtz(const SpectralField& f, double alpha) {
  if (!(alpha >= 0.0)) throw ParameterError("helmholtz: alpha must be >= 0");
  return apply_multiplier(f, [alpha](int k1, int k2) { return 1.0 + alpha * ksq(k1, k2); });
}

inline SpectralField laplacian(const SpectralField& f) {
  return apply_multiplier(f, [](int k1, int k2) { return -ksq(k1, k2); });
}

/// Lap^{-1} on zero-mean fields; the mean mode maps to zero.
inline SpectralField inverse_laplacian(const SpectralField& f) {
  return apply_multiplier(f, [](int k1, int k2) {
    const double q = ksq(k1, k2);
    return q == 0.0 ? 0.0 : -1.0 / q;
  });
}

/// Partial derivatives; the Nyquist row/column is dropped to keep fields real.
inline SpectralField d1(const SpectralField& f) {
  const int ny = f.grid().n() / 2;
  return apply_multiplier(f, [ny](int k1, int k2) {
    return (k1 == -ny || k2 == ny) ? Complex{} : Complex(0.0, k1);
  });
}
inline SpectralField d2(const SpectralField& f) {
  const int ny = f.grid().n() / 2;
  return apply_multiplier(f, [ny](int k1, int k2) {
    return (k1 == -ny || k2 == ny) ? Complex{} : Complex(0.0, k2);
  });
}

inline SpectralField curl(const VectorField& v) { return d1(v.u2) - d2(v.u1); }
inline SpectralField divergence(const VectorField& v) { return d1(v.u1) + d2(v.u2); }

/// Perpendicular gradient (-d2 f, d1 f).
inline VectorField perp_gradient(const SpectralField& f) { return VectorField(-d2(f), d1(f)); }

/// Helmholtz-Leray projection u -> u - k (k.u)/|k|^2.
inline VectorField leray_project(const VectorField& v) {
  VectorField out(v.grid());
  for_each_mode(v.grid(), [&](std::size_t i, int k1, int k2, double) {
    const double q = ksq(k1, k2);
    if (q == 0.0) {
      out.u1[i] = v.u1[i];
      out.u2[i] = v.u2[i];
      return;
    }
    const Complex kdotu = static_cast<double>(k1) * v.u1[i] + static_cast<double>(k2) * v.u2[i];
    out.u1[i] = v.u1[i] - static_cast<double>(k1) * kdotu / q;
    out.u2[i] = v.u2[i] - static_cast<double>(k2) * kdotu / q;
  });
  return out;
}

inline VectorField smooth(const VectorField& v, double alpha) {
  return VectorField(smooth(v.u1, alpha), smooth(v.u2, alpha));
}
inline VectorField dealias(const VectorField& v) { return VectorField(dealias(v.u1), dealias(v.u2)); }

/// Divergence-free, zero-mean velocity whose curl is omega (alpha = 0 case
/// of velocity_from_vorticity).
inline VectorField velocity_from_curl(const SpectralField& omega) {
  return perp_gradient(inverse_laplacian(omega));
}

/// Filtered velocity ubar = perp_grad psibar, psibar = (Lap - alpha Lap^2)^{-1} omega.
inline VectorField velocity_from_vorticity(const SpectralField& omega, double alpha) {
  if (!(alpha >= 0.0)) throw ParameterError("velocity_from_vorticity: alpha must be >= 0");
  SpectralField psibar = apply_multiplier(omega, [alpha](int k1, int k2) {
    const double q = ksq(k1, k2);
    return q == 0.0 ? 0.0 : -1.0 / (q * (1.0 + alpha * q));
  });
  return perp_gradient(psibar);
}

// ---------------------------------------------------------------------------
// Quadratic terms

/// J(a, b) = d1 a d2 b - d2 a d1 b, pseudo-spectral with the 2/3 rule applied
/// to the inputs and to the product. The result has zero mean.
inline SpectralField jacobian(const SpectralField& a, const SpectralField& b) {
  a.check_same_grid(b);
  const FourierGrid& g = a.grid();
  const Transform& tr = transform_for(g);
  const SpectralField ad = dealias(a);
  const SpectralField bd = dealias(b);
  const auto a1 = tr.to_real(d1(ad));
  const auto a2 = tr.to_real(d2(ad));
  const auto b1 = tr.to_real(d1(bd));
  const auto b2 = tr.to_real(d2(bd));
  std::vector<double> prod(g.real_size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = a1[i] * b2[i] - a2[i] * b1[i];
  return dealias(tr.to_spectral(prod));
}

// ---------------------------------------------------------------------------
// Inner products (Parseval normalization (2 pi)^2)

inline double inner(const SpectralField& f, const SpectralField& h) {
  f.check_same_grid(h);
  double s = 0.0;
  for_each_mode(f.grid(), [&](std::size_t i, int, int, double w) {
    s += w * (f[i].real() * h[i].real() + f[i].imag() * h[i].imag());
  });
  return kTorusArea * s;
}
inline double norm_l2_sq(const SpectralField& f) { return inner(f, f); }
inline double norm_l2(const SpectralField& f) { return std::sqrt(inner(f, f)); }

inline double inner(const VectorField& a, const VectorField& b) {
  return inner(a.u1, b.u1) + inner(a.u2, b.u2);
}

/// (theta, xi)_alpha = ((1 - alpha Lap)^{-1/2} theta, (1 - alpha Lap)^{-1/2} xi).
inline double alpha_inner(const VectorField& theta, const VectorField& xi, double alpha) {
  theta.u1.check_same_grid(xi.u1);
  double s = 0.0;
  for_each_mode(theta.grid(), [&](std::size_t i, int k1, int k2, double w) {
    const double re = theta.u1[i].real() * xi.u1[i].real() + theta.u1[i].imag() * xi.u1[i].imag() +
                      theta.u2[i].real() * xi.u2[i].real() + theta.u2[i].imag() * xi.u2[i].imag();
    s += w * re / (1.0 + alpha * ksq(k1, k2));
  });
  return kTorusArea * s;
}
inline double alpha_norm(const VectorField& theta, double alpha) {
  return std::sqrt(alpha_inner(theta, theta, alpha));
}

/// Largest |k.u(k)| over stored modes (zero for a divergence-free field).
inline double max_divergence_residual(const VectorField& v) {
  double worst = 0.0;
  for_each_mode(v.grid(), [&](std::size_t i, int k1, int k2, double) {
    worst = std::max(worst, std::abs(static_cast<double>(k1) * v.u1[i] + static_cast<double>(k2) * v.u2[i]));
  });
  return worst;
}

// ---------------------------------------------------------------------------
// Random fields

/// Gaussian coefficients on the retained band with envelope
/// |k|^{-slope/2}; deterministic for a given seed.
inline SpectralField random_field(const FourierGrid& g, std::uint64_t seed, double slope = 2.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpectralField f(g);
  for (int k1 = -g.kmax(); k1 <= g.kmax(); ++k1) {
    for (int k2 = 0; k2 <= g.kmax(); ++k2) {
      if (!g.retained(k1, k2)) continue;
      if (k2 == 0 && k1 < 0) continue;  // partner of an already drawn mode
      const double env = std::pow(ksq(k1, k2), -0.25 * slope);
      const double re = normal(rng);
      const double im = normal(rng);
      f.set(k1, k2, env * Complex(re, im));
    }
  }
  return f;
}

/// Random divergence-free, zero-mean vector field on the retained band.
inline VectorField random_solenoidal(const FourierGrid& g, std::uint64_t seed, double slope = 2.0) {
  return velocity_from_curl(random_field(g, seed, slope));
}

}  // namespace eba
