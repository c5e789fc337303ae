#pragma once

// Numerical certificates for the lattice-sum bound F(m) < pi, its Poisson
// summation ingredients, and the orthonormal-family bound
//   || sum |u_i|^2 ||_{L2} <= B2 m^{-1} n^{1/2},  u_i = (m^2 - Lap)^{-1/2} psi_i,
// with B2 = 1/(2 sqrt(pi)), together with the trace inequality behind it.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "eba/bessel.hpp"
#include "eba/error.hpp"
#include "eba/parallel.hpp"
#include "eba/spectral.hpp"

namespace eba {

inline const double kB2 = 0.5 / std::sqrt(std::numbers::pi);

// ---------------------------------------------------------------------------
// Lattice sum F(m) = m^2 sum_{k != 0} (|k|^2 + m^2)^{-2}

struct LatticeSumResult {
  double m = 0.0;
  double F_direct = 0.0;    // truncated sum
  double tail_bound = 0.0;  // rigorous bound on the omitted terms
  double F_poisson = 0.0;
  double margin = 0.0;      // pi - (F_direct + tail_bound)
};

namespace detail {

/// sum_{n in Z} (n^2 + a^2)^{-2} = pi coth(pi a)/(2 a^3) + pi^2 csch^2(pi a)/(2 a^2).
inline double row_sum(double a) {
  const double e = std::exp(-2.0 * kPi * a);
  const double coth = (1.0 + e) / (1.0 - e);
  const double csch2 = 4.0 * e / ((1.0 - e) * (1.0 - e));
  return kPi * coth / (2.0 * a * a * a) + kPi * kPi * csch2 / (2.0 * a * a);
}

}  // namespace detail

/// Sums the rows |k1| <= radius exactly (closed form in k2) and bounds the
/// remaining rows by 2 m^2 (pi/(4 R^2) + 1/(3 R^3)).
inline LatticeSumResult lattice_F(double m, long radius) {
  if (!(m > 0.0)) throw ParameterError("lattice_F requires m > 0");
  if (radius < 8) throw ParameterError("lattice_F requires radius >= 8");
  const double m2 = m * m;
  double sum = 0.0;
  for (long k1 = radius; k1 >= 1; --k1) {
    const double a = std::sqrt(static_cast<double>(k1) * k1 + m2);
    sum += 2.0 * detail::row_sum(a);
  }
  sum += detail::row_sum(m) - 1.0 / (m2 * m2);
  LatticeSumResult r;
  r.m = m;
  r.F_direct = m2 * sum;
  const double R = static_cast<double>(radius);
  r.tail_bound = 2.0 * m2 * (kPi / (4.0 * R * R) + 1.0 / (3.0 * R * R * R));
  r.F_poisson = std::nan("");
  r.margin = kPi - (r.F_direct + r.tail_bound);
  return r;
}

/// Direct summation over the disc 0 < |k| <= radius with the integral tail
/// bound pi m^2 / ((radius - 1)^2 + m^2).
inline LatticeSumResult lattice_F_disc(double m, long radius) {
  if (!(m > 0.0)) throw ParameterError("lattice_F_disc requires m > 0");
  if (radius < 8) throw ParameterError("lattice_F_disc requires radius >= 8");
  const double m2 = m * m;
  const long r2 = radius * radius;
  double sum = 0.0;
  for (long k1 = radius; k1 >= 0; --k1) {
    const long rest = r2 - k1 * k1;
    const long k2max = static_cast<long>(std::floor(std::sqrt(static_cast<double>(rest))));
    double row = 0.0;
    for (long k2 = k2max; k2 >= 0; --k2) {
      if (k1 == 0 && k2 == 0) continue;
      const double q = static_cast<double>(k1 * k1 + k2 * k2) + m2;
      row += (k2 == 0 ? 1.0 : 2.0) / (q * q);
    }
    sum += (k1 == 0 ? 1.0 : 2.0) * row;
  }
  LatticeSumResult r;
  r.m = m;
  r.F_direct = m2 * sum;
  const double Rm1 = static_cast<double>(radius - 1);
  r.tail_bound = kPi * m2 / (Rm1 * Rm1 + m2);
  r.F_poisson = std::nan("");
  r.margin = kPi - (r.F_direct + r.tail_bound);
  return r;
}

/// F(m) = pi - 1/m^2 + pi sum_{k != 0} xi K1(xi), xi = 2 pi m |k|, over the box
/// |k_i| <= k_max. k_max <= 0 picks a box where the omitted terms underflow.
inline double poisson_F(double m, long k_max = 0) {
  if (!(m > 0.0)) throw ParameterError("poisson_F requires m > 0");
  if (k_max <= 0) k_max = static_cast<long>(std::ceil(45.0 / (2.0 * kPi * m))) + 1;
  double sum = 0.0;
  for (long k1 = k_max; k1 >= 0; --k1) {
    for (long k2 = k_max; k2 >= 0; --k2) {
      if (k1 == 0 && k2 == 0) continue;
      const double xi = 2.0 * kPi * m * std::sqrt(static_cast<double>(k1 * k1 + k2 * k2));
      if (xi > 700.0) continue;
      const double mult = (k1 == 0 || k2 == 0) ? 2.0 : 4.0;
      sum += mult * xi * bessel_k1(xi);
    }
  }
  return kPi - 1.0 / (m * m) + kPi * sum;
}

// ---------------------------------------------------------------------------
// K1 upper bound and the closing inequality

/// (1 + 1/(2x)) sqrt(pi/(2x)) e^{-x}
inline double k1_upper_bound(double x) {
  return (1.0 + 0.5 / x) * std::sqrt(kPi / (2.0 * x)) * std::exp(-x);
}

struct K1BoundCheck {
  double worst_margin;  // min over the grid of bound - K1
  double worst_x;
  double min_ratio;     // min K1 / bound
  double max_ratio;     // max K1 / bound
};

inline K1BoundCheck k1_bound_check(std::span<const double> xs) {
  if (xs.empty()) throw ParameterError("k1_bound_check: empty grid");
  K1BoundCheck out{std::numeric_limits<double>::infinity(), 0.0, std::numeric_limits<double>::infinity(), 0.0};
  for (double x : xs) {
    if (!(x > 0.0)) throw ParameterError("k1_bound_check: grid must lie in (0, inf)");
    const double k = bessel_k1(x);
    const double b = k1_upper_bound(x);
    if (b - k < out.worst_margin) {
      out.worst_margin = b - k;
      out.worst_x = x;
    }
    out.min_ratio = std::min(out.min_ratio, k / b);
    out.max_ratio = std::max(out.max_ratio, k / b);
  }
  return out;
}

/// n points log-spaced on [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[i] = lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
  return xs;
}

/// x^2 / (e^x - 1)
inline double phi_fn(double x) { return x == 0.0 ? 0.0 : x * x / std::expm1(x); }
/// x / (e^x - 1)
inline double psi_fn(double x) { return x == 0.0 ? 1.0 : x / std::expm1(x); }

inline double psi_big(double m) {
  if (!(m > 0.0)) throw ParameterError("psi_big requires m > 0");
  const double c1 = 2.0 * std::numbers::sqrt2 / (3.0 * kPi);
  const double x1 = 3.0 * kPi / (2.0 * std::numbers::sqrt2) * m;
  const double x2 = std::numbers::sqrt2 * kPi * m;
  const double p1 = psi_fn(x1), p2 = psi_fn(x2);
  return 4.0 * std::sqrt(kPi / std::numbers::e) * c1 * c1 * (phi_fn(x1) + p1 * p1) +
         (phi_fn(x2) + p2 * p2) / (2.0 * kPi * kPi) - 1.0 / kPi;
}

/// Maximizer of phi: the root of phi'(x) = 0, i.e. (2 - x) e^x = 2.
inline double phi_argmax() {
  double lo = 1.0, hi = 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((2.0 - mid) * std::exp(mid) - 2.0 > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// m1 = (2 sqrt2/(3 pi)) x0, m2 = x0/(sqrt2 pi)
inline std::pair<double, double> psi_thresholds() {
  const double x0 = phi_argmax();
  return {2.0 * std::numbers::sqrt2 / (3.0 * kPi) * x0, x0 / (std::numbers::sqrt2 * kPi)};
}

// ---------------------------------------------------------------------------
// Orthonormal families

struct BandMode {
  int k1;
  int k2;
};

/// Nonzero modes with |k_i| <= band, ordered by (k1, k2).
inline std::vector<BandMode> band_modes(int band) {
  if (band < 1) throw ParameterError("band must be >= 1");
  std::vector<BandMode> out;
  for (int a = -band; a <= band; ++a)
    for (int b = -band; b <= band; ++b)
      if (a != 0 || b != 0) out.push_back({a, b});
  return out;
}

namespace detail {

class ComplexTransform {
 public:
  explicit ComplexTransform(int n) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    backward_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    forward_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!backward_ || !forward_) throw NumericalError("FFTW planning failed");
  }
  ~ComplexTransform() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(backward_);
    fftw_destroy_plan(forward_);
  }
  ComplexTransform(const ComplexTransform&) = delete;
  ComplexTransform& operator=(const ComplexTransform&) = delete;

  /// In place: sum_k c_k e^{i k.x} at x = 2 pi (i1, i2)/n.
  void synthesize(std::vector<Complex>& data) const {
    fftw_execute_dft(backward_, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
  }
  /// In place: (1/n^2) sum_x f(x) e^{-i k.x}.
  void analyze(std::vector<Complex>& data) const {
    fftw_execute_dft(forward_, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
    const double s = 1.0 / (static_cast<double>(n_) * n_);
    for (auto& v : data) v *= s;
  }
  std::size_t wrap(int k1, int k2) const {
    return static_cast<std::size_t>(((k1 % n_) + n_) % n_) * n_ + static_cast<std::size_t>(((k2 % n_) + n_) % n_);
  }
  int n() const { return n_; }

 private:
  int n_;
  fftw_plan backward_ = nullptr;
  fftw_plan forward_ = nullptr;
};

inline const ComplexTransform& complex_transform_for(int n) {
  thread_local std::map<int, std::unique_ptr<ComplexTransform>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<ComplexTransform>(n);
  return *slot;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Largest band for which rho^2 is integrated exactly on an n x n grid.
inline int exact_band(int grid_n) { return (grid_n - 2) / 4; }

/// ||rho||_{L2} for rho = sum_i |u_i|^2, u_i = (m^2 - Lap)^{-1/2} psi_i, where
/// psi_i = sum_j family[i][j] e_j with e_j = e^{i k_j.x}/(2 pi) (scalar) or
/// (k_j^perp/|k_j|) e^{i k_j.x}/(2 pi) (solenoidal), k_j = band_modes(band)[j].
inline double rho_l2(const std::vector<std::vector<Complex>>& family, int band, double m, int grid_n,
                     bool solenoidal = false) {
  if (!(m > 0.0)) throw ParameterError("rho_l2 requires m > 0");
  if (band > exact_band(grid_n)) throw ParameterError("rho_l2: band too wide for the quadrature grid");
  const auto modes = band_modes(band);
  const auto& tr = detail::complex_transform_for(grid_n);
  const std::size_t npts = static_cast<std::size_t>(grid_n) * grid_n;
  std::vector<double> rho(npts, 0.0);
  std::vector<Complex> buf(npts);
  for (const auto& coeffs : family) {
    if (coeffs.size() != modes.size()) throw ParameterError("rho_l2: coefficient vector has wrong length");
    for (int comp = 0; comp < (solenoidal ? 2 : 1); ++comp) {
      std::fill(buf.begin(), buf.end(), Complex(0.0, 0.0));
      for (std::size_t j = 0; j < modes.size(); ++j) {
        const auto [k1, k2] = modes[j];
        const double q = ksq(k1, k2);
        double dir = 1.0;
        if (solenoidal) dir = (comp == 0 ? -k2 : k1) / std::sqrt(q);
        buf[tr.wrap(k1, k2)] = coeffs[j] * (dir / (kTwoPi * std::sqrt(m * m + q)));
      }
      tr.synthesize(buf);
      for (std::size_t p = 0; p < npts; ++p) rho[p] += std::norm(buf[p]);
    }
  }
  double s = 0.0;
  for (double v : rho) s += v * v;
  const double h = kTwoPi / grid_n;
  return std::sqrt(s * h * h);
}

struct RhoCheckSample {
  int n;
  double m;
  double rho_l2;
  double bound;  // B2 m^{-1} n^{1/2}
  std::uint64_t trial;
  bool solenoidal;
};

/// Random orthonormal family of `count` coefficient vectors over the band,
/// drawn from the stream identified by (seed, trial).
inline std::vector<std::vector<Complex>> random_orthonormal_family(int count, int band, std::uint64_t seed,
                                                                   std::uint64_t trial) {
  const std::size_t dim = band_modes(band).size();
  if (count < 1 || static_cast<std::size_t>(count) > dim)
    throw ParameterError("random_orthonormal_family: family size exceeds the number of band modes");
  std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(trial)));
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<std::vector<Complex>> fam(static_cast<std::size_t>(count), std::vector<Complex>(dim));
    bool ok = true;
    for (auto& v : fam) {
      for (auto& c : v) c = Complex(normal(rng), normal(rng));
    }
    for (std::size_t i = 0; i < fam.size() && ok; ++i) {
      auto& v = fam[i];
      auto norm_of = [](const std::vector<Complex>& x) {
        double s = 0.0;
        for (const auto& c : x) s += std::norm(c);
        return std::sqrt(s);
      };
      const double before = norm_of(v);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < i; ++j) {
          Complex dot(0.0, 0.0);
          for (std::size_t p = 0; p < dim; ++p) dot += std::conj(fam[j][p]) * v[p];
          for (std::size_t p = 0; p < dim; ++p) v[p] -= dot * fam[j][p];
        }
      }
      const double nrm = norm_of(v);
      if (!(nrm > 1e-8 * before)) {
        ok = false;
        break;
      }
      for (auto& c : v) c /= nrm;
    }
    if (ok) return fam;
  }
  throw NumericalError("random_orthonormal_family: orthonormalization failed repeatedly");
}

/// `trials` independent families of size n; reproducible for a fixed seed
/// regardless of the thread count.
inline std::vector<RhoCheckSample> rho_l2_check(int n, double m, int trials, int grid_n, std::uint64_t seed,
                                                bool solenoidal = false, int threads = 1) {
  if (!(m > 0.0)) throw ParameterError("rho_l2_check requires m > 0");
  const int band = exact_band(grid_n);
  if (band < 1) throw ParameterError("rho_l2_check: grid too small");
  std::vector<RhoCheckSample> out(static_cast<std::size_t>(std::max(trials, 0)));
  const double bound = kB2 / m * std::sqrt(static_cast<double>(n));
  parallel_for(out.size(), threads, [&](std::size_t t) {
    const auto fam = random_orthonormal_family(n, band, seed, t);
    out[t] = RhoCheckSample{n, m, rho_l2(fam, band, m, grid_n, solenoidal), bound, t, solenoidal};
  });
  return out;
}

// ---------------------------------------------------------------------------
// Trace inequality Tr K^2 <= ||V||^2 / (4 pi m^2)

struct TraceCheck {
  double lhs;        // Tr K^2 over the basis box
  double tail;       // rigorous bound on the pairs outside the box
  double rhs;        // ||V||^2 / (4 pi m^2)
  int basis_band;
  int v_band;        // V-hat vanishes beyond this |j|_inf
};

/// K = (m^2 - Lap)^{-1/2} V (m^2 - Lap)^{-1/2} on mean-zero functions, with V
/// given by real samples on an n x n grid (row-major, x = 2 pi i / n). The
/// matrix is truncated to the basis box |k_i| <= basis_band, k != 0.
inline TraceCheck trace_k2_check(std::span<const double> v_samples, int grid_n, double m, int basis_band) {
  if (!(m > 0.0)) throw ParameterError("trace_k2_check requires m > 0");
  const std::size_t npts = static_cast<std::size_t>(grid_n) * grid_n;
  if (v_samples.size() != npts) throw GridMismatch("trace_k2_check: sample count does not match grid");
  for (double v : v_samples)
    if (v < 0.0) throw ParameterError("trace_k2_check: V must be nonnegative");
  const auto& tr = detail::complex_transform_for(grid_n);
  std::vector<Complex> vh(v_samples.begin(), v_samples.end());
  tr.analyze(vh);

  const int half = grid_n / 2;
  double v_sq = 0.0;
  int v_band = 0;
  double v_radius = 0.0;
  std::vector<std::pair<BandMode, double>> support;
  double a_max = 0.0;
  for (const auto& c : vh) a_max = std::max(a_max, std::norm(c));
  // Coefficients at round-off level relative to the largest are not support.
  const double floor = 1e-24 * a_max;
  for (int j1 = -half + 1; j1 < half; ++j1) {
    for (int j2 = -half + 1; j2 < half; ++j2) {
      const double a = std::norm(vh[tr.wrap(j1, j2)]);
      v_sq += a;
      if (a <= floor || a == 0.0) continue;
      support.push_back({{j1, j2}, a});
      v_band = std::max({v_band, std::abs(j1), std::abs(j2)});
      v_radius = std::max(v_radius, std::sqrt(ksq(j1, j2)));
    }
  }
  // Nyquist row/column content means V is not resolved by the grid.
  for (int j = -half; j < half; ++j)
    if (std::norm(vh[tr.wrap(-half, j)]) > 1e-24 * std::max(v_sq, 1e-300) ||
        std::norm(vh[tr.wrap(j, -half)]) > 1e-24 * std::max(v_sq, 1e-300))
      throw ParameterError("trace_k2_check: V is not band-limited on this grid");

  TraceCheck out{0.0, 0.0, kTorusArea * v_sq / (4.0 * kPi * m * m), basis_band, v_band};
  const double m2 = m * m;
  for (int k1 = -basis_band; k1 <= basis_band; ++k1) {
    for (int k2 = -basis_band; k2 <= basis_band; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const double wk = m2 + ksq(k1, k2);
      for (const auto& [j, a] : support) {
        const int l1 = k1 - j.k1, l2 = k2 - j.k2;
        if (l1 == 0 && l2 == 0) continue;
        if (std::abs(l1) > basis_band || std::abs(l2) > basis_band) continue;
        out.lhs += a / (wk * (m2 + ksq(l1, l2)));
      }
    }
  }
  // Pairs with k outside the box: |k| >= B + 1, |k - j| >= |k| - |j|. Comparing
  // each lattice point with its unit cell gives the integral bound below.
  const double u0 = basis_band + 1.0 - std::numbers::sqrt2 - v_radius;
  if (!(u0 >= 1.0)) throw ParameterError("trace_k2_check: basis box too small for the support of V");
  const double cell = std::numbers::sqrt2 / 2.0;
  const double per_mode = kPi / (m2 + u0 * u0) + 2.0 * kPi * (v_radius + cell) / (3.0 * u0 * u0 * u0);
  out.tail = 2.0 * v_sq * per_mode;
  return out;
}

/// V = w^2 for a random real trigonometric polynomial w with |j_i| <= w_band.
inline std::vector<double> random_nonnegative_potential(int grid_n, int w_band, std::uint64_t seed,
                                                        std::uint64_t trial) {
  if (4 * w_band >= grid_n) throw ParameterError("random_nonnegative_potential: grid too coarse");
  std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(trial + 0x5bd1e995ull)));
  std::normal_distribution<double> normal;
  const auto& tr = detail::complex_transform_for(grid_n);
  std::vector<Complex> buf(static_cast<std::size_t>(grid_n) * grid_n, Complex(0.0, 0.0));
  for (int a = -w_band; a <= w_band; ++a) {
    for (int b = -w_band; b <= w_band; ++b) {
      if (a < 0 || (a == 0 && b < 0)) continue;
      const Complex c(normal(rng), (a == 0 && b == 0) ? 0.0 : normal(rng));
      buf[tr.wrap(a, b)] = c;
      buf[tr.wrap(-a, -b)] = std::conj(c);
    }
  }
  tr.synthesize(buf);
  std::vector<double> v(buf.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = buf[i].real() * buf[i].real();
  return v;
}

}  // namespace eba
