#include <gtest/gtest.h>

#include <cmath>

#include "eba/bessel.hpp"
#include "eba/inequalities.hpp"

using namespace eba;

namespace {

// K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt; the trapezoid rule converges
// geometrically for this integrand.
double bessel_k_quadrature(int nu, double x) {
  const double h = 0.01;
  double sum = 0.5 * std::exp(-x);
  for (int i = 1;; ++i) {
    const double t = i * h;
    const double term = std::exp(-x * std::cosh(t)) * std::cosh(nu * t);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum * h;
}

// F(m) = m^2 sum_{k != 0} (m^2 + |k|^2)^{-2} over |k_i| <= R.
double box_sum(double m, int R) {
  const double m2 = m * m;
  double s = 0.0;
  for (int a = -R; a <= R; ++a)
    for (int b = -R; b <= R; ++b)
      if (a != 0 || b != 0) {
        const double w = m2 + a * a + b * b;
        s += 1.0 / (w * w);
      }
  return m2 * s;
}

}  // namespace

TEST(Bessel, MatchesHighPrecisionReference) {
  struct Ref {
    double x, k0, k1;
  };
  const Ref refs[] = {
      {0.01, 4.72124473016109494, 99.9738941182962456},
      {0.1, 2.42706902470201656, 9.85384478087060557},
      {0.5, 0.924419071227665862, 1.65644112000330089},
      {1.0, 0.421024438240708333, 0.601907230197234575},
      {2.0, 0.113893872749533436, 0.139865881816522427},
      {3.5, 0.0195988971703684891, 0.0222393929259238337},
      {5.0, 0.00369109833404259427, 0.00404461344545216421},
      {10.0, 1.77800623161676518e-5, 1.86487734538255846e-5},
      {30.0, 2.13247749646305637e-14, 2.16773200189154942e-14},
  };
  for (const auto& r : refs) {
    const auto k = bessel_k01(r.x);
    EXPECT_NEAR(k.k0 / r.k0, 1.0, 1e-14) << "x=" << r.x;
    EXPECT_NEAR(k.k1 / r.k1, 1.0, 1e-14) << "x=" << r.x;
  }
  EXPECT_THROW(bessel_k1(0.0), ParameterError);
}

TEST(Bessel, MatchesIntegralRepresentation) {
  for (double x : log_grid(0.05, 40.0, 37)) {
    EXPECT_NEAR(bessel_k1(x) / bessel_k_quadrature(1, x), 1.0, 1e-12) << "x=" << x;
    EXPECT_NEAR(bessel_k0(x) / bessel_k_quadrature(0, x), 1.0, 1e-12) << "x=" << x;
  }
  // Continuity across the switch between series and continued fraction.
  EXPECT_NEAR(bessel_k1(std::nextafter(2.0, 0.0)) / bessel_k1(std::nextafter(2.0, 3.0)), 1.0, 1e-14);
}

TEST(Bessel, UpperBoundHoldsAndIsAsymptoticallySharp) {
  const auto xs = log_grid(0.01, 50.0, 500);
  const auto chk = k1_bound_check(xs);
  EXPECT_GT(chk.worst_margin, 0.0);
  EXPECT_LT(chk.max_ratio, 1.0);
  const double r50 = bessel_k1(50.0) / k1_upper_bound(50.0);
  EXPECT_GT(r50, 0.98);
  EXPECT_LT(r50, 1.0);
}

TEST(LatticeSum, ReferenceValueAtOne) {
  const double ref = 2.22658136442335977;
  EXPECT_NEAR(lattice_F(1.0, 4000).F_direct, ref, 1e-6);
  EXPECT_NEAR(lattice_F(1.0, 4000).F_direct + lattice_F(1.0, 4000).tail_bound, ref, 1e-6);
  EXPECT_GE(lattice_F(1.0, 4000).F_direct + lattice_F(1.0, 4000).tail_bound, ref - 1e-14);
  EXPECT_NEAR(poisson_F(1.0), ref, 1e-13);
}

TEST(LatticeSum, RowWiseMatchesBruteForce) {
  for (double m : {0.3, 1.0, 3.0}) {
    const int R = 300;
    const double brute = box_sum(m, R);
    const auto r = lattice_F(m, 100000);
    // Brute force misses everything outside the box; the row-wise value includes it
    // up to its own tail.
    EXPECT_GT(r.F_direct + r.tail_bound, brute);
    EXPECT_LT(r.F_direct - brute, 2.0 * kPi * m * m / (R * R)) << "m=" << m;
  }
}

TEST(LatticeSum, DiscAndRowWiseAgree) {
  for (double m : {0.5, 2.0, 8.0}) {
    const auto disc = lattice_F_disc(m, 600);
    const auto row = lattice_F(m, 600);
    EXPECT_LE(disc.F_direct, row.F_direct + row.tail_bound);
    EXPECT_LE(row.F_direct, disc.F_direct + disc.tail_bound);
    EXPECT_GT(disc.margin, 0.0);
  }
}

TEST(LatticeSum, PoissonTruncationConverged) {
  for (double m : {0.1, 0.5, 1.0, 4.0, 16.0}) {
    const double a = poisson_F(m);
    const long k = static_cast<long>(std::ceil(45.0 / (2.0 * kPi * m))) + 1;
    EXPECT_NEAR(poisson_F(m, 2 * k), a, 1e-12) << "m=" << m;
    EXPECT_LT(a, kPi);
  }
  EXPECT_NEAR(poisson_F(4.0), kPi - 1.0 / 16.0, 1e-6);
}

TEST(LatticeSum, BelowPiWithTail) {
  for (double m : log_grid(0.1, 16.0, 61)) {
    const auto r = lattice_F(m, 4000);
    EXPECT_GT(r.margin, 0.0) << "m=" << m;
  }
  EXPECT_THROW(lattice_F(0.0, 100), ParameterError);
  EXPECT_THROW(lattice_F(1.0, 4), ParameterError);
}

TEST(Psi, ReferenceValues) {
  EXPECT_NEAR(psi_big(1.0), -0.141093, 1e-5);
  EXPECT_NEAR(phi_argmax(), 1.5936, 1e-3);
  const double x0 = phi_argmax();
  EXPECT_NEAR((2.0 - x0) * std::exp(x0), 2.0, 1e-12);
  const auto [m1, m2] = psi_thresholds();
  EXPECT_NEAR(m1, 0.47824, 1e-4);
  EXPECT_NEAR(m2, 0.35868, 1e-4);
  EXPECT_NEAR(phi_fn(1e-8), 1e-8, 1e-15);
  EXPECT_NEAR(psi_fn(1e-8), 1.0, 1e-8);
  for (double m = 1.0; m < 10.0; m += 0.1) EXPECT_GT(psi_big(m), psi_big(m + 0.1));
}

TEST(Rho, SingleModeClosedForm) {
  const int band = 3;
  const auto modes = band_modes(band);
  EXPECT_EQ(modes.size(), 48u);
  for (std::size_t j : {0ul, 17ul, 47ul}) {
    std::vector<std::vector<Complex>> fam{std::vector<Complex>(modes.size())};
    fam[0][j] = Complex(0.6, 0.8);
    const double m = 0.7;
    const double q = ksq(modes[j].k1, modes[j].k2);
    const double expected = 1.0 / (kTwoPi * (m * m + q));
    EXPECT_NEAR(rho_l2(fam, band, m, 16), expected, 1e-14);
    EXPECT_NEAR(rho_l2(fam, band, m, 16, true), expected, 1e-14);
  }
  std::vector<std::vector<Complex>> fam{std::vector<Complex>(modes.size())};
  EXPECT_THROW(rho_l2(fam, 4, 1.0, 16), ParameterError);
}

TEST(Rho, QuadratureIsExactOnTheBand) {
  // rho of a family on band B is a trigonometric polynomial of degree 2B, so a
  // larger grid must give the same L2 norm.
  const auto fam = random_orthonormal_family(5, 3, 7, 0);
  EXPECT_NEAR(rho_l2(fam, 3, 0.8, 16), rho_l2(fam, 3, 0.8, 32), 1e-14);
  EXPECT_NEAR(rho_l2(fam, 3, 0.8, 16, true), rho_l2(fam, 3, 0.8, 64, true), 1e-14);
}

TEST(Rho, OrthonormalFamily) {
  const auto fam = random_orthonormal_family(6, 2, 3, 5);
  for (std::size_t i = 0; i < fam.size(); ++i)
    for (std::size_t j = 0; j < fam.size(); ++j) {
      Complex dot(0.0, 0.0);
      for (std::size_t p = 0; p < fam[i].size(); ++p) dot += std::conj(fam[i][p]) * fam[j][p];
      EXPECT_NEAR(std::abs(dot - Complex(i == j ? 1.0 : 0.0, 0.0)), 0.0, 1e-13);
    }
  EXPECT_THROW(random_orthonormal_family(25, 2, 3, 5), ParameterError);
}

TEST(Rho, RandomTrialsRespectBound) {
  for (double m : {0.3, 1.0, 3.0})
    for (int n : {1, 4, 12}) {
      const auto samples = rho_l2_check(n, m, 20, 16, 11);
      for (const auto& s : samples) EXPECT_LE(s.rho_l2, s.bound) << "n=" << n << " m=" << m;
    }
  const auto a = rho_l2_check(3, 1.0, 6, 16, 99, false, 1);
  const auto b = rho_l2_check(3, 1.0, 6, 16, 99, false, 3);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].rho_l2, b[i].rho_l2);
}

TEST(Trace, ConstantPotentialGivesLatticeSum) {
  const int n = 16;
  const double c = 1.7;
  const std::vector<double> v(n * n, c);
  for (double m : {0.5, 2.0}) {
    const auto t = trace_k2_check(v, n, m, 30);
    const double exact = lattice_F(m, 100000).F_direct * c * c / (m * m);
    EXPECT_LE(t.lhs, exact);
    EXPECT_GE(t.lhs + t.tail, exact);
    EXPECT_NEAR(exact / t.rhs, lattice_F(m, 100000).F_direct / kPi, 1e-12);
    EXPECT_EQ(t.v_band, 0);
  }
}

TEST(Trace, ZeroAndInvalidPotentials) {
  const int n = 16;
  const auto zero = trace_k2_check(std::vector<double>(n * n, 0.0), n, 1.0, 10);
  EXPECT_EQ(zero.lhs, 0.0);
  EXPECT_EQ(zero.rhs, 0.0);
  std::vector<double> neg(n * n, 1.0);
  neg[5] = -0.1;
  EXPECT_THROW(trace_k2_check(neg, n, 1.0, 10), ParameterError);
  EXPECT_THROW(trace_k2_check(std::vector<double>(10, 1.0), n, 1.0, 10), GridMismatch);
}

TEST(Trace, RandomPotentialsSatisfyInequality) {
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    const auto v = random_nonnegative_potential(32, 2, 4, trial);
    for (double x : v) ASSERT_GE(x, 0.0);
    const auto t = trace_k2_check(v, 32, 1.0, 30);
    EXPECT_LE(t.lhs + t.tail, t.rhs) << "trial=" << trial;
    EXPECT_LE(t.v_band, 4);
  }
}
