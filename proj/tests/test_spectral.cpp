#include <gtest/gtest.h>

#include <cmath>

#include "eba/spectral.hpp"

using namespace eba;

namespace {

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(FourierGrid, BandAndIndexing) {
  const FourierGrid g(32);
  EXPECT_EQ(g.kmax(), 10);
  EXPECT_EQ(g.half(), 17);
  EXPECT_EQ(g.spectral_size(), 32u * 17u);
  EXPECT_EQ(g.k1_at(g.row(-5)), -5);
  EXPECT_EQ(g.k1_at(g.row(7)), 7);
  EXPECT_TRUE(g.retained(10, -10));
  EXPECT_FALSE(g.retained(11, 0));
  EXPECT_FALSE(g.retained(0, 0));
  EXPECT_THROW(FourierGrid(5), ParameterError);
  EXPECT_THROW(FourierGrid(2), ParameterError);
}

TEST(ModelParams, RejectsNonPositive) {
  EXPECT_THROW(ModelParams(0.0, 1.0), ParameterError);
  EXPECT_THROW(ModelParams(1.0, -1.0), ParameterError);
  EXPECT_NO_THROW(ModelParams(0.1, 0.5));
}

TEST(SpectralField, HermitianSetGet) {
  const FourierGrid g(16);
  SpectralField f(g);
  f.set(3, -2, Complex(1.0, 2.0));
  EXPECT_EQ(f.get(3, -2), Complex(1.0, 2.0));
  EXPECT_EQ(f.get(-3, 2), Complex(1.0, -2.0));
  f.set(-4, 0, Complex(0.5, 0.25));
  EXPECT_EQ(f.get(4, 0), Complex(0.5, -0.25));
}

TEST(Transform, RoundTripAndSampling) {
  const FourierGrid g(32);
  const SpectralField f = random_field(g, 11);
  const SpectralField back = to_spectral(g, to_real(f));
  EXPECT_LT(max_abs_diff(f, back), 1e-14);

  // sin(2 x1) cos(3 x2) = sum of four modes with coefficient -i/4 or i/4
  const SpectralField s = sample(g, [](double x1, double x2) { return std::sin(2 * x1) * std::cos(3 * x2); });
  EXPECT_NEAR(std::abs(s.get(2, 3) - Complex(0.0, -0.25)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.get(2, -3) - Complex(0.0, -0.25)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.get(-2, 3) - Complex(0.0, 0.25)), 0.0, 1e-15);
  EXPECT_NEAR(norm_l2_sq(s), kTorusArea / 4.0, 1e-12);
}

TEST(Transform, ParsevalMatchesQuadrature) {
  const FourierGrid g(32);
  const SpectralField f = random_field(g, 3);
  const auto x = to_real(f);
  double q = 0.0;
  for (double v : x) q += v * v;
  q *= (kTwoPi / g.n()) * (kTwoPi / g.n());
  EXPECT_NEAR(norm_l2_sq(f), q, 1e-12 * q);
}

TEST(Operators, DerivativesOfTrigFunctions) {
  const FourierGrid g(32);
  const SpectralField f = sample(g, [](double x1, double x2) { return std::sin(3 * x1 + 2 * x2); });
  const SpectralField df1 = sample(g, [](double x1, double x2) { return 3 * std::cos(3 * x1 + 2 * x2); });
  const SpectralField df2 = sample(g, [](double x1, double x2) { return 2 * std::cos(3 * x1 + 2 * x2); });
  EXPECT_LT(max_abs_diff(d1(f), df1), 1e-13);
  EXPECT_LT(max_abs_diff(d2(f), df2), 1e-13);
  EXPECT_LT(max_abs_diff(laplacian(f), -13.0 * f), 1e-13);
  EXPECT_LT(max_abs_diff(inverse_laplacian(laplacian(f)), f), 1e-14);
  EXPECT_LT(max_abs_diff(helmholtz(smooth(f, 0.3), 0.3), f), 1e-14);
  EXPECT_THROW(smooth(f, -1.0), ParameterError);
}

TEST(Operators, LerayProjectionIsSolenoidalAndIdempotent) {
  const FourierGrid g(32);
  const VectorField v(random_field(g, 1), random_field(g, 2));
  const VectorField p = leray_project(v);
  EXPECT_LT(max_divergence_residual(p), 1e-13);
  const VectorField pp = leray_project(p);
  EXPECT_LT(max_abs_diff(pp.u1, p.u1) + max_abs_diff(pp.u2, p.u2), 1e-15);
}

TEST(Operators, FilteredVelocityHasFilteredCurl) {
  const FourierGrid g(32);
  const SpectralField w = random_field(g, 5);
  const double alpha = 0.05;
  const VectorField ub = velocity_from_vorticity(w, alpha);
  EXPECT_LT(max_abs_diff(curl(ub), smooth(w, alpha)), 1e-13);
  EXPECT_LT(max_divergence_residual(ub), 1e-13);
  EXPECT_LT(max_abs_diff(curl(velocity_from_curl(w)), w), 1e-13);
}

TEST(Jacobian, ClosedFormProduct) {
  const FourierGrid g(32);
  const SpectralField a = sample(g, [](double x1, double) { return std::sin(x1); });
  const SpectralField b = sample(g, [](double, double x2) { return std::sin(x2); });
  const SpectralField expected = sample(g, [](double x1, double x2) { return std::cos(x1) * std::cos(x2); });
  EXPECT_LT(max_abs_diff(jacobian(a, b), expected), 1e-14);
}

TEST(Jacobian, AntisymmetryAndOrthogonality) {
  const FourierGrid g(64);
  const SpectralField a = random_field(g, 21);
  const SpectralField b = random_field(g, 22);
  const SpectralField jab = jacobian(a, b);
  const SpectralField jba = jacobian(b, a);
  const double scale = norm_l2(jab);
  EXPECT_LT(norm_l2(jab + jba), 1e-13 * scale);
  // integral of J(a, b) b and J(a, b) a vanish for band-limited fields
  EXPECT_LT(std::abs(inner(jab, b)), 1e-12 * scale * norm_l2(b));
  EXPECT_LT(std::abs(inner(jab, a)), 1e-12 * scale * norm_l2(a));
}

TEST(InnerProducts, AlphaInnerWeightsModes) {
  const FourierGrid g(16);
  VectorField v(g);
  v.u1.set(0, 2, Complex(1.0, 0.0));
  const double alpha = 0.25;
  // |v|^2 = (2 pi)^2 * 2 |1|^2 for the mode and its partner; weight 1/(1 + 4 alpha)
  EXPECT_NEAR(alpha_inner(v, v, alpha), kTorusArea * 2.0 / 2.0, 1e-12);
  EXPECT_NEAR(alpha_norm(v, 0.0), std::sqrt(inner(v, v)), 1e-12);
}

TEST(RandomField, DeterministicZeroMeanBandLimited) {
  const FourierGrid g(32);
  const SpectralField a = random_field(g, 9);
  const SpectralField b = random_field(g, 9);
  EXPECT_EQ(max_abs_diff(a, b), 0.0);
  EXPECT_EQ(a.get(0, 0), Complex(0.0, 0.0));
  EXPECT_EQ(a.get(g.kmax() + 1, 0), Complex(0.0, 0.0));
  EXPECT_GT(norm_l2(a), 0.0);
  const VectorField v = random_solenoidal(g, 4);
  EXPECT_LT(max_divergence_residual(v), 1e-13);
}

TEST(GridMismatch, Detected) {
  SpectralField a{FourierGrid(16)};
  SpectralField b{FourierGrid(32)};
  EXPECT_THROW(a += b, GridMismatch);
  EXPECT_THROW(inner(a, b), GridMismatch);
}
