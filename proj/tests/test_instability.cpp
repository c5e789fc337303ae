#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "eba/dynamics.hpp"
#include "eba/instability.hpp"

using namespace eba;

namespace {

Chain sample_chain() { return make_chain(8, 4, 1, 1.0 / 64, 1.0, 2.0); }

}  // namespace

TEST(Kolmogorov, ForcingCurlIsGammaOmega) {
  const FourierGrid g(32);
  const KolmogorovSpec k{4, 3.0, 0.5};
  const SpectralField c = curl(kolmogorov_forcing(k, g));
  const SpectralField w = kolmogorov_vorticity(k, g);
  EXPECT_LT(norm_l2(c - 0.5 * w), 1e-15);
  EXPECT_THROW(kolmogorov_forcing({11, 1.0, 1.0}, g), ParameterError);
  EXPECT_THROW(kolmogorov_forcing({0, 1.0, 1.0}, g), ParameterError);
}

TEST(Chain, CoefficientsMatchDefinition) {
  const Chain c = make_chain(12, 3, -1, 0.01, 1.0, 0.7);
  // n = 1 sits at k2 = 12 - 1 = 11
  const double K1 = 9.0 + 11.0 * 11.0;
  EXPECT_NEAR(c.A(1), (K1 + 0.01 * K1 * K1) / (0.7 * 3 * (K1 - 144.0)), 1e-14);
  EXPECT_NEAR(c.d(1, 0.3), c.A(1) * 1.3, 1e-13);
  EXPECT_EQ(c.Lambda, 0.7);
  EXPECT_THROW(make_chain(12, 0, 0, 0.01, 1.0, 1.0), ParameterError);
  EXPECT_THROW(make_chain(12, 1, 0, 0.01, 1.0, 0.0), ParameterError);
}

TEST(Chain, SignPatternInRegion) {
  const double alpha = 1.0 / 256;
  for (int s : {8, 16, 32}) {
    for (auto [t, r] : region_lattice(s, 0.2)) {
      const Chain c = make_chain(s, t, r, alpha, 1.0, 3.0);
      for (double sigma : {-0.999, -0.5, 0.0, 1.0, 10.0}) {
        EXPECT_LT(c.d(0, sigma), 0.0);
        for (long n : {-5L, -2L, -1L, 1L, 2L, 7L}) EXPECT_GT(c.d(n, sigma), 0.0);
      }
    }
  }
}

TEST(Region, MembershipAndOrdering) {
  EXPECT_TRUE(in_region(12, 0.35, 5, 0));
  EXPECT_FALSE(in_region(12, 0.35, 4, 0));  // t < delta s
  EXPECT_FALSE(in_region(12, 0.35, 7, 0));  // 3 t^2 >= s^2
  EXPECT_FALSE(in_region(12, 0.35, 5, 2));  // 6 r >= s
  const auto pts = region_lattice(12, 0.35);
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts.front(), std::make_pair(5, -1));
  EXPECT_EQ(pts.back(), std::make_pair(6, 1));
  EXPECT_THROW(region_lattice(12, 0.6), ParameterError);
  EXPECT_THROW(region_lattice(12, 0.0), ParameterError);
}

TEST(ContinuedFraction, LimitsAndBrackets) {
  const Chain c = sample_chain();
  const double sigma = 0.3;
  const auto g = continued_fraction_g(c, sigma, 50);
  EXPECT_TRUE(g.converged);
  const double d1 = c.d(1, sigma), dm1 = c.d(-1, sigma), d2 = c.d(2, sigma), dm2 = c.d(-2, sigma);
  EXPECT_LT(g.value, 1.0 / dm1 + 1.0 / d1);
  EXPECT_GT(g.value, 1.0 / (dm1 + 1.0 / dm2) + 1.0 / (d1 + 1.0 / d2));
  EXPECT_LT(continued_fraction_g(c, 1e6, 50).value, 1e-5);
  EXPECT_THROW(continued_fraction_g(c, -1.5, 50), ParameterError);
}

TEST(FSigma, ValuesAndMonotonicity) {
  const Chain c = sample_chain();
  EXPECT_EQ(f_sigma(c, -1.0), 0.0);
  // alpha = 0, t^2 + r^2 = s^2/4: f = (gamma + sigma)/(3 Lambda t)
  const Chain c0 = make_chain(4, 2, 0, 0.0, 1.0, 0.5);
  EXPECT_NEAR(f_sigma(c0, 0.2), 1.2 / (3 * 0.5 * 2), 1e-15);
  double prev_f = f_sigma(c, -0.99), prev_g = continued_fraction_g_adaptive(c, -0.99);
  for (double sigma = -0.9; sigma < 5.0; sigma += 0.1) {
    const double f = f_sigma(c, sigma), g = continued_fraction_g_adaptive(c, sigma);
    EXPECT_GT(f, prev_f);
    EXPECT_LT(g, prev_g);
    prev_f = f;
    prev_g = g;
  }
}

TEST(SolveSigma, MatchesMatrixOracleAtDepth400) {
  const Chain c = sample_chain();
  const double s_cf = solve_sigma(c);
  const double s_mat = chain_matrix_eigen(c, 400);
  EXPECT_NEAR(s_cf, s_mat, 1e-8);
  EXPECT_NEAR(f_sigma(c, s_cf), continued_fraction_g_adaptive(c, s_cf), 1e-9);
}

TEST(SolveSigma, MonotoneInLambdaAndWithinBounds) {
  for (int s : {8, 16}) {
    const double delta = 0.3;
    for (auto [t, r] : region_lattice(s, delta)) {
      const Chain c = make_chain(s, t, r, 1.0 / 128, 1.0, 2.0);
      Chain c2 = c;
      c2.Lambda = 4.0;
      const double a = solve_sigma(c), b = solve_sigma(c2);
      EXPECT_GT(b, a);
      const auto bnd = sigma_bounds(c, delta);
      EXPECT_LE(bnd.lower, a + 1e-12);
      EXPECT_GE(bnd.upper, a - 1e-12);
    }
  }
}

TEST(SolveLambda0, RootAndBounds) {
  const int s = 16;
  const double delta = 0.3, alpha = 1.0 / 128, gamma = 1.0;
  const auto pts = region_lattice(s, delta);
  ASSERT_FALSE(pts.empty());
  for (std::size_t i = 0; i < pts.size(); i += 3) {
    const Chain c = make_chain(s, pts[i].first, pts[i].second, alpha, gamma, 1.0);
    const double L0 = solve_lambda0(c);
    const auto bnd = lambda0_bounds(s, delta, alpha, gamma);
    EXPECT_GT(L0, bnd.lower);
    EXPECT_LT(L0, bnd.upper);
    Chain hi = c, lo = c;
    hi.Lambda = 1.01 * L0;
    lo.Lambda = 0.99 * L0;
    EXPECT_GT(solve_sigma(hi), 0.0);
    EXPECT_LT(solve_sigma(lo), 0.0);
  }
}

TEST(SolveLambda0, MatchesMatrixOracleCrossing) {
  for (auto [t, r] : {std::pair{4, 1}, std::pair{5, -1}}) {
    const Chain c = make_chain(8, t, r, 1.0 / 64, 1.0, 1.0);
    const double L0 = solve_lambda0(c);
    // The chain matrix is linear in Lambda, so its top eigenvalue mu(Lambda) = Lambda mu(1)
    // reaches gamma at Lambda = gamma / mu(1).
    const double mu1 = chain_matrix_eigen(c, 400) + c.gamma;
    const double crossing = c.gamma / mu1;
    EXPECT_NEAR(crossing, L0, 1e-6) << "t=" << t << " r=" << r;
  }
}

TEST(MatrixOracle, DepthStabilityAndSmallLambda) {
  const Chain c = sample_chain();
  EXPECT_LT(std::abs(chain_matrix_eigen(c, 200) - chain_matrix_eigen(c, 400)), 1e-9);
  Chain tiny = c;
  tiny.Lambda = 1e-9;
  EXPECT_NEAR(chain_matrix_eigen(tiny, 50), -c.gamma, 1e-6);
  // The matrix scales linearly with Lambda.
  Chain twice = c;
  twice.Lambda = 2.0 * c.Lambda;
  EXPECT_NEAR(chain_matrix_eigen(twice, 200) + c.gamma, 2.0 * (chain_matrix_eigen(c, 200) + c.gamma), 1e-9);
}

TEST(MatrixOracle, RandomChainsAgreeWithContinuedFraction) {
  std::mt19937_64 rng(42);
  int checked = 0;
  for (int s : {8, 16, 32}) {
    const auto pts = region_lattice(s, 0.2);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    std::uniform_real_distribution<double> lam(0.5, 5.0);
    for (int i = 0; i < 4; ++i) {
      const auto [t, r] = pts[pick(rng)];
      const Chain c = make_chain(s, t, r, 1.0 / 256, 1.0, lam(rng));
      EXPECT_NEAR(solve_sigma(c), chain_matrix_eigen(c, 200), 1e-8) << "s=" << s << " t=" << t << " r=" << r;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 12);
}

TEST(UnstableCount, ConstructedLambdaMakesEveryChainUnstable) {
  const double alpha = 0.0069, gamma = 1.0, delta = 0.35;
  const int s = 12;
  const double Lambda = chain_lambda(lambda_choice(s, delta, alpha, gamma), s, alpha);
  for (const auto& rep : analyze_region(s, delta, alpha, gamma, Lambda, 0)) EXPECT_GT(rep.sigma, 0.0);
  EXPECT_EQ(unstable_count(s, delta, alpha, gamma), 12);
}

TEST(UnstableCount, ConstructedLambdaExceedsLambda0Bound) {
  for (int s : {8, 16, 32}) {
    const double alpha = 1.0 / (s * s), gamma = 1.3, delta = 0.35;
    const double Lambda = chain_lambda(lambda_choice(s, delta, alpha, gamma), s, alpha);
    EXPECT_GE(Lambda, lambda0_bounds(s, delta, alpha, gamma).upper * (1 - 1e-12));
  }
}

TEST(LeadingEigenvalue, MatchesDenseLinearization) {
  // Dense matrix of the velocity-form linearization on a small grid, in real
  // coordinates of the canonical half of the retained vorticity modes.
  const FourierGrid g(16);
  const int s = 2;
  const double alpha = 1.0 / 16, gamma = 1.0;
  for (double Lambda : {1.0, 4.0}) {
    const double lambda = Lambda * 2.0 * kSqrt2 * kPi * (1.0 + alpha * s * s);
    const SpectralField ws = kolmogorov_vorticity({s, lambda, gamma}, g);
    const LinearizedOperator op(ws, ModelParams(alpha, gamma));
    std::vector<std::pair<int, int>> modes;
    for (int k1 = -g.kmax(); k1 <= g.kmax(); ++k1)
      for (int k2 = 0; k2 <= g.kmax(); ++k2)
        if (g.retained(k1, k2) && (k2 > 0 || k1 > 0)) modes.emplace_back(k1, k2);
    const long dim = 2 * static_cast<long>(modes.size());
    Eigen::MatrixXd m(dim, dim);
    for (long j = 0; j < dim; ++j) {
      SpectralField w(g);
      const auto [a1, a2] = modes[static_cast<std::size_t>(j / 2)];
      w.set(a1, a2, j % 2 == 0 ? Complex(1.0, 0.0) : Complex(0.0, 1.0));
      const SpectralField lw = curl(op.apply(velocity_from_curl(w)));
      for (std::size_t i = 0; i < modes.size(); ++i) {
        const Complex c = lw.get(modes[i].first, modes[i].second);
        m(2 * static_cast<long>(i), j) = c.real();
        m(2 * static_cast<long>(i) + 1, j) = c.imag();
      }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& mu : es.eigenvalues()) best = std::max(best, mu.real());
    EXPECT_NEAR(kolmogorov_leading_eigenvalue(s, Lambda, alpha, gamma, g.kmax(), g.kmax()), best, 1e-9)
        << "Lambda=" << Lambda;
  }
}
