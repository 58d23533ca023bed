#include <gtest/gtest.h>

#include "cranopt/errors.hpp"
#include "cranopt/robust.hpp"
#include "oracles.hpp"

using namespace cranopt;

namespace {

CVector vec(std::initializer_list<cplx> v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (cplx x : v) out(i++) = x;
  return out;
}

SinrSpec two_user(double gamma, double c_scale) {
  SinrSpec s;
  s.h_hat = {vec({1.0, cplx(0.3, 0.2)}), vec({cplx(0.2, -0.1), 0.9})};
  s.ellipsoid = {c_scale * CMatrix::Identity(2, 2), c_scale * CMatrix::Identity(2, 2)};
  s.targets = {gamma, gamma};
  return s;
}

NetworkConfig two_bs(double backhaul) { return NetworkConfig::uniform(2, 2, 1, 1, 100.0, backhaul); }

/// Smallest SINR / target over sampled errors on the ellipsoid boundary and inside it.
double worst_ratio(const SinrSpec& s, const Design& d, int samples, std::uint64_t seed) {
  oracle::Rng rng(seed);
  double worst = 1e300;
  for (std::size_t k = 0; k < s.h_hat.size(); ++k) {
    for (int t = 0; t < samples; ++t) {
      const CVector e = (t % 2) ? oracle::ellipsoid_point(s.ellipsoid[k], rng)
                                : oracle::ellipsoid_boundary(s.ellipsoid[k], rng);
      worst = std::min(worst, oracle::sinr(s.h_hat[k] + e, static_cast<int>(k), d.r, d.omega) / s.targets[k]);
    }
  }
  return worst;
}

}  // namespace

TEST(SinrLmi, NominalReduction) {
  // C_k -> inf and beta -> 0 with beta C_k -> inf: the Schur complement of the
  // top-left block tends to h^H Xi h - Gamma, the nominal SINR condition.
  SinrSpec s;
  s.h_hat = {vec({1.0})};
  s.ellipsoid = {CMatrix::Constant(1, 1, 1e12)};
  s.targets = {2.0};
  const double beta = 1e-6;
  const CMatrix omega = CMatrix::Constant(1, 1, 0.1);
  for (double p : {1.0, 2.1, 2.3, 3.0}) {
    const std::vector<CMatrix> r{CMatrix::Constant(1, 1, p)};
    const CMatrix m = build_sinr_lmi(0, r, omega, s, beta);
    const double xi = p - 2.0 * 0.1;
    EXPECT_NEAR(m(1, 1).real(), xi - 2.0 - beta, 1e-12);
    const bool nominal = oracle::sinr(s.h_hat[0], 0, r, omega) >= 2.0 + 1e-3;
    EXPECT_EQ(min_eigenvalue(m) >= 0.0, nominal) << "p=" << p;
  }
}

TEST(SinrLmi, NoBetaRescuesFailedNominalSinr) {
  SinrSpec s;
  s.h_hat = {vec({0.8})};
  s.ellipsoid = {CMatrix::Constant(1, 1, 4.0)};
  s.targets = {3.0};
  const std::vector<CMatrix> r{CMatrix::Constant(1, 1, 2.0)};
  const CMatrix omega = CMatrix::Constant(1, 1, 0.2);
  ASSERT_LT(oracle::sinr(s.h_hat[0], 0, r, omega), 3.0);
  for (int i = 0; i <= 2000; ++i) {
    const double beta = 1e-3 * std::pow(1.01, i) - 1e-3;
    EXPECT_LT(min_eigenvalue(build_sinr_lmi(0, r, omega, s, beta)), 0.0) << beta;
  }
}

TEST(SinrLmi, MatchesOracleBlocks) {
  oracle::Rng rng(51);
  SinrSpec s;
  s.h_hat = {rng.gaussian(3, 1).col(0), rng.gaussian(3, 1).col(0)};
  s.ellipsoid = {rng.pd(3), rng.pd(3)};
  s.targets = {0.7, 1.3};
  const std::vector<CMatrix> r{rng.psd(3, 1), rng.psd(3, 1)};
  const CMatrix omega = rng.pd(3);
  const CMatrix xi = r[1] - 1.3 * r[0] - 1.3 * omega;
  const CMatrix m = build_sinr_lmi(1, r, omega, s, 0.4);
  EXPECT_TRUE(m.topLeftCorner(3, 3).isApprox(xi + 0.4 * s.ellipsoid[1], 1e-12));
  EXPECT_TRUE(m.topRightCorner(3, 1).isApprox(xi * s.h_hat[1], 1e-12));
  EXPECT_NEAR(m(3, 3).real(), s.h_hat[1].dot(xi * s.h_hat[1]).real() - 1.3 - 0.4, 1e-12);
  EXPECT_THROW(build_sinr_lmi(1, r, omega, s, -1.0), std::invalid_argument);
}

TEST(SinrLmi, CertificateHoldsOnSampledErrors) {
  // Random instances where some beta makes the LMI PSD must show no SINR
  // violation anywhere in the ellipsoid.
  oracle::Rng rng(52);
  int certified = 0;
  for (int t = 0; t < 200 && certified < 10; ++t) {
    SinrSpec s;
    s.h_hat = {rng.gaussian(2, 1).col(0) * 2.0};
    s.ellipsoid = {rng.pd(2) * 20.0};
    s.targets = {rng.uniform(0.2, 1.0)};
    const std::vector<CMatrix> r{s.h_hat[0] * s.h_hat[0].adjoint() * rng.uniform(0.5, 3.0)};
    const CMatrix omega = rng.pd(2) * 0.1;
    for (double beta = 0.0; beta < 5.0; beta += 0.05) {
      if (min_eigenvalue(build_sinr_lmi(0, r, omega, s, beta)) >= 0.0) {
        ++certified;
        const Design d{r, omega};
        EXPECT_GE(worst_ratio(s, d, 2000, static_cast<std::uint64_t>(t)), 1.0 - 1e-9);
        break;
      }
    }
  }
  EXPECT_GE(certified, 5);
}

TEST(SinrSolve, CertifiedAndFeasible) {
  const auto s = two_user(1.0, 25.0);
  const auto cfg = two_bs(3.0);
  const auto r = solve_robust_sinr(s, cfg);
  for (double e : r.min_lmi_eigenvalue) EXPECT_GE(e, -1e-9);
  for (double b : r.beta) EXPECT_GE(b, 0.0);
  EXPECT_TRUE(r.feasibility.feasible);
  EXPECT_GE(worst_ratio(s, r.design, 10000, 5), 1.0 - 1e-6);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1] + 1e-9);
  EXPECT_NEAR(r.power, r.trace.back(), 1e-12);
}

TEST(SinrSolve, VanishingTargetsNeedVanishingPower) {
  const auto r = solve_robust_sinr(two_user(1e-6, 25.0), two_bs(3.0));
  EXPECT_LT(r.power, 1e-3);
}

TEST(SinrSolve, ScalarNoUncertaintyMatchesClassicPower) {
  SinrSpec s;
  s.h_hat = {vec({0.8})};
  s.ellipsoid = {CMatrix::Constant(1, 1, 1e10)};
  s.targets = {2.0};
  const auto cfg = NetworkConfig::uniform(1, 1, 1, 1, 100.0, 30.0);
  const auto r = solve_robust_sinr(s, cfg);
  const double classic = 2.0 / 0.64;
  EXPECT_NEAR(r.design.r[0](0, 0).real(), classic, 1e-2 * classic);
  EXPECT_LT(r.design.omega(0, 0).real(), 1e-3);
}

TEST(SinrSolve, LargerUncertaintyNeverCostsLess) {
  const auto cfg = two_bs(3.0);
  double prev = 0.0;
  for (double c : {400.0, 100.0, 25.0, 9.0}) {
    const double p = solve_robust_sinr(two_user(1.0, c), cfg).power;
    EXPECT_GE(p, prev * (1.0 - 1e-4)) << "C_k scale " << c;
    prev = p;
  }
}

TEST(SinrSolve, UnreachableTargetsAreInfeasible) {
  EXPECT_THROW(solve_robust_sinr(two_user(50.0, 25.0), two_bs(0.5)), InfeasibleError);
  EXPECT_THROW(solve_robust_sinr(two_user(1.0, 25.0), two_bs(0.0)), InfeasibleError);
}

TEST(SinrSpec, Validation) {
  auto s = two_user(1.0, 25.0);
  EXPECT_NO_THROW(s.validate(two_bs(1.0)));
  EXPECT_THROW(s.validate(NetworkConfig::uniform(2, 2, 1, 2, 1.0, 1.0)), DimensionError);
  s.targets[0] = 0.0;
  EXPECT_THROW(s.validate(two_bs(1.0)), std::invalid_argument);
  s = two_user(1.0, 25.0);
  s.ellipsoid[1] = -CMatrix::Identity(2, 2);
  EXPECT_THROW(s.validate(two_bs(1.0)), std::invalid_argument);
  s = two_user(1.0, 25.0);
  s.cost = {1.0};
  EXPECT_THROW(s.validate(two_bs(1.0)), DimensionError);
}
