#include <gtest/gtest.h>

#include "cranopt/errors.hpp"
#include "cranopt/rates.hpp"
#include "oracles.hpp"

using namespace cranopt;

namespace {

CMatrix scalar(double v) { return CMatrix::Constant(1, 1, cplx(v)); }

CMatrix mat2(double a, double b, double c, double d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

/// Two scalar BSs, AA^H = [[1,.5],[.5,1]], Omega = [[.5,.2],[.2,.5]].
struct TwoBs {
  NetworkConfig cfg = NetworkConfig::uniform(2, 1, 1, 1, 10.0, 10.0);
  Design d;
  TwoBs() {
    d.r = {mat2(1, 0.5, 0.5, 1)};
    d.omega = mat2(0.5, 0.2, 0.2, 0.5);
  }
};

}  // namespace

TEST(UserRate, ZeroSignalGivesZero) {
  const auto cfg = NetworkConfig::uniform(2, 2, 2, 1, 1.0, 1.0);
  const auto ch = fading_channels(cfg, 1.0, 5);
  oracle::Rng rng(1);
  Design d = Design::zeros(cfg);
  d.omega = rng.pd(4);
  for (int k = 0; k < 2; ++k) EXPECT_EQ(user_rate(k, ch, d), 0.0);
}

TEST(UserRate, ScalarSingleMs) {
  const auto cfg = NetworkConfig::uniform(1, 1, 1, 1, 3.0, 2.0);
  const ChannelSet ch(cfg, {scalar(1.0)});
  const Design d{{scalar(3.0)}, scalar(1.0)};
  EXPECT_NEAR(user_rate(0, ch, d), std::log2(5.0) - std::log2(2.0), 1e-12);
  EXPECT_NEAR(user_rate(0, ch, d), 1.3219, 1e-4);
}

TEST(UserRate, ScalarTwoMsAggregate) {
  // One scalar BS, both MSs see h = 1: signal 2, interference 1, noise 1.
  const auto cfg = NetworkConfig::uniform(1, 2, 1, 1, 3.0, 2.0);
  const ChannelSet ch(cfg, {scalar(1.0), scalar(1.0)});
  const Design d{{scalar(2.0), scalar(1.0)}, scalar(1.0)};
  EXPECT_NEAR(user_rate(0, ch, d), std::log2(5.0) - std::log2(3.0), 1e-12);
  EXPECT_NEAR(user_rate(0, ch, d), 0.7370, 1e-4);
}

TEST(UserRate, MatchesOracleAndIsNonnegative) {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto cfg = NetworkConfig::uniform(3, 2, 2, 2, 1.0, 1.0);
    cfg.streams = {1, 2};
    const auto ch = fading_channels(cfg, 0.5, static_cast<std::uint64_t>(trial));
    const auto d = oracle::random_design(cfg, rng);
    for (int k = 0; k < 2; ++k) {
      const double r = user_rate(k, ch, d);
      EXPECT_GE(r, 0.0);
      EXPECT_NEAR(r, oracle::rate(ch.h(k), d.r, k, {1 - k}, d.omega), 1e-9);
    }
  }
}

TEST(UserRate, PrecoderOverloadAgrees) {
  oracle::Rng rng(2);
  const auto cfg = NetworkConfig::uniform(2, 2, 2, 1, 1.0, 1.0);
  const auto ch = fading_channels(cfg, 1.0, 3);
  const Precoder prec({rng.gaussian(4, 1), rng.gaussian(4, 1)});
  const QuantCov q(rng.pd(4));
  const Design d = make_design(prec, q);
  for (int k = 0; k < 2; ++k) EXPECT_DOUBLE_EQ(user_rate(k, ch, prec, q), user_rate(k, ch, d));
}

TEST(UserRate, RejectsNonHermitianOmega) {
  const auto cfg = NetworkConfig::uniform(2, 1, 1, 1, 1.0, 1.0);
  const ChannelSet ch(cfg, {CMatrix::Ones(1, 2)});
  Design d{{CMatrix::Identity(2, 2)}, mat2(1, 0.5, 0.1, 1)};
  EXPECT_THROW(user_rate(0, ch, d), DomainError);
  d.omega = CMatrix::Identity(3, 3);
  EXPECT_THROW(user_rate(0, ch, d), DimensionError);
}

TEST(DpcRate, ScalarTwoMs) {
  const auto cfg = NetworkConfig::uniform(1, 2, 1, 1, 3.0, 2.0);
  const ChannelSet ch(cfg, {scalar(1.0), scalar(1.0)});
  const Design d{{scalar(2.0), scalar(1.0)}, scalar(1.0)};
  const std::vector<int> perm{0, 1};
  EXPECT_NEAR(dpc_rate(0, perm, ch, d), std::log2(5.0 / 3.0), 1e-12);
  EXPECT_NEAR(dpc_rate(1, perm, ch, d), std::log2(3.0 / 2.0), 1e-12);
  EXPECT_NEAR(dpc_rate(0, perm, ch, d), 0.7370, 1e-4);
  EXPECT_NEAR(dpc_rate(1, perm, ch, d), 0.5850, 1e-4);
}

TEST(DpcRate, LastEncodedSeesOnlyQuantizationNoise) {
  oracle::Rng rng(4);
  const auto cfg = NetworkConfig::uniform(2, 3, 2, 1, 1.0, 1.0);
  const auto ch = fading_channels(cfg, 1.0, 8);
  const auto d = oracle::random_design(cfg, rng);
  const std::vector<int> perm{2, 0, 1};
  EXPECT_NEAR(dpc_rate(2, perm, ch, d), oracle::rate(ch.h(1), d.r, 1, {}, d.omega), 1e-10);
}

TEST(DpcRate, SingleUserEqualsLinear) {
  oracle::Rng rng(5);
  const auto cfg = NetworkConfig::uniform(2, 1, 2, 2, 1.0, 1.0);
  const auto ch = fading_channels(cfg, 1.0, 1);
  const auto d = oracle::random_design(cfg, rng);
  EXPECT_DOUBLE_EQ(dpc_rate(0, {0}, ch, d), user_rate(0, ch, d));
}

TEST(DpcRate, DominatesLinear) {
  oracle::Rng rng(6);
  const auto cfg = NetworkConfig::uniform(3, 3, 1, 1, 1.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const auto ch = fading_channels(cfg, 0.7, static_cast<std::uint64_t>(t));
    const auto d = oracle::random_design(cfg, rng);
    double lin = 0.0;
    for (int k = 0; k < 3; ++k) lin += user_rate(k, ch, d);
    for (const auto& perm : oracle::permutations(3)) {
      double dpc = 0.0;
      for (int p = 0; p < 3; ++p) dpc += dpc_rate(p, perm, ch, d);
      EXPECT_GE(dpc, lin - 1e-12);
    }
  }
}

TEST(DpcRate, RejectsBadPermutation) {
  const auto cfg = NetworkConfig::uniform(1, 2, 1, 1, 1.0, 1.0);
  const ChannelSet ch(cfg, {scalar(1.0), scalar(1.0)});
  const Design d{{scalar(1.0), scalar(1.0)}, scalar(1.0)};
  EXPECT_THROW(dpc_rate(0, {0, 0}, ch, d), std::invalid_argument);
  EXPECT_THROW(dpc_rate(0, {0}, ch, d), std::invalid_argument);
}

TEST(Backhaul, ScalarSingleton) {
  const auto cfg = NetworkConfig::uniform(1, 1, 1, 1, 3.0, 2.0);
  const Design d{{scalar(3.0)}, scalar(1.0)};
  EXPECT_NEAR(backhaul_subset_rate(cfg, 1, d), 2.0, 1e-12);
  EXPECT_NEAR(independent_backhaul_rate(cfg, 0, d), 2.0, 1e-12);
}

TEST(Backhaul, TwoBsDeterminantOracle) {
  const TwoBs x;
  const double want = 2.0 * std::log2(1.5) - std::log2(0.21);
  EXPECT_NEAR(backhaul_subset_rate(x.cfg, 0b11, x.d), want, 1e-12);
  EXPECT_NEAR(want, 3.4214, 1e-4);
}

TEST(Backhaul, BlockDiagonalFactorizes) {
  oracle::Rng rng(7);
  NetworkConfig cfg = NetworkConfig::uniform(3, 2, 2, 1, 1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    auto d = oracle::random_design(cfg, rng);
    CMatrix bd = CMatrix::Zero(6, 6);
    for (int i = 0; i < 3; ++i) bd.block(2 * i, 2 * i, 2, 2) = rng.pd(2);
    d.omega = bd;
    for (BsSubset s = 1; s < 8; ++s) {
      double sum = 0.0;
      for (int i : subset_members(s)) sum += independent_backhaul_rate(cfg, i, d);
      EXPECT_NEAR(backhaul_subset_rate(cfg, s, d), sum, 1e-10);
    }
  }
}

TEST(Backhaul, ZeroSignalGivesZero) {
  oracle::Rng rng(8);
  const auto cfg = NetworkConfig::uniform(2, 1, 2, 1, 1.0, 1.0);
  Design d = Design::zeros(cfg);
  d.omega = rng.pd(4);
  EXPECT_NEAR(independent_backhaul_rate(cfg, 0, d), 0.0, 1e-12);
  EXPECT_NEAR(independent_backhaul_rate(cfg, 1, d), 0.0, 1e-12);
}

TEST(Backhaul, IndependentEqualsSingletonAndOracle) {
  oracle::Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    NetworkConfig cfg = NetworkConfig::uniform(rng.integer(1, 4), 2, 1, 1, 1.0, 1.0);
    for (auto& a : cfg.bs_antennas) a = rng.integer(1, 3);
    const auto d = oracle::random_design(cfg, rng);
    for (int i = 0; i < cfg.n_bs(); ++i) {
      const BsSubset s = BsSubset{1} << i;
      EXPECT_EQ(independent_backhaul_rate(cfg, i, d), backhaul_subset_rate(cfg, s, d));
      EXPECT_NEAR(backhaul_subset_rate(cfg, s, d), oracle::g(cfg.bs_antennas, {i}, d.total_signal(), d.omega), 1e-9);
    }
  }
}

TEST(Backhaul, SingularOmegaNamesSubset) {
  const auto cfg = NetworkConfig::uniform(2, 1, 1, 1, 1.0, 1.0);
  Design d{{CMatrix::Identity(2, 2)}, mat2(1, -1, -1, 1) * -1.0};
  try {
    backhaul_subset_rate(cfg, 0b11, d);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("subset {1,2}"), std::string::npos) << e.what();
  }
}

TEST(Backhaul, RegularizesBoundaryOmega) {
  const auto cfg = NetworkConfig::uniform(2, 1, 1, 1, 1.0, 1.0);
  const Design d{{CMatrix::Identity(2, 2)}, mat2(1, 1, 1, 1)};
  const auto g = backhaul_subset_rate_ex(cfg, 0b11, d);
  EXPECT_TRUE(g.regularized);
  EXPECT_TRUE(std::isfinite(g.bits));
}

TEST(Feasibility, ZeroSignalDiagonalOmega) {
  const auto cfg = NetworkConfig::uniform(3, 2, 1, 1, 1.0, 0.0);
  Design d = Design::zeros(cfg);
  d.omega = CMatrix::Identity(3, 3) * 0.2;
  const auto rep = check_feasible(cfg, d, 1e-9);
  EXPECT_TRUE(rep.feasible);
  for (const auto& c : rep.constraints) {
    if (c.kind == ConstraintStatus::Kind::Backhaul) EXPECT_NEAR(c.value, 0.0, 1e-12);
  }
}

TEST(Feasibility, ScalarBackhaulViolation) {
  const auto cfg = NetworkConfig::uniform(1, 1, 1, 1, 4.0, 1.9);
  const Design d{{scalar(3.0)}, scalar(1.0)};
  const auto rep = check_feasible(cfg, d, 1e-9);
  EXPECT_FALSE(rep.feasible);
  EXPECT_NEAR(rep.worst_violation, 0.1, 1e-12);
  EXPECT_EQ(rep.constraints[rep.worst_index].kind, ConstraintStatus::Kind::Backhaul);
  EXPECT_EQ(rep.describe(rep.worst_index), "backhaul{1}");
}

TEST(Feasibility, PowerIsSignalPlusNoise) {
  auto cfg = NetworkConfig::uniform(1, 1, 1, 1, 4.0, 10.0);
  const Design d{{scalar(3.0)}, scalar(1.0)};
  auto rep = check_feasible(cfg, d, 1e-9);
  EXPECT_TRUE(rep.feasible);
  EXPECT_NEAR(rep.constraints.back().value, 4.0, 1e-12);
  EXPECT_EQ(rep.describe(rep.constraints.size() - 1), "power[BS 1]");
  ASSERT_EQ(rep.active.size(), 1U);
  cfg.powers = {3.99};
  EXPECT_FALSE(check_feasible(cfg, d, 1e-9).feasible);
}

TEST(Feasibility, EnumerationCap) {
  const auto cfg = NetworkConfig::uniform(13, 1, 1, 1, 1.0, 1.0);
  Design d = Design::zeros(cfg);
  d.omega = CMatrix::Identity(13, 13);
  EXPECT_THROW(check_feasible(cfg, d, 1e-9), CapacityExceeded);
}

TEST(CornerPoint, TwoBsOracle) {
  const TwoBs x;
  const auto c = corner_point(x.cfg, {0, 1}, x.d);
  ASSERT_EQ(c.size(), 2U);
  EXPECT_NEAR(c[0], std::log2(3.0), 1e-12);
  EXPECT_NEAR(c[1], std::log2(1.5 / 0.42), 1e-12);
  EXPECT_NEAR(c[0], 1.5850, 1e-4);
  EXPECT_NEAR(c[1], 1.8365, 1e-4);
  EXPECT_NEAR(c[0] + c[1], backhaul_subset_rate(x.cfg, 0b11, x.d), 1e-8);
}

TEST(CornerPoint, BlockDiagonalGivesIndependentRates) {
  oracle::Rng rng(12);
  const auto cfg = NetworkConfig::uniform(3, 2, 2, 1, 1.0, 1.0);
  auto d = oracle::random_design(cfg, rng);
  CMatrix bd = CMatrix::Zero(6, 6);
  for (int i = 0; i < 3; ++i) bd.block(2 * i, 2 * i, 2, 2) = rng.pd(2);
  d.omega = bd;
  for (const auto& perm : oracle::permutations(3)) {
    const auto c = corner_point(cfg, perm, d);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(c[static_cast<std::size_t>(i)], independent_backhaul_rate(cfg, perm[static_cast<std::size_t>(i)], d), 1e-10);
  }
}

TEST(CornerPoint, Telescoping) {
  oracle::Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    NetworkConfig cfg = NetworkConfig::uniform(rng.integer(1, 4), 1, 1, 1, 1.0, 1.0);
    for (auto& a : cfg.bs_antennas) a = rng.integer(1, 2);
    const auto d = oracle::random_design(cfg, rng);
    const CMatrix sig = d.total_signal();
    for (const auto& perm : oracle::permutations(cfg.n_bs())) {
      const auto c = corner_point(cfg, perm, d);
      double run = 0.0;
      std::vector<int> prefix;
      for (std::size_t i = 0; i < perm.size(); ++i) {
        run += c[i];
        prefix.push_back(perm[i]);
        EXPECT_NEAR(run, oracle::g(cfg.bs_antennas, prefix, sig, d.omega), 1e-8);
      }
    }
  }
}

TEST(Contrapolymatroid, MonotoneAndSupermodular) {
  oracle::Rng rng(14);
  for (int t = 0; t < 100; ++t) {
    NetworkConfig cfg = NetworkConfig::uniform(rng.integer(2, 4), 2, 1, 1, 1.0, 1.0);
    for (auto& a : cfg.bs_antennas) a = rng.integer(1, 2);
    const auto d = oracle::random_design(cfg, rng);
    auto g = [&](BsSubset s) { return s == 0 ? 0.0 : backhaul_subset_rate(cfg, s, d); };
    const BsSubset all = cfg.all_bs();
    for (BsSubset s = 0; s <= all; ++s) {
      for (BsSubset u = 0; u <= all; ++u) {
        if ((s & u) == s) EXPECT_LE(g(s), g(u) + 1e-9);
        EXPECT_LE(g(s) + g(u), g(s | u) + g(s & u) + 1e-9);
      }
    }
  }
}

TEST(CornerDetection, DiagonalAtIndependentRatesPicksFirstPermutation) {
  oracle::Rng rng(15);
  auto cfg = NetworkConfig::uniform(3, 2, 1, 1, 10.0, 0.0);
  auto d = oracle::random_design(cfg, rng);
  d.omega = CMatrix::Zero(3, 3);
  d.omega.diagonal() << 0.3, 0.5, 0.7;
  for (int i = 0; i < 3; ++i) cfg.backhaul[static_cast<std::size_t>(i)] = independent_backhaul_rate(cfg, i, d);
  for (const auto& perm : oracle::permutations(3)) EXPECT_TRUE(is_corner_ordering(cfg, d, perm, 1e-9));
  const auto found = detect_corner_ordering(cfg, d, 1e-9);
  ASSERT_TRUE(found);
  EXPECT_EQ(*found, (std::vector<int>{0, 1, 2}));
}

TEST(CornerDetection, InteriorPointHasNone) {
  oracle::Rng rng(16);
  const auto cfg = NetworkConfig::uniform(3, 2, 1, 1, 10.0, 50.0);
  const auto d = oracle::random_design(cfg, rng);
  EXPECT_FALSE(detect_corner_ordering(cfg, d, 1e-6));
}

TEST(CornerDetection, FindsNestedTightOrder) {
  const TwoBs x;
  auto cfg = x.cfg;
  // Tight for {2} and {1,2} only: order (2,1).
  cfg.backhaul = {backhaul_subset_rate(cfg, 0b11, x.d) - independent_backhaul_rate(cfg, 1, x.d),
                  independent_backhaul_rate(cfg, 1, x.d)};
  const auto found = detect_corner_ordering(cfg, x.d, 1e-9);
  ASSERT_TRUE(found);
  EXPECT_EQ(*found, (std::vector<int>{1, 0}));
}

TEST(WeightedSum, Linearity) {
  const auto cfg = NetworkConfig::uniform(3, 3, 1, 1, 10.0, 10.0);
  const auto ch = wyner_channels(cfg, 0.0);
  Design d = Design::zeros(cfg);
  for (int k = 0; k < 3; ++k) d.r[static_cast<std::size_t>(k)](k, k) = 2.0;
  d.omega = CMatrix::Identity(3, 3) * 0.5;
  const double r = std::log2(1 + 2.5) - std::log2(1.5);
  auto rep = weighted_sum_rate(cfg, ch, d);
  EXPECT_NEAR(rep.weighted_sum, 3 * r, 1e-12);
  auto zero = cfg;
  zero.weights = {0, 0, 0};
  EXPECT_EQ(weighted_sum_rate(zero, ch, d).weighted_sum, 0.0);
}

TEST(WeightedSum, ScalarInstanceAndConsistency) {
  auto cfg = NetworkConfig::uniform(1, 1, 1, 1, 4.0, 2.0);
  const ChannelSet ch(cfg, {scalar(1.0)});
  const Design d{{scalar(3.0)}, scalar(1.0)};
  const auto rep = weighted_sum_rate(cfg, ch, d);
  EXPECT_NEAR(rep.weighted_sum, 1.3219, 1e-4);
  EXPECT_EQ(rep.backhaul.size(), 1U);
  EXPECT_NEAR(rep.bs_power[0], 4.0, 1e-12);

  oracle::Rng rng(17);
  auto cfg3 = NetworkConfig::uniform(2, 3, 2, 1, 1.0, 1.0);
  cfg3.weights = {0.5, 2.0, 1.25};
  const auto ch3 = fading_channels(cfg3, 1.0, 4);
  const auto d3 = oracle::random_design(cfg3, rng);
  const auto rep3 = weighted_sum_rate(cfg3, ch3, d3);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += cfg3.weights[static_cast<std::size_t>(k)] * rep3.user_rates[static_cast<std::size_t>(k)];
  EXPECT_EQ(rep3.weighted_sum, s);
}

TEST(Precoder, RecoveryFromCovariances) {
  oracle::Rng rng(18);
  std::vector<CMatrix> r{rng.psd(4, 1), rng.psd(4, 2), CMatrix::Zero(4, 4)};
  const auto prec = Precoder::from_covariances(r);
  for (int k = 0; k < 3; ++k) {
    const CMatrix back = prec.covariance(k);
    const double denom = std::max(1.0, r[static_cast<std::size_t>(k)].norm());
    EXPECT_LE((back - r[static_cast<std::size_t>(k)]).norm() / denom, 1e-8);
  }
  EXPECT_EQ(prec.a(0).cols(), 1);
  EXPECT_EQ(prec.a(1).cols(), 2);
}

TEST(QuantCov, SymmetrizesAndSlicesBlocks) {
  NetworkConfig cfg = NetworkConfig::uniform(2, 1, 1, 1, 1.0, 1.0);
  cfg.bs_antennas = {1, 2};
  oracle::Rng rng(19);
  CMatrix m = rng.pd(3);
  m(0, 1) += cplx(1e-12, 0);
  const QuantCov q(m);
  EXPECT_TRUE(q.matrix().isApprox(q.matrix().adjoint(), 0.0));
  EXPECT_EQ(q.block(cfg, 0, 1), q.block(cfg, 1, 0).adjoint());
  EXPECT_EQ(q.block(cfg, 1, 1).rows(), 2);
}
