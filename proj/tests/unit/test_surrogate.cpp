#include <gtest/gtest.h>

#include "cranopt/errors.hpp"
#include "cranopt/surrogate.hpp"
#include "oracles.hpp"

using namespace cranopt;

namespace {

double true_objective(const NetworkConfig& cfg, const ChannelSet& ch, const Design& d) {
  double s = 0.0;
  for (int k = 0; k < cfg.n_ms(); ++k) s += cfg.weights[static_cast<std::size_t>(k)] * user_rate(k, ch, d);
  return s;
}

}  // namespace

TEST(Phi, EqualsLogdetAtAnchor) {
  EXPECT_NEAR(phi(2.0 * CMatrix::Identity(2, 2), 2.0 * CMatrix::Identity(2, 2)), 2.0, 1e-12);
}

TEST(Phi, ScalarTangent) {
  const double v = phi(CMatrix::Constant(1, 1, 4.0), CMatrix::Constant(1, 1, 2.0));
  EXPECT_NEAR(v, 1.0 + 1.0 / std::log(2.0), 1e-12);
  EXPECT_NEAR(v, 2.4427, 1e-4);
  EXPECT_GE(v, 2.0);
}

TEST(Phi, UpperBoundsLogdet) {
  oracle::Rng rng(21);
  for (int t = 0; t < 1000; ++t) {
    const int n = rng.integer(1, 4);
    const CMatrix x = rng.pd(n, 0.01), y = rng.pd(n, 0.01);
    EXPECT_GE(phi(x, y), oracle::log2det(x) - 1e-9);
  }
}

TEST(Phi, RejectsSingularAnchor) {
  EXPECT_THROW(phi(CMatrix::Identity(2, 2), CMatrix::Zero(2, 2)), DomainError);
  EXPECT_THROW(phi(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)), DimensionError);
}

TEST(Interferers, LinearAndDpc) {
  EXPECT_EQ(interferers(1, 3, std::nullopt), (std::vector<int>{0, 2}));
  EXPECT_EQ(interferers(1, 3, std::vector<int>{2, 1, 0}), (std::vector<int>{0}));
  EXPECT_TRUE(interferers(0, 3, std::vector<int>{2, 1, 0}).empty());
}

TEST(SurrogateObjective, TouchesAtAnchorAndMinorizes) {
  oracle::Rng rng(22);
  for (int t = 0; t < 200; ++t) {
    auto cfg = NetworkConfig::uniform(rng.integer(1, 3), rng.integer(1, 3), rng.integer(1, 2), 1, 1.0, 1.0);
    for (auto& w : cfg.weights) w = rng.uniform(0.0, 2.0);
    const auto ch = fading_channels(cfg, 0.5, static_cast<std::uint64_t>(t));
    const auto anchor = oracle::random_design(cfg, rng);
    const auto cand = oracle::random_design(cfg, rng, rng.uniform(0.1, 3.0));
    EXPECT_NEAR(surrogate_objective(anchor, anchor, cfg, ch), true_objective(cfg, ch, anchor), 1e-9);
    EXPECT_LE(surrogate_objective(cand, anchor, cfg, ch), true_objective(cfg, ch, cand) + 1e-9);
  }
}

TEST(SurrogateObjective, ZeroEverythingIsZero) {
  const auto cfg = NetworkConfig::uniform(2, 2, 1, 1, 1.0, 1.0);
  const auto ch = fading_channels(cfg, 1.0, 0);
  const Design z = Design::zeros(cfg);
  EXPECT_EQ(surrogate_objective(z, z, cfg, ch), 0.0);
}

TEST(SurrogateObjective, DpcTouchesDpcRates) {
  oracle::Rng rng(23);
  const auto cfg = NetworkConfig::uniform(2, 3, 2, 1, 1.0, 1.0);
  const auto ch = fading_channels(cfg, 1.0, 7);
  const auto d = oracle::random_design(cfg, rng);
  const std::vector<int> perm{1, 2, 0};
  double want = 0.0;
  for (int p = 0; p < 3; ++p) want += dpc_rate(p, perm, ch, d);
  EXPECT_NEAR(surrogate_objective(d, d, cfg, ch, perm), want, 1e-10);
}

TEST(SurrogateBackhaul, TouchesAtAnchorAndMajorizes) {
  oracle::Rng rng(24);
  for (int t = 0; t < 200; ++t) {
    auto cfg = NetworkConfig::uniform(rng.integer(1, 4), 2, rng.integer(1, 2), 1, 1.0, 1.0);
    const auto anchor = oracle::random_design(cfg, rng);
    const auto cand = oracle::random_design(cfg, rng, rng.uniform(0.1, 3.0));
    for (BsSubset s = 1; s <= cfg.all_bs(); ++s) {
      EXPECT_NEAR(surrogate_backhaul(anchor, anchor, cfg, s), backhaul_subset_rate(cfg, s, anchor), 1e-9);
      EXPECT_GE(surrogate_backhaul(cand, anchor, cfg, s), backhaul_subset_rate(cfg, s, cand) - 1e-9);
    }
  }
}

TEST(SurrogateBackhaul, SingletonBlockDiagonalIsPhiOfIndependentRate) {
  oracle::Rng rng(25);
  const auto cfg = NetworkConfig::uniform(2, 1, 2, 1, 1.0, 1.0);
  auto anchor = oracle::random_design(cfg, rng);
  auto cand = oracle::random_design(cfg, rng);
  for (Design* d : {&anchor, &cand}) {
    d->omega.block(0, 2, 2, 2).setZero();
    d->omega.block(2, 0, 2, 2).setZero();
  }
  const CMatrix x = cand.total_signal().topLeftCorner(2, 2) + cand.omega.topLeftCorner(2, 2);
  const CMatrix y = anchor.total_signal().topLeftCorner(2, 2) + anchor.omega.topLeftCorner(2, 2);
  EXPECT_NEAR(surrogate_backhaul(cand, anchor, cfg, 0b01),
              phi(x, y) - oracle::log2det(cand.omega.topLeftCorner(2, 2)), 1e-10);
}

TEST(Subproblem, ProgramMatchesSurrogateEvaluators) {
  oracle::Rng rng(26);
  for (int t = 0; t < 20; ++t) {
    auto cfg = NetworkConfig::uniform(3, 3, 2, 1, 5.0, 2.0);
    const auto ch = fading_channels(cfg, 1.0, static_cast<std::uint64_t>(t));
    const auto anchor = oracle::random_design(cfg, rng);
    const auto cand = oracle::random_design(cfg, rng, 0.7);
    const Subproblem sp(cfg, ch, Formulation{}, anchor);
    const RVector z = sp.pack(cand);
    const auto& prog = sp.program();
    EXPECT_NEAR(prog.value(prog.objective(), z),
                surrogate_objective(cand, anchor, cfg, ch), 1e-9);
    // Constraints: 7 backhaul subsets, then 3 power rows.
    ASSERT_EQ(prog.constraints().size(), 10U);
    for (BsSubset s = 1; s <= 7; ++s) {
      double cap = 0.0;
      for (int i : subset_members(s)) cap += cfg.backhaul[static_cast<std::size_t>(i)];
      EXPECT_NEAR(prog.value(prog.constraints()[s - 1], z), surrogate_backhaul(cand, anchor, cfg, s) - cap, 1e-9);
    }
    const auto rep = check_feasible(cfg, cand, 0.0);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(prog.value(prog.constraints()[7 + static_cast<std::size_t>(i)], z),
                  rep.constraints[7 + static_cast<std::size_t>(i)].violation(), 1e-9);
    }
    const Design back = sp.unpack(z);
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(back.r[static_cast<std::size_t>(k)].isApprox(cand.r[static_cast<std::size_t>(k)]));
  }
}

TEST(Subproblem, BlockDiagonalShapeOnlyHasSingletons) {
  const auto cfg = NetworkConfig::uniform(3, 3, 1, 1, 5.0, 2.0);
  const auto ch = fading_channels(cfg, 1.0, 1);
  oracle::Rng rng(27);
  auto anchor = oracle::random_design(cfg, rng);
  anchor.omega = CMatrix::Identity(3, 3);
  Formulation f;
  f.omega = OmegaShape::BlockDiagonal;
  const Subproblem sp(cfg, ch, f, anchor);
  EXPECT_EQ(sp.program().constraints().size(), 6U);
  // Off-diagonal Omega entries are not variables.
  EXPECT_EQ(sp.program().n_vars(), 3 * 9 + 3);
}
