#pragma once

// Successive estimation-compression: per-BS compression steps in a fixed BS
// order that together realize a joint quantization-noise covariance.

#include <cstdint>
#include <string>
#include <vector>

#include "cranopt/rates.hpp"

namespace cranopt {

struct PlanStep {
  int bs = 0;
  std::vector<int> prefix;  ///< BSs compressed before this step
  /// MMSE gain on u = [x_prefix; x_tilde] (all precoded antennas), so that
  /// x_hat = x_tilde_bs + K (x_prefix - x_tilde_prefix).
  CMatrix gain;
  /// Gain of the estimator from the reduced statistic [x_prefix; x_tilde_bs].
  CMatrix reduced_gain;
  /// Omega_bb - Omega_bS Omega_SS^{-1} Omega_Sb, the covariance of q_hat.
  CMatrix conditional;
  double rate = 0.0;  ///< I(x_bs; x_hat_bs), bits
};

struct SuccessivePlan {
  std::vector<int> perm;
  std::vector<PlanStep> steps;
  std::vector<double> rates() const;
};

SuccessivePlan plan_successive(const NetworkConfig& cfg, const Design& d,
                               const std::vector<int>& perm);
SuccessivePlan plan_successive(const NetworkConfig& cfg, const Precoder& prec, const QuantCov& q,
                               const std::vector<int>& perm);

struct SimStats {
  std::size_t samples = 0;
  CMatrix q_cov;       ///< empirical E[q q^H], q = x - x_tilde
  CMatrix q_s_cross;   ///< empirical E[q s^H]
  std::vector<double> bs_power;  ///< empirical E ||x_i||^2
  /// Per step, the largest |empirical E[q_hat u^H]| entry in units of its
  /// standard error, u = [x_prefix; x_tilde].
  std::vector<double> orthogonality_z;
  /// Largest |empirical E[q_i q_j^H]| over off-diagonal BS blocks in units of
  /// its standard error.
  double cross_block_z = 0.0;
};

/// Draws s ~ CN(0, I), x_tilde = A s, and runs the steps of `plan`. Samples are
/// split into fixed chunks with derived seeds, so the result depends only on
/// (plan, prec, n_samples, seed).
SimStats simulate(const NetworkConfig& cfg, const SuccessivePlan& plan, const Precoder& prec,
                  std::size_t n_samples, std::uint64_t seed);

struct RegionReport {
  bool corner_ordering = false;  ///< perm makes every nested constraint tight
  std::vector<int> perm;
  std::vector<double> step_rates;
  std::vector<double> capacities;  ///< C_{perm[i]}
  double max_excess = 0.0;         ///< max_i step_rates[i] - capacities[i]
  bool fits = false;               ///< max_excess <= tol
  std::string note;
};

RegionReport verify_plan_against_region(const SuccessivePlan& plan, const NetworkConfig& cfg,
                                        const Design& d, double tol);

/// Order minimizing the largest per-step excess over capacity; ties keep the
/// lexicographically first order.
std::vector<int> best_fit_ordering(const NetworkConfig& cfg, const Design& d);

struct PipelinePlan {
  SuccessivePlan plan;
  RegionReport report;
};

/// Plan for the detected corner ordering, or for the best-fit order when the
/// design is not at a corner point.
PipelinePlan plan_for_design(const NetworkConfig& cfg, const Design& d, double tol);

}  // namespace cranopt
