#pragma once

// Power minimization under worst-case SINR constraints with ellipsoidal
// channel errors (single-antenna MSs), solved by the same MM scheme.

#include <vector>

#include "cranopt/optimizer.hpp"

namespace cranopt {

/// True channel of MS k is h_k = h_hat_k + e_k with e_k^H C_k e_k <= 1, and
/// H_k = h_k^H. Noise at every MS has unit power.
struct SinrSpec {
  std::vector<CVector> h_hat;      ///< n_B entries each
  std::vector<CMatrix> ellipsoid;  ///< C_k, positive definite
  std::vector<double> targets;     ///< Gamma_k > 0
  std::vector<double> cost;        ///< mu_i >= 0 per BS; empty means all ones

  void validate(const NetworkConfig& cfg) const;
  double cost_of(int i) const;
};

/// The (n_B + 1)-square matrix
///   [Xi, Xi h; h^H Xi, h^H Xi h - Gamma] + beta diag(C_k, -1),
/// Xi = R_k - Gamma sum_{j != k} R_j - Gamma Omega. It is PSD exactly when the
/// SINR target of MS k holds for every error in the ellipsoid (for some beta).
CMatrix build_sinr_lmi(int k, const std::vector<CMatrix>& r, const CMatrix& omega,
                       const SinrSpec& sinr, double beta);

/// SINR of MS k when its actual channel vector is h.
double sinr(const CVector& h, int k, const std::vector<CMatrix>& r, const CMatrix& omega);

struct RobustSinrResult {
  Design design;
  Precoder precoder;
  std::vector<double> beta;
  double power = 0.0;          ///< sum_i mu_i tr(E_i^H (sum_k R_k + Omega) E_i)
  std::vector<double> trace;   ///< weighted power at every accepted iterate
  std::vector<double> min_lmi_eigenvalue;  ///< per MS at the returned point
  FeasibilityReport feasibility;           ///< backhaul constraints only
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  int phase1_iterations = 0;
};

/// Phase I finds a point meeting every LMI strictly; then MM steps minimize the
/// weighted power. Throws InfeasibleError when Phase I cannot reach the
/// SINR targets under the backhaul constraints.
RobustSinrResult solve_robust_sinr(const SinrSpec& sinr, const NetworkConfig& cfg,
                                   const SolverOptions& opt = {});

}  // namespace cranopt
