#pragma once

// Convex surrogates of the rate objective and backhaul constraints around an
// anchor point, and the log-det program that maximizes them.

#include <optional>
#include <vector>

#include "cranopt/logdet_program.hpp"
#include "cranopt/rates.hpp"

namespace cranopt {

/// log2 det Y + tr(Y^{-1}(X - Y)) / ln 2, the tangent upper bound of
/// log2 det X at Y.
double phi(const CMatrix& x, const CMatrix& y);

/// Interferers of MS k: everyone else for linear precoding, or the MSs
/// encoded after k when a dirty-paper order is given.
std::vector<int> interferers(int k, int n_ms, const std::optional<std::vector<int>>& dpc_order);

/// sum_k w_k f'_k: exact first log-det, second one replaced by phi at the anchor.
double surrogate_objective(const Design& cand, const Design& anchor, const NetworkConfig& cfg,
                           const ChannelSet& chans,
                           const std::optional<std::vector<int>>& dpc_order = std::nullopt);

/// g'_S: per-BS log-dets replaced by phi at the anchor, exact -log2 det Omega_SS.
double surrogate_backhaul(const Design& cand, const Design& anchor, const NetworkConfig& cfg,
                          BsSubset subset);

/// g'_S - sum_{i in S} C_i as a program function. `fixed_signal` is the part
/// of sum_k R_k that is not a variable; every block in `r_blocks` enters as
/// one more transmit covariance.
Function backhaul_surrogate_constraint(const NetworkConfig& cfg, BsSubset subset,
                                       const Design& anchor, const CMatrix& fixed_signal,
                                       const std::vector<int>& r_blocks, int omega_block);

enum class OmegaShape { Full, BlockDiagonal, Zero };

/// Which variables a subproblem optimizes and which constraints it carries.
struct Formulation {
  OmegaShape omega = OmegaShape::Full;
  bool optimize_precoders = true;  ///< false keeps the anchor's R_k fixed
  bool backhaul = true;
  std::optional<std::vector<int>> dpc_order;
};

/// The convex problem of one MM step, built around an anchor.
class Subproblem {
 public:
  Subproblem(const NetworkConfig& cfg, const ChannelSet& chans, const Formulation& form,
             const Design& anchor);

  const LogdetProgram& program() const { return prog_; }
  RVector pack(const Design& d) const;
  Design unpack(const RVector& z) const;

 private:
  LogdetProgram prog_;
  std::vector<int> r_blocks_;
  int omega_block_ = -1;
  Design anchor_;
  int n_b_ = 0;
};

}  // namespace cranopt
