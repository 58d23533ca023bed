#pragma once

// Weighted sum-rate maximization by majorization-minimization: the joint
// precoding/compression design and its baselines.

#include <optional>
#include <string>
#include <vector>

#include "cranopt/rates.hpp"
#include "cranopt/surrogate.hpp"

namespace cranopt {

enum class Scheme {
  JointMultivariate,
  JointIndependent,
  SeparateMultivariate,
  SeparateIndependent,
  FullCooperation,
  DpcMultivariate,
  DpcIndependent,
  Cutset,
};

std::string to_string(Scheme s);
/// Accepts the canonical names plus linear-multivariate / linear-independent.
std::optional<Scheme> parse_scheme(const std::string& name);

enum class SolveStatus { Converged, IterationCap, Infeasible };
std::string to_string(SolveStatus s);

struct SolverOptions {
  double rel_tol = 1e-5;        ///< stop when |delta f| <= rel_tol * |f|
  int max_iterations = 200;
  double feasibility_tol = 1e-6;
  double corner_tol = 1e-5;     ///< tightness tolerance for corner-ordering detection
  /// Each MM step starts its barrier at t = nu / (barrier_growth * last gain),
  /// so the barrier gap stays below the progress of the previous step.
  double barrier_growth = 1.0;
  BarrierOptions barrier;
};

struct ProblemSpec {
  NetworkConfig cfg;
  ChannelSet chans;
  Scheme scheme = Scheme::JointMultivariate;
  std::optional<std::vector<int>> dpc_order;  ///< fixed DPC order; absent means search all
  std::vector<double> robust_eps;             ///< singular-value bounds epsilon_k, empty = nominal
  std::optional<double> gamma;                ///< separate design power offset; absent = search
  SolverOptions options;
};

struct SolveResult {
  Design design;
  Precoder precoder;
  QuantCov quantcov;
  RateReport rates;
  double sum_rate = 0.0;                ///< weighted sum-rate of the returned point
  std::vector<double> trace;            ///< true objective at every accepted iterate, init first
  std::vector<double> violation_trace;  ///< worst constraint violation at the same iterates
  FeasibilityReport feasibility;
  std::optional<std::vector<int>> ordering;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
  double max_subproblem_gap = 0.0;      ///< largest barrier gap over the MM steps
  bool stalled = false;                 ///< a subproblem ended before reaching its gap target
  int newton_steps = 0;
  std::vector<int> dpc_order;
  double gamma = 1.0;
};

/// Weighted sum-rate of a design (dirty-paper rates when an order is given).
double objective_value(const NetworkConfig& cfg, const ChannelSet& chans, const Design& d,
                       const std::optional<std::vector<int>>& dpc_order = std::nullopt);

/// Deterministic strictly feasible starting point for a formulation that
/// optimizes the precoders. Throws InfeasibleError when none is found.
Design initial_design(const NetworkConfig& cfg, const Formulation& form);

/// Minimal-backhaul quantization noise for fixed precoders: per BS, the
/// reverse water-filling Omega_ii that uses 99.9% of the residual power.
/// Empty when some BS cannot meet its own backhaul constraint strictly.
std::optional<Design> independent_noise_start(const NetworkConfig& cfg,
                                              const std::vector<CMatrix>& r);

/// One convex MM step from `anchor`.
struct SubproblemResult {
  Design design;
  double surrogate = 0.0;
  double gap = 0.0;
  bool converged = false;
};
SubproblemResult solve_subproblem(const Design& anchor, const NetworkConfig& cfg,
                                  const ChannelSet& chans, const Formulation& form,
                                  const BarrierOptions& opt = {});

/// The MM loop from a strictly feasible start.
SolveResult run_mm(const NetworkConfig& cfg, const ChannelSet& chans, const Formulation& form,
                   const Design& init, const SolverOptions& opt);

SolveResult solve_joint(const ProblemSpec& spec, const std::optional<Design>& init = std::nullopt);
SolveResult solve_independent(const ProblemSpec& spec,
                              const std::optional<Design>& init = std::nullopt);
SolveResult solve_full_cooperation(const ProblemSpec& spec);
SolveResult solve_separate(const ProblemSpec& spec);
SolveResult solve_dpc(const ProblemSpec& spec);
SolveResult solve_robust_singular(const ProblemSpec& spec);

/// min(R_full, sum_i C_i); R_full is a stationary-point value, so this is a
/// lower estimate of the true bound.
SolveResult cutset_bound(const ProblemSpec& spec);

/// Dispatches on spec.scheme.
SolveResult solve(const ProblemSpec& spec);

}  // namespace cranopt
