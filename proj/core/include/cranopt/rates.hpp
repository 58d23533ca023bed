#pragma once

// Closed-form rate and backhaul expressions for linearly precoded, compressed
// downlink transmission. All rates are in bits per channel use.

#include <optional>
#include <string>
#include <vector>

#include "cranopt/linalg.hpp"
#include "cranopt/model.hpp"

namespace cranopt {

/// Covariance-domain design point: transmit covariances R_k = A_k A_k^H and
/// the joint quantization-noise covariance Omega (n_B x n_B).
struct Design {
  std::vector<CMatrix> r;
  CMatrix omega;

  static Design zeros(const NetworkConfig& cfg);
  CMatrix total_signal() const;           ///< sum_k R_k
  CMatrix signal_except(int k) const;     ///< sum_{l != k} R_l
  void check_shapes(const NetworkConfig& cfg) const;
};

/// Per-MS precoding matrices A_k (n_B x streams).
class Precoder {
 public:
  Precoder() = default;
  explicit Precoder(std::vector<CMatrix> a) : a_(std::move(a)) {}

  /// A_k = V_k D_k^{1/2} from the nonzero eigenpairs of each R_k.
  static Precoder from_covariances(const std::vector<CMatrix>& r);

  int n_ms() const { return static_cast<int>(a_.size()); }
  const CMatrix& a(int k) const { return a_.at(static_cast<std::size_t>(k)); }
  CMatrix covariance(int k) const { return a(k) * a(k).adjoint(); }
  std::vector<CMatrix> covariances() const;
  /// [A_1 ... A_{N_M}]
  CMatrix stacked() const;

 private:
  std::vector<CMatrix> a_;
};

/// Joint quantization-noise covariance, Hermitian-symmetrized on construction.
class QuantCov {
 public:
  QuantCov() = default;
  explicit QuantCov(const CMatrix& omega);

  const CMatrix& matrix() const { return omega_; }
  CMatrix block(const NetworkConfig& cfg, int i, int j) const;

 private:
  CMatrix omega_;
};

Design make_design(const Precoder& prec, const QuantCov& q);

/// Sum_k E_i^H R_k E_i, the precoded-signal covariance seen by BS i.
CMatrix signal_block(const NetworkConfig& cfg, const Design& d, int i);

// --- user rates -----------------------------------------------------------

double user_rate(int k, const ChannelSet& chans, const Design& d);
double user_rate(int k, const ChannelSet& chans, const Precoder& prec, const QuantCov& q);

/// Rate of the MS at `position` in the dirty-paper encoding order `perm`
/// (perm[position] is the MS index); only MSs encoded later interfere.
double dpc_rate(int position, const std::vector<int>& perm, const ChannelSet& chans,
                const Design& d);
double dpc_rate(int position, const std::vector<int>& perm, const ChannelSet& chans,
                const Precoder& prec, const QuantCov& q);

// --- backhaul --------------------------------------------------------------

struct SubsetRate {
  double bits = 0.0;
  bool regularized = false;
};

/// g_S = sum_{i in S} log det(E_i^H R E_i + Omega_ii) - log det(Omega_SS).
SubsetRate backhaul_subset_rate_ex(const NetworkConfig& cfg, BsSubset subset, const Design& d);
double backhaul_subset_rate(const NetworkConfig& cfg, BsSubset subset, const Design& d);
double backhaul_subset_rate(const NetworkConfig& cfg, BsSubset subset, const Precoder& prec,
                            const QuantCov& q);

/// Rate needed when BS i is compressed on its own.
double independent_backhaul_rate(const NetworkConfig& cfg, int i, const Design& d);
double independent_backhaul_rate(const NetworkConfig& cfg, int i, const Precoder& prec,
                                 const QuantCov& q);

/// Largest BS count for which every subset constraint is enumerated.
inline constexpr int kMaxEnumeratedBs = 12;

struct ConstraintStatus {
  enum class Kind { Backhaul, Power };
  Kind kind = Kind::Backhaul;
  BsSubset subset = 0;  ///< for Power, the single-BS mask
  double value = 0.0;   ///< g_S or tr(E_i^H(R+Omega)E_i)
  double bound = 0.0;   ///< sum_{i in S} C_i or P_i
  double violation() const { return value - bound; }
};

struct FeasibilityReport {
  std::vector<ConstraintStatus> constraints;
  std::vector<std::size_t> active;  ///< indices into `constraints` with |violation| <= tol
  double worst_violation = 0.0;     ///< max over constraints of value - bound
  std::size_t worst_index = 0;
  bool feasible = true;             ///< worst_violation <= tol
  bool regularized = false;
  /// "backhaul{1,3}" or "power[BS 2]", with one-based BS labels.
  std::string describe(std::size_t index) const;
};

FeasibilityReport check_feasible(const NetworkConfig& cfg, const Design& d, double tol);
FeasibilityReport check_feasible(const NetworkConfig& cfg, const Precoder& prec,
                                 const QuantCov& q, double tol);

/// Corner point of the backhaul region for BS order `perm`: entry i is the
/// rate C_{perm[i]} of the i-th compression step.
std::vector<double> corner_point(const NetworkConfig& cfg, const std::vector<int>& perm,
                                 const Design& d);
std::vector<double> corner_point(const NetworkConfig& cfg, const std::vector<int>& perm,
                                 const Precoder& prec, const QuantCov& q);

/// True when the nested subsets {perm[0]}, {perm[0], perm[1]}, ... all meet
/// their backhaul constraints with equality within tol.
bool is_corner_ordering(const NetworkConfig& cfg, const Design& d, const std::vector<int>& perm,
                        double tol);

/// Lexicographically smallest BS permutation whose nested subset constraints
/// are tight within tol, if one exists.
std::optional<std::vector<int>> detect_corner_ordering(const NetworkConfig& cfg, const Design& d,
                                                       double tol);
std::optional<std::vector<int>> detect_corner_ordering(const NetworkConfig& cfg,
                                                       const Precoder& prec, const QuantCov& q,
                                                       double tol);

// --- aggregate -------------------------------------------------------------

struct SubsetUsage {
  BsSubset subset = 0;
  double bits = 0.0;
  double capacity = 0.0;
};

struct RateReport {
  std::vector<double> user_rates;
  double weighted_sum = 0.0;
  std::vector<SubsetUsage> backhaul;  ///< every nonempty subset, by mask
  std::vector<double> bs_power;
  bool regularized = false;
};

RateReport weighted_sum_rate(const NetworkConfig& cfg, const ChannelSet& chans, const Design& d);
RateReport weighted_sum_rate(const NetworkConfig& cfg, const ChannelSet& chans,
                             const Precoder& prec, const QuantCov& q);
/// Same report with dirty-paper rates for encoding order `perm`.
RateReport weighted_sum_rate_dpc(const NetworkConfig& cfg, const ChannelSet& chans,
                                 const Design& d, const std::vector<int>& perm);

void validate_permutation(const std::vector<int>& perm, int n, const char* what);

}  // namespace cranopt
