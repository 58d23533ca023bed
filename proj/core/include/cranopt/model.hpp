#pragma once

// Network dimensions and channel generation. Indices for base stations (BS)
// and mobile stations (MS) are zero-based throughout the library.

#include <cstdint>
#include <random>
#include <vector>

#include "cranopt/linalg.hpp"

namespace cranopt {

/// Bit mask over base stations; bit i set means BS i is in the subset.
using BsSubset = std::uint32_t;

struct NetworkConfig {
  std::vector<int> bs_antennas;  ///< n_{B,i}
  std::vector<int> ms_antennas;  ///< n_{M,k}
  std::vector<int> streams;      ///< r_k <= n_{M,k}; empty means r_k = n_{M,k}
  std::vector<double> powers;    ///< P_i, linear scale
  std::vector<double> backhaul;  ///< C_i, bits per channel use
  std::vector<double> weights;   ///< w_k >= 0

  /// Every BS with `bs_ant` antennas, power P and backhaul C; every MS with
  /// `ms_ant` antennas, full-rank streams and unit weight.
  static NetworkConfig uniform(int n_bs, int n_ms, int bs_ant, int ms_ant, double power,
                               double backhaul);

  int n_bs() const { return static_cast<int>(bs_antennas.size()); }
  int n_ms() const { return static_cast<int>(ms_antennas.size()); }
  int total_bs_antennas() const;
  int total_ms_antennas() const;
  int bs_offset(int i) const;
  int ms_streams(int k) const;
  BsSubset all_bs() const { return (BsSubset{1} << n_bs()) - 1U; }

  /// Throws DimensionError / std::invalid_argument on any broken invariant.
  void validate() const;
};

/// Realizes E_S: the stacked transmit-antenna rows of a BS subset, in
/// ascending BS order.
class BlockSelector {
 public:
  BlockSelector(std::vector<int> bs, std::vector<int> rows, int total)
      : bs_(std::move(bs)), rows_(std::move(rows)), total_(total) {}

  const std::vector<int>& bs() const { return bs_; }
  const std::vector<int>& rows() const { return rows_; }
  int size() const { return static_cast<int>(rows_.size()); }

  /// E_S as an n_B x |rows| 0/1 matrix.
  CMatrix matrix() const;
  /// E_S^H M E_S
  CMatrix extract(const CMatrix& m) const;
  /// E_S^H x
  CVector extract(const CVector& x) const;

 private:
  std::vector<int> bs_;
  std::vector<int> rows_;
  int total_;
};

BlockSelector block_select(const NetworkConfig& cfg, const std::vector<int>& subset);
BlockSelector block_select(const NetworkConfig& cfg, BsSubset subset);

std::vector<int> subset_members(BsSubset subset);

/// Channels H_k (n_{M,k} x n_B) for every MS.
class ChannelSet {
 public:
  ChannelSet() = default;
  ChannelSet(const NetworkConfig& cfg, std::vector<CMatrix> h);

  int n_ms() const { return static_cast<int>(h_.size()); }
  const CMatrix& h(int k) const { return h_.at(static_cast<std::size_t>(k)); }
  const std::vector<CMatrix>& all() const { return h_; }
  /// H_{k,i}
  CMatrix block(const NetworkConfig& cfg, int k, int i) const;

  /// Every H_k multiplied by its own factor (robust singular-value model).
  ChannelSet scaled(const std::vector<double>& factor) const;
  /// Keeps only the transmit antennas of the given BSs.
  ChannelSet restrict_bs(const NetworkConfig& cfg, const std::vector<int>& bs) const;

 private:
  std::vector<CMatrix> h_;
};

/// Circulant Wyner model: unit direct gain, `g` to every other cell.
/// Requires single-antenna nodes and n_bs == n_ms.
ChannelSet wyner_channels(const NetworkConfig& cfg, double g);

/// Entries of H_{k,i} drawn i.i.d. CN(0, alpha^{|i-k|}).
///
/// Every block (k, i) has its own stream: a 64-bit key is formed by feeding
/// (seed, k, i) through SplitMix64, the key seeds std::mt19937_64, and entries
/// are drawn in row-major order. Each complex sample uses two 53-bit uniforms
/// u1 in (0,1], u2 in [0,1) and the Box-Muller transform
/// r = sqrt(-ln u1), theta = 2*pi*u2, z = r (cos theta + j sin theta),
/// which has unit variance. The result is a pure function of (cfg, alpha, seed).
ChannelSet fading_channels(const NetworkConfig& cfg, double alpha, std::uint64_t seed);

/// SplitMix64 finalizer, exposed for derived seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// Unit-variance circularly symmetric complex Gaussian source (Box-Muller on
/// mt19937_64), shared by channel generation and the pipeline simulator.
class ComplexGaussianStream {
 public:
  explicit ComplexGaussianStream(std::uint64_t key) : engine_(key) {}
  cplx next();

 private:
  double uniform53();
  std::mt19937_64 engine_;
};

}  // namespace cranopt
