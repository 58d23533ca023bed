#include "cranopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cranopt/errors.hpp"

namespace cranopt {

NetworkConfig NetworkConfig::uniform(int n_bs, int n_ms, int bs_ant, int ms_ant, double power,
                                     double backhaul) {
  NetworkConfig cfg;
  cfg.bs_antennas.assign(static_cast<std::size_t>(n_bs), bs_ant);
  cfg.ms_antennas.assign(static_cast<std::size_t>(n_ms), ms_ant);
  cfg.streams.assign(static_cast<std::size_t>(n_ms), ms_ant);
  cfg.powers.assign(static_cast<std::size_t>(n_bs), power);
  cfg.backhaul.assign(static_cast<std::size_t>(n_bs), backhaul);
  cfg.weights.assign(static_cast<std::size_t>(n_ms), 1.0);
  return cfg;
}

int NetworkConfig::total_bs_antennas() const {
  return std::accumulate(bs_antennas.begin(), bs_antennas.end(), 0);
}

int NetworkConfig::total_ms_antennas() const {
  return std::accumulate(ms_antennas.begin(), ms_antennas.end(), 0);
}

int NetworkConfig::bs_offset(int i) const {
  return std::accumulate(bs_antennas.begin(), bs_antennas.begin() + i, 0);
}

int NetworkConfig::ms_streams(int k) const {
  if (streams.empty()) return ms_antennas.at(static_cast<std::size_t>(k));
  return streams.at(static_cast<std::size_t>(k));
}

void NetworkConfig::validate() const {
  if (bs_antennas.empty() || ms_antennas.empty()) {
    throw DimensionError("network needs at least one BS and one MS");
  }
  const auto nb = bs_antennas.size();
  const auto nm = ms_antennas.size();
  if (powers.size() != nb || backhaul.size() != nb) {
    throw DimensionError("powers/backhaul must have one entry per BS");
  }
  if (weights.size() != nm) throw DimensionError("weights must have one entry per MS");
  if (!streams.empty() && streams.size() != nm) {
    throw DimensionError("streams must have one entry per MS");
  }
  for (std::size_t i = 0; i < nb; ++i) {
    if (bs_antennas[i] < 1) throw DimensionError("BS antenna counts must be >= 1");
    if (!(powers[i] > 0.0) || !std::isfinite(powers[i])) {
      throw std::invalid_argument("BS powers must be positive and finite");
    }
    if (!(backhaul[i] >= 0.0)) throw std::invalid_argument("backhaul capacities must be >= 0");
  }
  for (std::size_t k = 0; k < nm; ++k) {
    if (ms_antennas[k] < 1) throw DimensionError("MS antenna counts must be >= 1");
    if (!(weights[k] >= 0.0) || !std::isfinite(weights[k])) {
      throw std::invalid_argument("rate weights must be finite and >= 0");
    }
    const int r = ms_streams(static_cast<int>(k));
    if (r < 1 || r > ms_antennas[k]) {
      throw DimensionError("streams r_k must satisfy 1 <= r_k <= n_{M,k}");
    }
  }
}

CMatrix BlockSelector::matrix() const {
  CMatrix e = CMatrix::Zero(total_, size());
  for (int c = 0; c < size(); ++c) e(rows_[static_cast<std::size_t>(c)], c) = 1.0;
  return e;
}

CMatrix BlockSelector::extract(const CMatrix& m) const { return principal_submatrix(m, rows_); }

CVector BlockSelector::extract(const CVector& x) const {
  CVector out(size());
  for (int c = 0; c < size(); ++c) out(c) = x(rows_[static_cast<std::size_t>(c)]);
  return out;
}

BlockSelector block_select(const NetworkConfig& cfg, const std::vector<int>& subset) {
  if (subset.empty()) throw std::invalid_argument("block_select: empty BS subset");
  std::vector<int> bs = subset;
  std::sort(bs.begin(), bs.end());
  if (std::adjacent_find(bs.begin(), bs.end()) != bs.end()) {
    throw std::invalid_argument("block_select: duplicate BS index");
  }
  std::vector<int> rows;
  for (int i : bs) {
    if (i < 0 || i >= cfg.n_bs()) {
      std::ostringstream os;
      os << "block_select: BS index " << i << " out of range [0, " << cfg.n_bs() << ")";
      throw std::out_of_range(os.str());
    }
    const int off = cfg.bs_offset(i);
    for (int a = 0; a < cfg.bs_antennas[static_cast<std::size_t>(i)]; ++a) rows.push_back(off + a);
  }
  return BlockSelector(std::move(bs), std::move(rows), cfg.total_bs_antennas());
}

BlockSelector block_select(const NetworkConfig& cfg, BsSubset subset) {
  if (subset >> cfg.n_bs()) throw std::out_of_range("block_select: subset mask out of range");
  return block_select(cfg, subset_members(subset));
}

std::vector<int> subset_members(BsSubset subset) {
  std::vector<int> out;
  for (int i = 0; subset; ++i, subset >>= 1U) {
    if (subset & 1U) out.push_back(i);
  }
  return out;
}

ChannelSet::ChannelSet(const NetworkConfig& cfg, std::vector<CMatrix> h) : h_(std::move(h)) {
  if (static_cast<int>(h_.size()) != cfg.n_ms()) {
    throw DimensionError("ChannelSet: one channel matrix per MS required");
  }
  const int nb = cfg.total_bs_antennas();
  for (int k = 0; k < cfg.n_ms(); ++k) {
    const CMatrix& m = h_[static_cast<std::size_t>(k)];
    if (m.rows() != cfg.ms_antennas[static_cast<std::size_t>(k)] || m.cols() != nb) {
      std::ostringstream os;
      os << "ChannelSet: H_" << k << " is " << m.rows() << "x" << m.cols() << ", expected "
         << cfg.ms_antennas[static_cast<std::size_t>(k)] << "x" << nb;
      throw DimensionError(os.str());
    }
    if (!m.allFinite()) throw std::invalid_argument("ChannelSet: non-finite channel entry");
  }
}

CMatrix ChannelSet::block(const NetworkConfig& cfg, int k, int i) const {
  return h(k).middleCols(cfg.bs_offset(i), cfg.bs_antennas.at(static_cast<std::size_t>(i)));
}

ChannelSet ChannelSet::scaled(const std::vector<double>& factor) const {
  if (factor.size() != h_.size()) throw DimensionError("scaled: one factor per MS required");
  ChannelSet out = *this;
  for (std::size_t k = 0; k < h_.size(); ++k) out.h_[k] *= factor[k];
  return out;
}

ChannelSet ChannelSet::restrict_bs(const NetworkConfig& cfg, const std::vector<int>& bs) const {
  const auto sel = block_select(cfg, bs);
  ChannelSet out;
  for (const auto& m : h_) {
    CMatrix r(m.rows(), sel.size());
    for (int c = 0; c < sel.size(); ++c) r.col(c) = m.col(sel.rows()[static_cast<std::size_t>(c)]);
    out.h_.push_back(std::move(r));
  }
  return out;
}

ChannelSet wyner_channels(const NetworkConfig& cfg, double g) {
  cfg.validate();
  if (!(g >= 0.0 && g <= 1.0)) throw std::invalid_argument("wyner_channels: g must lie in [0,1]");
  if (cfg.n_bs() != cfg.n_ms()) throw DimensionError("wyner_channels: requires N_B == N_M");
  for (int a : cfg.bs_antennas) {
    if (a != 1) throw DimensionError("wyner_channels: BS antenna count must be 1");
  }
  for (int a : cfg.ms_antennas) {
    if (a != 1) throw DimensionError("wyner_channels: MS antenna count must be 1");
  }
  const int n = cfg.n_bs();
  std::vector<CMatrix> h;
  for (int k = 0; k < n; ++k) {
    CMatrix row = CMatrix::Constant(1, n, g);
    row(0, k) = 1.0;
    h.push_back(std::move(row));
  }
  return ChannelSet(cfg, std::move(h));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

double ComplexGaussianStream::uniform53() {
  return static_cast<double>(engine_() >> 11U) * 0x1.0p-53;
}

cplx ComplexGaussianStream::next() {
  const double u1 = 1.0 - uniform53();  // (0, 1]
  const double u2 = uniform53();
  const double r = std::sqrt(-std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(th), r * std::sin(th)};
}

ChannelSet fading_channels(const NetworkConfig& cfg, double alpha, std::uint64_t seed) {
  cfg.validate();
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("fading_channels: alpha must lie in (0,1]");
  }
  const int nb = cfg.total_bs_antennas();
  std::vector<CMatrix> h;
  for (int k = 0; k < cfg.n_ms(); ++k) {
    CMatrix m(cfg.ms_antennas[static_cast<std::size_t>(k)], nb);
    for (int i = 0; i < cfg.n_bs(); ++i) {
      ComplexGaussianStream rng(
          derive_seed(seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i)));
      const double sd = std::sqrt(std::pow(alpha, std::abs(i - k)));
      const int off = cfg.bs_offset(i);
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < cfg.bs_antennas[static_cast<std::size_t>(i)]; ++c) {
          m(r, off + c) = sd * rng.next();
        }
      }
    }
    h.push_back(std::move(m));
  }
  return ChannelSet(cfg, std::move(h));
}

}  // namespace cranopt
