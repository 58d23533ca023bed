#pragma once

// Reference implementations for tests. They share no code with the library:
// log-dets come from eigenvalues, blocks from explicit index lists.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cranopt/rates.hpp"

namespace oracle {

using cranopt::CMatrix;
using cranopt::CVector;
using cranopt::cplx;

inline double log2det(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += std::log2(es.eigenvalues()(i));
  return s;
}

inline std::vector<int> rows_of(const std::vector<int>& bs_antennas, const std::vector<int>& subset) {
  std::vector<int> rows;
  for (int i : subset) {
    int off = 0;
    for (int j = 0; j < i; ++j) off += bs_antennas[static_cast<std::size_t>(j)];
    for (int a = 0; a < bs_antennas[static_cast<std::size_t>(i)]; ++a) rows.push_back(off + a);
  }
  return rows;
}

inline CMatrix pick(const CMatrix& m, const std::vector<int>& r, const std::vector<int>& c) {
  CMatrix out(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(r[i], c[j]);
  }
  return out;
}

/// sum_{i in S} log det(E_i^H sig E_i + Omega_ii) - log det Omega_SS
inline double g(const std::vector<int>& ant, const std::vector<int>& subset, const CMatrix& sig,
                const CMatrix& omega) {
  if (subset.empty()) return 0.0;
  double v = 0.0;
  for (int i : subset) {
    const auto r = rows_of(ant, {i});
    v += log2det(pick(sig, r, r) + pick(omega, r, r));
  }
  const auto rs = rows_of(ant, subset);
  return v - log2det(pick(omega, rs, rs));
}

/// log det(I + H (sum_l R_l + Omega) H^H) - log det(I + H (sum_{l in interf} R_l + Omega) H^H)
inline double rate(const CMatrix& h, const std::vector<CMatrix>& r, int k, const std::vector<int>& interf,
                   const CMatrix& omega) {
  CMatrix all = omega, rest = omega;
  all += r[static_cast<std::size_t>(k)];
  for (int l : interf) {
    all += r[static_cast<std::size_t>(l)];
    rest += r[static_cast<std::size_t>(l)];
  }
  const CMatrix id = CMatrix::Identity(h.rows(), h.rows());
  return log2det(id + h * all * h.adjoint()) - log2det(id + h * rest * h.adjoint());
}

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng); }
  CMatrix gaussian(int rows, int cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = cplx(normal(), normal()) / std::sqrt(2.0);
    return m;
  }
  /// Wishart-like PD matrix with eigenvalues bounded away from zero.
  CMatrix pd(int n, double floor = 0.05) {
    const CMatrix a = gaussian(n, n);
    return a * a.adjoint() / static_cast<double>(n) + floor * CMatrix::Identity(n, n);
  }
  CMatrix psd(int n, int rank) {
    const CMatrix a = gaussian(n, rank);
    return a * a.adjoint() / static_cast<double>(std::max(rank, 1));
  }
};

/// A random design on `cfg`: PSD transmit covariances and a PD Omega.
inline cranopt::Design random_design(const cranopt::NetworkConfig& cfg, Rng& rng, double scale = 1.0) {
  cranopt::Design d;
  const int n = cfg.total_bs_antennas();
  for (int k = 0; k < cfg.n_ms(); ++k) d.r.push_back(scale * rng.psd(n, cfg.ms_streams(k)));
  d.omega = rng.pd(n);
  return d;
}

inline std::vector<std::vector<int>> permutations(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline std::vector<int> members(unsigned mask) {
  std::vector<int> out;
  for (int i = 0; mask >> i; ++i) {
    if ((mask >> i) & 1U) out.push_back(i);
  }
  return out;
}

/// Best rate of the scalar link with power P and backhaul C by dense search
/// over the quantization noise omega; the signal power is p = min(P - omega,
/// omega (2^C - 1)).
inline double scalar_link_optimum(double power, double backhaul) {
  double best = 0.0;
  auto value = [&](double w) {
    const double p = std::min(power - w, w * (std::exp2(backhaul) - 1.0));
    return p <= 0.0 ? 0.0 : std::log2(1.0 + p + w) - std::log2(1.0 + w);
  };
  double lo = 0.0, hi = power;
  for (int pass = 0; pass < 6; ++pass) {
    double arg = lo;
    const int n = 2000;
    for (int i = 0; i <= n; ++i) {
      const double w = lo + (hi - lo) * i / n;
      if (const double v = value(w); v > best) {
        best = v;
        arg = w;
      }
    }
    const double span = (hi - lo) / n * 2;
    lo = std::max(0.0, arg - span);
    hi = std::min(power, arg + span);
  }
  return best;
}

}  // namespace oracle

namespace oracle {

/// Uniform point of the ellipsoid {e : e^H C e <= 1}.
inline CVector ellipsoid_point(const CMatrix& c, Rng& rng) {
  const auto n = c.rows();
  CVector u = rng.gaussian(static_cast<int>(n), 1).col(0);
  u /= u.norm();
  u *= std::pow(rng.uniform(0.0, 1.0), 1.0 / (2.0 * static_cast<double>(n)));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(c);
  const CMatrix inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                           es.eigenvectors().adjoint();
  return inv_sqrt * u;
}

/// Same, but on the boundary e^H C e = 1, where violations would show first.
inline CVector ellipsoid_boundary(const CMatrix& c, Rng& rng) {
  CVector e = ellipsoid_point(c, rng);
  return e / std::sqrt(e.dot(c * e).real());
}

inline double sinr(const CVector& h, int k, const std::vector<CMatrix>& r, const CMatrix& omega) {
  double den = 1.0 + h.dot(omega * h).real();
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (static_cast<int>(j) != k) den += h.dot(r[j] * h).real();
  }
  return h.dot(r[static_cast<std::size_t>(k)] * h).real() / den;
}

}  // namespace oracle
