#include "cranopt/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cranopt/errors.hpp"

namespace cranopt {

void SinrSpec::validate(const NetworkConfig& cfg) const {
  cfg.validate();
  const auto nm = static_cast<std::size_t>(cfg.n_ms());
  const int nb = cfg.total_bs_antennas();
  for (int a : cfg.ms_antennas) {
    if (a != 1) throw DimensionError("SINR design needs single-antenna MSs");
  }
  if (h_hat.size() != nm || ellipsoid.size() != nm || targets.size() != nm) {
    throw DimensionError("SinrSpec: one channel, ellipsoid and target per MS");
  }
  if (!cost.empty() && cost.size() != static_cast<std::size_t>(cfg.n_bs())) {
    throw DimensionError("SinrSpec: one cost weight per BS");
  }
  for (std::size_t k = 0; k < nm; ++k) {
    if (h_hat[k].size() != nb) throw DimensionError("SinrSpec: channel length must be n_B");
    if (ellipsoid[k].rows() != nb || ellipsoid[k].cols() != nb) {
      throw DimensionError("SinrSpec: ellipsoid must be n_B x n_B");
    }
    if (!is_hermitian(ellipsoid[k], 1e-9 * std::max(1.0, ellipsoid[k].norm())) ||
        !(min_eigenvalue(hermitize(ellipsoid[k])) > 0.0)) {
      throw std::invalid_argument("SinrSpec: ellipsoid matrices must be positive definite");
    }
    if (!(targets[k] > 0.0)) throw std::invalid_argument("SinrSpec: SINR targets must be positive");
  }
  for (double m : cost) {
    if (!(m >= 0.0)) throw std::invalid_argument("SinrSpec: cost weights must be >= 0");
  }
}

double SinrSpec::cost_of(int i) const {
  return cost.empty() ? 1.0 : cost[static_cast<std::size_t>(i)];
}

CMatrix build_sinr_lmi(int k, const std::vector<CMatrix>& r, const CMatrix& omega,
                       const SinrSpec& sinr, double beta) {
  const auto kk = static_cast<std::size_t>(k);
  if (kk >= r.size() || kk >= sinr.h_hat.size()) throw DimensionError("build_sinr_lmi: MS index");
  if (beta < 0.0) throw std::invalid_argument("build_sinr_lmi: beta must be >= 0");
  const Eigen::Index nb = omega.rows();
  const CVector& h = sinr.h_hat[kk];
  if (h.size() != nb || sinr.ellipsoid[kk].rows() != nb) throw DimensionError("build_sinr_lmi: shapes");
  const double gamma = sinr.targets[kk];
  CMatrix xi = r[kk] - gamma * omega;
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (j != kk) xi -= gamma * r[j];
  }
  CMatrix m(nb + 1, nb + 1);
  const CVector xh = xi * h;
  m.topLeftCorner(nb, nb) = xi + beta * sinr.ellipsoid[kk];
  m.topRightCorner(nb, 1) = xh;
  m.bottomLeftCorner(1, nb) = xh.adjoint();
  m(nb, nb) = h.dot(xh) - gamma - beta;
  return hermitize(m);
}

double sinr(const CVector& h, int k, const std::vector<CMatrix>& r, const CMatrix& omega) {
  const auto kk = static_cast<std::size_t>(k);
  double interference = 1.0 + h.dot(omega * h).real();
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (j != kk) interference += h.dot(r[j] * h).real();
  }
  return h.dot(r[kk] * h).real() / interference;
}

namespace {

/// Variables and constraints shared by Phase I and the power-minimization steps.
class SinrProgram {
 public:
  SinrProgram(const SinrSpec& sinr, const NetworkConfig& cfg, const Design& anchor, bool phase1,
              double power_cap)
      : nb_(cfg.total_bs_antennas()), anchor_(anchor) {
    const int nm = cfg.n_ms();
    for (int k = 0; k < nm; ++k) r_.push_back(prog_.add_hermitian(nb_));
    omega_ = prog_.add_hermitian(nb_);
    for (int k = 0; k < nm; ++k) beta_.push_back(prog_.add_scalar());
    if (phase1) slack_ = prog_.add_scalar();

    CMatrix cost = CMatrix::Zero(nb_, nb_);
    for (int i = 0; i < cfg.n_bs(); ++i) {
      const int n = cfg.bs_antennas[static_cast<std::size_t>(i)];
      cost.diagonal().segment(cfg.bs_offset(i), n).setConstant(sinr.cost_of(i));
    }
    const CMatrix eye = CMatrix::Identity(nb_, nb_);

    Function obj;
    if (phase1) {
      obj.add_linear_scalar(slack_, 1.0);
      Function top;  // s <= 1 keeps Phase I bounded
      top.add_linear_scalar(slack_, 1.0);
      top.constant = -1.0;
      prog_.add_constraint(std::move(top));
      Function total;  // total power cap keeps the precoders bounded
      for (int b : r_) total.add_linear(b, eye);
      total.add_linear(omega_, eye);
      total.constant = -power_cap;
      prog_.add_constraint(std::move(total));
    } else {
      for (int b : r_) obj.add_linear(b, -cost);
      obj.add_linear(omega_, -cost);
    }
    prog_.set_objective(std::move(obj));

    for (int k = 0; k < nm; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double gamma = sinr.targets[kk];
      CMatrix t(nb_ + 1, nb_);
      t.topRows(nb_) = eye;
      t.bottomRows(1) = sinr.h_hat[kk].adjoint();
      CMatrix c0 = CMatrix::Zero(nb_ + 1, nb_ + 1);
      c0(nb_, nb_) = -gamma;
      AffineMatrix lmi(c0);
      for (int j = 0; j < nm; ++j) lmi.add(r_[static_cast<std::size_t>(j)], t, j == k ? 1.0 : -gamma);
      lmi.add(omega_, t, -gamma);
      CMatrix g = CMatrix::Zero(nb_ + 1, nb_ + 1);
      g.topLeftCorner(nb_, nb_) = sinr.ellipsoid[kk];
      g(nb_, nb_) = -1.0;
      lmi.add_scalar(beta_[kk], g);
      if (phase1) lmi.add_scalar(slack_, -CMatrix::Identity(nb_ + 1, nb_ + 1));
      prog_.add_lmi(std::move(lmi));
    }

    if (cfg.n_bs() > kMaxEnumeratedBs) throw CapacityExceeded("SINR design: too many BSs");
    const CMatrix zero = CMatrix::Zero(nb_, nb_);
    for (BsSubset s = 1; s <= cfg.all_bs(); ++s) {
      prog_.add_constraint(backhaul_surrogate_constraint(cfg, s, anchor, zero, r_, omega_));
    }
    for (int b : r_) prog_.add_psd(b);
    prog_.add_psd(omega_);
    for (int b : beta_) prog_.add_psd(b);
  }

  const LogdetProgram& program() const { return prog_; }

  RVector pack(const Design& d, const std::vector<double>& beta, double slack) const {
    RVector z = RVector::Zero(prog_.n_vars());
    for (std::size_t k = 0; k < r_.size(); ++k) prog_.set_hermitian(z, r_[k], d.r[k]);
    prog_.set_hermitian(z, omega_, d.omega);
    for (std::size_t k = 0; k < beta_.size(); ++k) prog_.set_scalar(z, beta_[k], beta[k]);
    if (slack_ >= 0) prog_.set_scalar(z, slack_, slack);
    return z;
  }

  Design design(const RVector& z) const {
    Design d = anchor_;
    for (std::size_t k = 0; k < r_.size(); ++k) d.r[k] = prog_.hermitian(z, r_[k]);
    d.omega = prog_.hermitian(z, omega_);
    return d;
  }

  std::vector<double> beta(const RVector& z) const {
    std::vector<double> out;
    for (int b : beta_) out.push_back(prog_.scalar(z, b));
    return out;
  }

  double slack(const RVector& z) const { return prog_.scalar(z, slack_); }

 private:
  LogdetProgram prog_;
  int nb_;
  Design anchor_;
  std::vector<int> r_;
  int omega_ = -1;
  std::vector<int> beta_;
  int slack_ = -1;
};

double weighted_power(const SinrSpec& sinr, const NetworkConfig& cfg, const Design& d) {
  double p = 0.0;
  const CMatrix total = d.total_signal() + d.omega;
  for (int i = 0; i < cfg.n_bs(); ++i) {
    const int n = cfg.bs_antennas[static_cast<std::size_t>(i)];
    const int off = cfg.bs_offset(i);
    p += sinr.cost_of(i) * total.block(off, off, n, n).trace().real();
  }
  return p;
}

double smallest_lmi_eigenvalue(const SinrSpec& sinr, const Design& d, const std::vector<double>& beta) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < d.r.size(); ++k) {
    m = std::min(m, min_eigenvalue(build_sinr_lmi(static_cast<int>(k), d.r, d.omega, sinr, beta[k])));
  }
  return m;
}

}  // namespace

RobustSinrResult solve_robust_sinr(const SinrSpec& sinr, const NetworkConfig& cfg,
                                   const SolverOptions& opt) {
  sinr.validate(cfg);
  const int nb = cfg.total_bs_antennas();
  const int nm = cfg.n_ms();
  for (double c : cfg.backhaul) {
    if (!(c > 0.0)) throw InfeasibleError("SINR design: every BS needs positive backhaul");
  }

  // Phase I start: scaled identities with diagonal quantization noise that
  // keeps each singleton backhaul constraint at 90% of capacity.
  double scale = 0.0;
  for (std::size_t k = 0; k < sinr.h_hat.size(); ++k) {
    scale = std::max(scale, sinr.targets[k] / std::max(sinr.h_hat[k].squaredNorm(), 1e-300));
  }
  const double kappa = std::max(scale, 1e-6);
  Design d;
  d.r.assign(static_cast<std::size_t>(nm), kappa * CMatrix::Identity(nb, nb));
  d.omega = CMatrix::Zero(nb, nb);
  for (int i = 0; i < cfg.n_bs(); ++i) {
    const int n = cfg.bs_antennas[static_cast<std::size_t>(i)];
    const double s = nm * kappa;
    const double w = std::max(s / std::expm1(0.9 * cfg.backhaul[static_cast<std::size_t>(i)] / n * kLn2), 1e-6 * s);
    d.omega.diagonal().segment(cfg.bs_offset(i), n).setConstant(w);
  }
  std::vector<double> beta(static_cast<std::size_t>(nm), 1.0);
  const double power_cap = 1e6 * std::max(1.0, (d.total_signal() + d.omega).trace().real());

  RobustSinrResult res;
  double slack = smallest_lmi_eigenvalue(sinr, d, beta) - 1.0;
  BarrierOptions bo = opt.barrier;
  for (int it = 0; slack <= 0.0; ++it) {
    if (it >= opt.max_iterations) throw InfeasibleError("SINR design: Phase I hit the iteration cap");
    const SinrProgram prog(sinr, cfg, d, true, power_cap);
    const auto sol = prog.program().solve(prog.pack(d, beta, slack), bo);
    const double next = prog.slack(sol.z);
    ++res.phase1_iterations;
    if (!(next > slack + opt.rel_tol * std::max(1.0, std::abs(slack)))) {
      throw InfeasibleError("SINR design: targets are not reachable under the backhaul constraints");
    }
    d = prog.design(sol.z);
    beta = prog.beta(sol.z);
    slack = next;
  }

  double f = weighted_power(sinr, cfg, d);
  res.trace.push_back(f);
  res.status = SolveStatus::IterationCap;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const SinrProgram prog(sinr, cfg, d, false, power_cap);
    BarrierResult sol;
    try {
      sol = prog.program().solve(prog.pack(d, beta, 0.0), bo);
    } catch (const DomainError&) {
      res.status = SolveStatus::Converged;
      break;
    }
    Design cand = prog.design(sol.z);
    const double f_new = weighted_power(sinr, cfg, cand);
    const bool backhaul_ok = check_feasible(cfg, cand, 0.0).worst_violation < 0.0;
    if (!(f_new <= f) || !backhaul_ok) {
      res.status = SolveStatus::Converged;
      break;
    }
    d = std::move(cand);
    beta = prog.beta(sol.z);
    res.trace.push_back(f_new);
    ++res.iterations;
    const bool small = f - f_new <= opt.rel_tol * std::max(std::abs(f_new), 1e-12);
    f = f_new;
    if (small) {
      res.status = SolveStatus::Converged;
      break;
    }
  }

  res.design = d;
  res.precoder = Precoder::from_covariances(d.r);
  res.beta = beta;
  res.power = f;
  for (int k = 0; k < nm; ++k) {
    res.min_lmi_eigenvalue.push_back(min_eigenvalue(
        build_sinr_lmi(k, d.r, d.omega, sinr, beta[static_cast<std::size_t>(k)])));
  }
  res.feasibility = check_feasible(cfg, d, opt.feasibility_tol);
  return res;
}

}  // namespace cranopt
