#include "cranopt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "cranopt/errors.hpp"

namespace cranopt {

namespace {

constexpr std::size_t kChunk = 16384;
constexpr int kMaxOrderSearchBs = 8;

std::vector<int> rows_of(const NetworkConfig& cfg, const std::vector<int>& bs) {
  std::vector<int> rows;
  for (int b : bs) {
    for (int a = 0; a < cfg.bs_antennas[static_cast<std::size_t>(b)]; ++a) rows.push_back(cfg.bs_offset(b) + a);
  }
  return rows;
}

CMatrix selection_rows(int total, const std::vector<int>& rows) {
  CMatrix e = CMatrix::Zero(static_cast<Eigen::Index>(rows.size()), total);
  for (std::size_t r = 0; r < rows.size(); ++r) e(static_cast<Eigen::Index>(r), rows[r]) = 1.0;
  return e;
}

}  // namespace

std::vector<double> SuccessivePlan::rates() const {
  std::vector<double> out;
  for (const auto& s : steps) out.push_back(s.rate);
  return out;
}

SuccessivePlan plan_successive(const NetworkConfig& cfg, const Design& d,
                               const std::vector<int>& perm) {
  validate_permutation(perm, cfg.n_bs(), "plan_successive");
  d.check_shapes(cfg);
  const int nb = cfg.total_bs_antennas();
  const CMatrix omega = hermitize(d.omega);
  const CMatrix sig = hermitize(d.total_signal());
  SuccessivePlan plan;
  plan.perm = perm;
  std::vector<int> prefix;
  for (int b : perm) {
    PlanStep step;
    step.bs = b;
    step.prefix = prefix;
    const auto self = rows_of(cfg, {b});
    const auto pre = rows_of(cfg, prefix);
    const auto nself = static_cast<Eigen::Index>(self.size());
    const auto npre = static_cast<Eigen::Index>(pre.size());
    const CMatrix e_self = selection_rows(nb, self);

    CMatrix k = CMatrix::Zero(nself, npre);
    step.conditional = principal_submatrix(omega, self);
    if (npre > 0) {
      Eigen::LLT<CMatrix> llt(principal_submatrix(omega, pre));
      if (llt.info() != Eigen::Success) {
        std::ostringstream os;
        os << "plan_successive: quantization covariance of the BSs before BS " << b + 1 << " is singular";
        throw DomainError(os.str());
      }
      const CMatrix cross = submatrix(omega, self, pre);
      k = llt.solve(cross.adjoint()).adjoint();
      step.conditional -= k * cross.adjoint();
    }
    step.conditional = hermitize(step.conditional);
    step.gain.resize(nself, npre + nb);
    step.gain.leftCols(npre) = k;
    step.gain.rightCols(nb) = e_self - k * selection_rows(nb, pre);

    // Estimator from the reduced statistic [x_prefix; x_tilde_b].
    const Eigen::Index nu = npre + nself;
    std::vector<int> u_rows = pre;
    u_rows.insert(u_rows.end(), self.begin(), self.end());
    CMatrix sigma_u = principal_submatrix(sig, u_rows);
    sigma_u.topLeftCorner(npre, npre) += principal_submatrix(omega, pre);
    CMatrix sigma_xu(nself, nu);
    sigma_xu.leftCols(npre) = submatrix(sig, self, pre) + submatrix(omega, self, pre);
    sigma_xu.rightCols(nself) = principal_submatrix(sig, self);
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(hermitize(sigma_u));
    step.reduced_gain = cod.solve(CMatrix(sigma_xu.adjoint())).adjoint();

    const double num =
        guarded_log2det(hermitize(principal_submatrix(sig, self) + principal_submatrix(omega, self))).bits;
    step.rate = num - guarded_log2det(step.conditional).bits;
    plan.steps.push_back(std::move(step));
    prefix.push_back(b);
  }
  return plan;
}

SuccessivePlan plan_successive(const NetworkConfig& cfg, const Precoder& prec, const QuantCov& q,
                               const std::vector<int>& perm) {
  return plan_successive(cfg, make_design(prec, q), perm);
}

namespace {

struct Accumulator {
  std::size_t n = 0;
  CMatrix qq, qs;
  RVector power;
  std::vector<CMatrix> cross;  ///< per step, sum q_hat u^H
  std::vector<RVector> var_qhat, var_u;

  Accumulator(const NetworkConfig& cfg, const SuccessivePlan& plan, Eigen::Index n_streams) {
    const int nb = cfg.total_bs_antennas();
    qq = CMatrix::Zero(nb, nb);
    qs = CMatrix::Zero(nb, n_streams);
    power = RVector::Zero(cfg.n_bs());
    for (const auto& st : plan.steps) {
      cross.push_back(CMatrix::Zero(st.gain.rows(), st.gain.cols()));
      var_qhat.push_back(RVector::Zero(st.gain.rows()));
      var_u.push_back(RVector::Zero(st.gain.cols()));
    }
  }

  void merge(const Accumulator& o) {
    n += o.n;
    qq += o.qq;
    qs += o.qs;
    power += o.power;
    for (std::size_t i = 0; i < cross.size(); ++i) {
      cross[i] += o.cross[i];
      var_qhat[i] += o.var_qhat[i];
      var_u[i] += o.var_u[i];
    }
  }
};

struct StepRows {
  std::vector<int> self, pre;
};

Accumulator run_chunk(const NetworkConfig& cfg, const SuccessivePlan& plan, const CMatrix& a,
                      const std::vector<CMatrix>& roots, const std::vector<StepRows>& rows,
                      std::size_t count, std::uint64_t key) {
  Accumulator acc(cfg, plan, a.cols());
  ComplexGaussianStream rng(key);
  const int nb = cfg.total_bs_antennas();
  CVector s(a.cols()), q(nb), x(nb);
  for (std::size_t t = 0; t < count; ++t) {
    for (Eigen::Index j = 0; j < s.size(); ++j) s[j] = rng.next();
    const CVector xt = a * s;
    q.setZero();
    for (std::size_t st = 0; st < plan.steps.size(); ++st) {
      const PlanStep& step = plan.steps[st];
      const auto& self = rows[st].self;
      const auto& pre = rows[st].pre;
      CVector w(static_cast<Eigen::Index>(self.size()));
      for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = rng.next();
      const CVector qhat = roots[st] * w;
      CVector qpre(static_cast<Eigen::Index>(pre.size()));
      for (std::size_t r = 0; r < pre.size(); ++r) qpre[static_cast<Eigen::Index>(r)] = q[pre[r]];
      const CVector qself = step.gain.leftCols(qpre.size()) * qpre + qhat;
      for (std::size_t r = 0; r < self.size(); ++r) q[self[r]] = qself[static_cast<Eigen::Index>(r)];

      CVector u(step.gain.cols());
      for (std::size_t r = 0; r < pre.size(); ++r) u[static_cast<Eigen::Index>(r)] = xt[pre[r]] + q[pre[r]];
      u.tail(nb) = xt;
      acc.cross[st] += qhat * u.adjoint();
      acc.var_qhat[st] += qhat.cwiseAbs2();
      acc.var_u[st] += u.cwiseAbs2();
    }
    x = xt + q;
    acc.qq += q * q.adjoint();
    acc.qs += q * s.adjoint();
    for (int i = 0; i < cfg.n_bs(); ++i) {
      acc.power[i] += x.segment(cfg.bs_offset(i), cfg.bs_antennas[static_cast<std::size_t>(i)]).squaredNorm();
    }
    ++acc.n;
  }
  return acc;
}

}  // namespace

SimStats simulate(const NetworkConfig& cfg, const SuccessivePlan& plan, const Precoder& prec,
                  std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("simulate: need at least one sample");
  const CMatrix a = prec.stacked();
  if (a.rows() != cfg.total_bs_antennas()) throw DimensionError("simulate: precoder rows must be n_B");
  if (static_cast<int>(plan.steps.size()) != cfg.n_bs()) throw DimensionError("simulate: plan size");
  std::vector<CMatrix> roots;
  std::vector<StepRows> rows;
  for (const auto& st : plan.steps) {
    roots.push_back(psd_sqrt(st.conditional, 1e-10));
    rows.push_back({rows_of(cfg, {st.bs}), rows_of(cfg, st.prefix)});
  }

  // Workers pull chunks; partial sums are merged in chunk order.
  const std::size_t n_chunks = (n_samples + kChunk - 1) / kChunk;
  std::vector<std::optional<Accumulator>> parts(n_chunks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < n_chunks; c = next++) {
      const std::size_t count = std::min(kChunk, n_samples - c * kChunk);
      parts[c].emplace(run_chunk(cfg, plan, a, roots, rows, count, derive_seed(seed, c)));
    }
  };
  const std::size_t n_workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, n_chunks);
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  Accumulator total(cfg, plan, a.cols());
  for (const auto& p : parts) total.merge(*p);

  const double n = static_cast<double>(total.n);
  SimStats out;
  out.samples = total.n;
  out.q_cov = hermitize(total.qq / n);
  out.q_s_cross = total.qs / n;
  for (int i = 0; i < cfg.n_bs(); ++i) out.bs_power.push_back(total.power[i] / n);
  for (std::size_t st = 0; st < total.cross.size(); ++st) {
    double worst = 0.0;
    const CMatrix& c = total.cross[st];
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      for (Eigen::Index m = 0; m < c.cols(); ++m) {
        const double se = std::sqrt(total.var_qhat[st][r] / n * total.var_u[st][m] / n / n);
        if (se > 0.0) worst = std::max(worst, std::abs(c(r, m) / n) / se);
      }
    }
    out.orthogonality_z.push_back(worst);
  }
  const RVector var = out.q_cov.diagonal().real();
  for (int i = 0; i < cfg.n_bs(); ++i) {
    for (int j = 0; j < cfg.n_bs(); ++j) {
      if (i == j) continue;
      for (int p = 0; p < cfg.bs_antennas[static_cast<std::size_t>(i)]; ++p) {
        for (int r = 0; r < cfg.bs_antennas[static_cast<std::size_t>(j)]; ++r) {
          const int a_row = cfg.bs_offset(i) + p;
          const int b_row = cfg.bs_offset(j) + r;
          const double se = std::sqrt(var[a_row] * var[b_row] / n);
          if (se > 0.0) out.cross_block_z = std::max(out.cross_block_z, std::abs(out.q_cov(a_row, b_row)) / se);
        }
      }
    }
  }
  return out;
}

RegionReport verify_plan_against_region(const SuccessivePlan& plan, const NetworkConfig& cfg,
                                        const Design& d, double tol) {
  RegionReport rep;
  rep.perm = plan.perm;
  rep.step_rates = plan.rates();
  rep.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < plan.perm.size(); ++i) {
    rep.capacities.push_back(cfg.backhaul[static_cast<std::size_t>(plan.perm[i])]);
    rep.max_excess = std::max(rep.max_excess, rep.step_rates[i] - rep.capacities[i]);
  }
  rep.fits = rep.max_excess <= tol;
  rep.corner_ordering = is_corner_ordering(cfg, d, plan.perm, tol);
  if (rep.corner_ordering) {
    rep.note = rep.fits ? "corner ordering; every step fits its backhaul link"
                        : "corner ordering, but a step exceeds its backhaul link";
  } else {
    rep.note = rep.fits ? "no corner ordering; this order still fits every backhaul link"
                        : "no corner ordering; the corner-point conditions are stricter than the "
                          "subset constraints and this order exceeds a backhaul link";
  }
  return rep;
}

std::vector<int> best_fit_ordering(const NetworkConfig& cfg, const Design& d) {
  if (cfg.n_bs() > kMaxOrderSearchBs) throw CapacityExceeded("best_fit_ordering: at most 8 BSs");
  std::vector<int> perm(static_cast<std::size_t>(cfg.n_bs()));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best;
  double best_excess = std::numeric_limits<double>::infinity();
  do {
    const auto rates = corner_point(cfg, perm, d);
    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < perm.size(); ++i) {
      excess = std::max(excess, rates[i] - cfg.backhaul[static_cast<std::size_t>(perm[i])]);
    }
    if (excess < best_excess) {
      best_excess = excess;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

PipelinePlan plan_for_design(const NetworkConfig& cfg, const Design& d, double tol) {
  const auto detected = detect_corner_ordering(cfg, d, tol);
  const auto perm = detected ? *detected : best_fit_ordering(cfg, d);
  PipelinePlan out;
  out.plan = plan_successive(cfg, d, perm);
  out.report = verify_plan_against_region(out.plan, cfg, d, tol);
  return out;
}

}  // namespace cranopt
