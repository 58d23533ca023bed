#include "cranopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "cranopt/errors.hpp"

namespace cranopt {

namespace {

struct SchemeName {
  Scheme scheme;
  const char* name;
};

constexpr SchemeName kSchemeNames[] = {
    {Scheme::JointMultivariate, "joint-multivariate"},
    {Scheme::JointIndependent, "joint-independent"},
    {Scheme::SeparateMultivariate, "separate-multivariate"},
    {Scheme::SeparateIndependent, "separate-independent"},
    {Scheme::FullCooperation, "full-cooperation"},
    {Scheme::DpcMultivariate, "dpc-multivariate"},
    {Scheme::DpcIndependent, "dpc-independent"},
    {Scheme::Cutset, "cutset"},
};

constexpr int kMaxDpcUsers = 6;

Formulation formulation_for(OmegaShape shape) {
  Formulation f;
  f.omega = shape;
  f.backhaul = shape != OmegaShape::Zero;
  return f;
}

FeasibilityReport power_report(const NetworkConfig& cfg, const Design& d, double tol) {
  FeasibilityReport rep;
  rep.worst_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.n_bs(); ++i) {
    const int off = cfg.bs_offset(i);
    const int n = cfg.bs_antennas[static_cast<std::size_t>(i)];
    const double p = signal_block(cfg, d, i).trace().real() + d.omega.block(off, off, n, n).trace().real();
    rep.constraints.push_back({ConstraintStatus::Kind::Power, BsSubset{1} << static_cast<unsigned>(i), p,
                               cfg.powers[static_cast<std::size_t>(i)]});
    const double v = rep.constraints.back().violation();
    if (v > rep.worst_violation) {
      rep.worst_violation = v;
      rep.worst_index = rep.constraints.size() - 1;
    }
    if (std::abs(v) <= tol) rep.active.push_back(rep.constraints.size() - 1);
  }
  rep.feasible = rep.worst_violation <= tol;
  return rep;
}

FeasibilityReport feasibility(const NetworkConfig& cfg, const Formulation& form, const Design& d,
                              double tol) {
  return form.backhaul ? check_feasible(cfg, d, tol) : power_report(cfg, d, tol);
}

void finalize(SolveResult& res, const NetworkConfig& cfg, const ChannelSet& chans,
              const Formulation& form, const SolverOptions& opt) {
  res.precoder = Precoder::from_covariances(res.design.r);
  res.quantcov = QuantCov(res.design.omega);
  res.rates = form.dpc_order ? weighted_sum_rate_dpc(cfg, chans, res.design, *form.dpc_order)
                             : weighted_sum_rate(cfg, chans, res.design);
  res.sum_rate = res.rates.weighted_sum;
  res.feasibility = feasibility(cfg, form, res.design, opt.feasibility_tol);
  if (form.backhaul && cfg.n_bs() <= kMaxEnumeratedBs) {
    res.ordering = detect_corner_ordering(cfg, res.design, opt.corner_tol);
  }
  if (form.dpc_order) res.dpc_order = *form.dpc_order;
}

SolveResult infeasible_result(const NetworkConfig& cfg) {
  SolveResult res;
  res.design = Design::zeros(cfg);
  res.status = SolveStatus::Infeasible;
  return res;
}

/// BSs with zero backhaul can carry no signal; they are removed from the
/// problem and reinserted with zero covariances afterwards.
struct Reduction {
  std::vector<int> kept;
  NetworkConfig cfg;
  ChannelSet chans;
};

std::optional<Reduction> reduce_zero_backhaul(const NetworkConfig& cfg, const ChannelSet& chans) {
  Reduction red;
  for (int i = 0; i < cfg.n_bs(); ++i) {
    if (cfg.backhaul[static_cast<std::size_t>(i)] > 0.0) red.kept.push_back(i);
  }
  if (static_cast<int>(red.kept.size()) == cfg.n_bs()) return std::nullopt;
  red.cfg = cfg;
  red.cfg.bs_antennas.clear();
  red.cfg.powers.clear();
  red.cfg.backhaul.clear();
  for (int i : red.kept) {
    red.cfg.bs_antennas.push_back(cfg.bs_antennas[static_cast<std::size_t>(i)]);
    red.cfg.powers.push_back(cfg.powers[static_cast<std::size_t>(i)]);
    red.cfg.backhaul.push_back(cfg.backhaul[static_cast<std::size_t>(i)]);
  }
  if (!red.kept.empty()) red.chans = chans.restrict_bs(cfg, red.kept);
  return red;
}

Design embed(const NetworkConfig& full, const Reduction& red, const Design& d) {
  std::vector<int> rows;
  for (int i : red.kept) {
    for (int a = 0; a < full.bs_antennas[static_cast<std::size_t>(i)]; ++a) rows.push_back(full.bs_offset(i) + a);
  }
  auto lift = [&](const CMatrix& m) {
    CMatrix out = CMatrix::Zero(full.total_bs_antennas(), full.total_bs_antennas());
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t b = 0; b < rows.size(); ++b) {
        out(rows[a], rows[b]) = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
    }
    return out;
  };
  Design out;
  for (const auto& rk : d.r) out.r.push_back(lift(rk));
  out.omega = lift(d.omega);
  return out;
}

/// Runs `body` on the network without zero-backhaul BSs and maps the result back.
template <typename Body>
SolveResult with_reduction(const NetworkConfig& cfg, const ChannelSet& chans,
                           const Formulation& form, const SolverOptions& opt, Body body) {
  auto red = reduce_zero_backhaul(cfg, chans);
  if (!red) return body(cfg, chans);
  if (red->kept.empty()) {
    SolveResult res;
    res.design = Design::zeros(cfg);
    res.trace = {0.0};
    res.violation_trace = {0.0};
    finalize(res, cfg, chans, form, opt);
    return res;
  }
  SolveResult res = body(red->cfg, red->chans);
  if (res.status == SolveStatus::Infeasible) return infeasible_result(cfg);
  res.design = embed(cfg, *red, res.design);
  finalize(res, cfg, chans, form, opt);
  return res;
}

}  // namespace

std::string to_string(Scheme s) {
  for (const auto& e : kSchemeNames) {
    if (e.scheme == s) return e.name;
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(const std::string& name) {
  for (const auto& e : kSchemeNames) {
    if (name == e.name) return e.scheme;
  }
  if (name == "linear-multivariate") return Scheme::JointMultivariate;
  if (name == "linear-independent") return Scheme::JointIndependent;
  if (name == "dpc-joint") return Scheme::DpcMultivariate;
  return std::nullopt;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::IterationCap: return "iteration-cap";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

double objective_value(const NetworkConfig& cfg, const ChannelSet& chans, const Design& d,
                       const std::optional<std::vector<int>>& dpc_order) {
  double total = 0.0;
  for (int pos = 0; pos < cfg.n_ms(); ++pos) {
    const int k = dpc_order ? (*dpc_order)[static_cast<std::size_t>(pos)] : pos;
    const double w = cfg.weights[static_cast<std::size_t>(k)];
    if (w == 0.0) continue;
    total += w * (dpc_order ? dpc_rate(pos, *dpc_order, chans, d) : user_rate(k, chans, d));
  }
  return total;
}

Design initial_design(const NetworkConfig& cfg, const Formulation& form) {
  cfg.validate();
  const int nb = cfg.total_bs_antennas();
  double kappa = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.n_bs(); ++i) {
    kappa = std::min(kappa, 0.5 * cfg.powers[static_cast<std::size_t>(i)] /
                                (cfg.n_ms() * cfg.bs_antennas[static_cast<std::size_t>(i)]));
  }
  for (int attempt = 0; attempt < 200; ++attempt, kappa *= 0.5) {
    Design d;
    d.r.assign(static_cast<std::size_t>(cfg.n_ms()), kappa * CMatrix::Identity(nb, nb));
    d.omega = CMatrix::Zero(nb, nb);
    const double s = cfg.n_ms() * kappa;
    bool power_ok = true;
    for (int i = 0; i < cfg.n_bs(); ++i) {
      const int n = cfg.bs_antennas[static_cast<std::size_t>(i)];
      double w = 0.0;
      if (form.omega != OmegaShape::Zero) {
        // Each singleton constraint at 90% of its capacity.
        const double c = cfg.backhaul[static_cast<std::size_t>(i)];
        if (!(c > 0.0)) throw InfeasibleError("initial_design: a BS has zero backhaul capacity");
        w = std::max(s / std::expm1(0.9 * c / n * kLn2), 1e-6 * s);
        d.omega.diagonal().segment(cfg.bs_offset(i), n).setConstant(w);
      }
      power_ok &= n * (s + w) < cfg.powers[static_cast<std::size_t>(i)];
    }
    if (!power_ok) continue;
    const auto rep = feasibility(cfg, form, d, 0.0);
    if (rep.worst_violation < 0.0) return d;
  }
  throw InfeasibleError("initial_design: no strictly feasible starting point found");
}

std::optional<Design> independent_noise_start(const NetworkConfig& cfg,
                                              const std::vector<CMatrix>& r) {
  const int nb = cfg.total_bs_antennas();
  Design d;
  d.r = r;
  d.omega = CMatrix::Zero(nb, nb);
  for (int i = 0; i < cfg.n_bs(); ++i) {
    const int off = cfg.bs_offset(i);
    const int n = cfg.bs_antennas[static_cast<std::size_t>(i)];
    const CMatrix s = hermitize(signal_block(cfg, d, i));
    const double budget = cfg.powers[static_cast<std::size_t>(i)] - s.trace().real();
    if (!(budget > 0.0)) return std::nullopt;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(s);
    const RVector lam = eig.eigenvalues().cwiseMax(0.0);
    const double scale = std::max(lam.maxCoeff(), 1e-300);
    int n_null = 0;
    for (Eigen::Index j = 0; j < n; ++j) n_null += lam[j] <= 1e-12 * scale ? 1 : 0;
    const double reserve = n_null > 0 ? 0.01 * budget : 0.0;
    const double target = 0.999 * budget - reserve;
    RVector w = RVector::Zero(n);
    auto fill = [&](double nu) {
      double total = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (lam[j] <= 1e-12 * scale) continue;
        w[j] = 0.5 * (-lam[j] + std::sqrt(lam[j] * lam[j] + 4.0 * lam[j] / nu));
        total += w[j];
      }
      return total;
    };
    if (n_null < n) {
      // Total noise power is decreasing in nu; bracket then bisect in log scale.
      double lo = 1e-300, hi = 1.0;
      while (fill(hi) > target) hi *= 2.0;
      lo = hi;
      while (fill(lo) < target && lo > 1e-300) lo *= 0.5;
      for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (fill(mid) > target ? lo : hi) = mid;
      }
      fill(hi);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (lam[j] <= 1e-12 * scale) w[j] = reserve / n_null;
    }
    const CMatrix& v = eig.eigenvectors();
    d.omega.block(off, off, n, n) = hermitize(v * w.cast<cplx>().asDiagonal() * v.adjoint());
    const double g = log2det(hermitize(s + d.omega.block(off, off, n, n))) -
                     log2det(hermitize(d.omega.block(off, off, n, n)));
    if (!(g < cfg.backhaul[static_cast<std::size_t>(i)])) return std::nullopt;
  }
  return d;
}

SubproblemResult solve_subproblem(const Design& anchor, const NetworkConfig& cfg,
                                  const ChannelSet& chans, const Formulation& form,
                                  const BarrierOptions& opt) {
  const Subproblem sub(cfg, chans, form, anchor);
  const auto res = sub.program().solve(sub.pack(anchor), opt);
  return {sub.unpack(res.z), res.objective, res.gap, res.converged};
}

SolveResult run_mm(const NetworkConfig& cfg, const ChannelSet& chans, const Formulation& form,
                   const Design& init, const SolverOptions& opt) {
  SolveResult res;
  res.design = init;
  double f = objective_value(cfg, chans, init, form.dpc_order);
  res.trace.push_back(f);
  res.violation_trace.push_back(feasibility(cfg, form, init, opt.feasibility_tol).worst_violation);
  res.status = SolveStatus::IterationCap;
  const BarrierOptions& bo = opt.barrier;
  double t = bo.t0;
  double last_gain = 0.0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    // Each step recenters the surrogate's barrier problem from the anchor;
    // t grows until the step is an ascent step that keeps every true
    // constraint, and never beyond the gap target.
    const Subproblem sub(cfg, chans, form, res.design);
    const LogdetProgram& prog = sub.program();
    const double t_max = prog.nu() / bo.gap_tol;
    t = it == 0 ? bo.t0 : std::clamp(prog.nu() / (opt.barrier_growth * last_gain), bo.t0, t_max);
    RVector z = sub.pack(res.design);
    std::optional<Design> accepted;
    double f_new = f;
    double viol = 0.0;
    try {
      while (true) {
        const auto c = prog.center(z, t, bo);
        res.stalled |= !c.converged;
        res.newton_steps += c.newton_steps;
        z = c.z;
        Design cand = sub.unpack(z);
        f_new = objective_value(cfg, chans, cand, form.dpc_order);
        viol = feasibility(cfg, form, cand, 0.0).worst_violation;
        if (f_new >= f && viol < 0.0) {
          accepted = std::move(cand);
          break;
        }
        if (t >= t_max) break;
        t = std::min(t * bo.mu, t_max);
      }
    } catch (const DomainError&) {
      res.stalled = true;
    }
    if (!accepted) {
      res.status = SolveStatus::Converged;
      break;
    }
    res.max_subproblem_gap = std::max(res.max_subproblem_gap, prog.nu() / t);
    res.design = std::move(*accepted);
    res.trace.push_back(f_new);
    res.violation_trace.push_back(viol);
    ++res.iterations;
    const bool small = f_new - f <= opt.rel_tol * std::max(std::abs(f_new), 1e-12);
    last_gain = std::max(f_new - f, 1e-300);
    f = f_new;
    if (small) {
      res.status = SolveStatus::Converged;
      break;
    }
  }
  finalize(res, cfg, chans, form, opt);
  return res;
}

namespace {

SolveResult solve_with_shape(const ProblemSpec& spec, OmegaShape shape,
                             const std::optional<Design>& init,
                             const std::optional<std::vector<int>>& dpc_order) {
  Formulation form = formulation_for(shape);
  form.dpc_order = dpc_order;
  if (dpc_order) validate_permutation(*dpc_order, spec.cfg.n_ms(), "dpc order");
  if (init) return run_mm(spec.cfg, spec.chans, form, *init, spec.options);
  return with_reduction(spec.cfg, spec.chans, form, spec.options,
                        [&](const NetworkConfig& cfg, const ChannelSet& chans) {
                          return run_mm(cfg, chans, form, initial_design(cfg, form), spec.options);
                        });
}

SolveResult dpc_search(const ProblemSpec& spec, OmegaShape shape) {
  const int n = spec.cfg.n_ms();
  if (spec.dpc_order) return solve_with_shape(spec, shape, std::nullopt, spec.dpc_order);
  if (n > kMaxDpcUsers) throw CapacityExceeded("DPC order search is limited to 6 MSs");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::optional<SolveResult> best;
  do {
    SolveResult r = solve_with_shape(spec, shape, std::nullopt, perm);
    if (!best || r.sum_rate > best->sum_rate) best = std::move(r);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return *best;
}

}  // namespace

SolveResult solve_joint(const ProblemSpec& spec, const std::optional<Design>& init) {
  return solve_with_shape(spec, OmegaShape::Full, init, std::nullopt);
}

SolveResult solve_independent(const ProblemSpec& spec, const std::optional<Design>& init) {
  return solve_with_shape(spec, OmegaShape::BlockDiagonal, init, std::nullopt);
}

SolveResult solve_full_cooperation(const ProblemSpec& spec) {
  const Formulation form = formulation_for(OmegaShape::Zero);
  return run_mm(spec.cfg, spec.chans, form, initial_design(spec.cfg, form), spec.options);
}

SolveResult solve_dpc(const ProblemSpec& spec) {
  return dpc_search(spec, spec.scheme == Scheme::DpcIndependent ? OmegaShape::BlockDiagonal
                                                                : OmegaShape::Full);
}

SolveResult solve_robust_singular(const ProblemSpec& spec) {
  if (spec.robust_eps.size() != static_cast<std::size_t>(spec.cfg.n_ms())) {
    throw DimensionError("robust design needs one epsilon per MS");
  }
  std::vector<double> factor;
  for (double e : spec.robust_eps) {
    if (!(e >= 0.0 && e < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
    factor.push_back(1.0 - e);
  }
  ProblemSpec scaled = spec;
  scaled.chans = spec.chans.scaled(factor);
  return solve_joint(scaled);
}

namespace {

struct SeparateRun {
  std::optional<SolveResult> result;  ///< empty when stage 2 has no feasible start
};

class SeparateSearch {
 public:
  SeparateSearch(const ProblemSpec& spec, OmegaShape shape) : spec_(spec), shape_(shape) {}

  const std::vector<CMatrix>& stage1(double gamma) {
    auto it = cache_.find(gamma);
    if (it != cache_.end()) return it->second;
    NetworkConfig cfg = spec_.cfg;
    for (auto& p : cfg.powers) p *= gamma;
    const Formulation form = formulation_for(OmegaShape::Zero);
    auto r = run_mm(cfg, spec_.chans, form, initial_design(cfg, form), spec_.options).design.r;
    return cache_.emplace(gamma, std::move(r)).first->second;
  }

  bool feasible(double gamma) { return independent_noise_start(spec_.cfg, stage1(gamma)).has_value(); }

  std::optional<SolveResult> run(double gamma) {
    auto start = independent_noise_start(spec_.cfg, stage1(gamma));
    if (!start) return std::nullopt;
    Formulation form = formulation_for(shape_);
    form.optimize_precoders = false;
    SolveResult r = run_mm(spec_.cfg, spec_.chans, form, *start, spec_.options);
    r.gamma = gamma;
    return r;
  }

 private:
  const ProblemSpec& spec_;
  OmegaShape shape_;
  std::map<double, std::vector<CMatrix>> cache_;
};

}  // namespace

SolveResult solve_separate(const ProblemSpec& spec) {
  const OmegaShape shape =
      spec.scheme == Scheme::SeparateIndependent ? OmegaShape::BlockDiagonal : OmegaShape::Full;
  Formulation form = formulation_for(shape);
  form.optimize_precoders = false;
  return with_reduction(
      spec.cfg, spec.chans, form, spec.options, [&](const NetworkConfig& cfg, const ChannelSet& chans) {
        ProblemSpec local = spec;
        local.cfg = cfg;
        local.chans = chans;
        SeparateSearch search(local, shape);
        if (spec.gamma) {
          if (!(*spec.gamma > 0.0 && *spec.gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
          auto r = search.run(*spec.gamma);
          return r ? *r : infeasible_result(cfg);
        }
        std::optional<SolveResult> best;
        auto consider = [&](std::optional<SolveResult> r) {
          if (r && (!best || r->sum_rate > best->sum_rate)) best = std::move(r);
        };
        double top_feasible = 0.0;
        for (int g = 1; g <= 9; ++g) {
          const double gamma = 0.1 * g;
          auto r = search.run(gamma);
          if (r) top_feasible = gamma;
          consider(std::move(r));
        }
        if (!best) return infeasible_result(cfg);
        // Refine the feasibility edge above the largest feasible grid point.
        double lo = top_feasible;
        double hi = std::min(top_feasible + 0.1, 0.999);
        if (hi > lo && !search.feasible(hi)) {
          while (hi - lo > 1e-3) {
            const double mid = 0.5 * (lo + hi);
            (search.feasible(mid) ? lo : hi) = mid;
          }
          if (lo > top_feasible) consider(search.run(lo));
        } else if (hi > lo) {
          consider(search.run(hi));
        }
        return *best;
      });
}

SolveResult cutset_bound(const ProblemSpec& spec) {
  SolveResult res = solve_full_cooperation(spec);
  const double total_c = std::accumulate(spec.cfg.backhaul.begin(), spec.cfg.backhaul.end(), 0.0);
  res.sum_rate = std::min(res.sum_rate, total_c);
  return res;
}

SolveResult solve(const ProblemSpec& spec) {
  if (!spec.robust_eps.empty()) {
    if (spec.scheme != Scheme::JointMultivariate) {
      throw std::invalid_argument("robust design is available for joint-multivariate only");
    }
    return solve_robust_singular(spec);
  }
  switch (spec.scheme) {
    case Scheme::JointMultivariate: return solve_joint(spec);
    case Scheme::JointIndependent: return solve_independent(spec);
    case Scheme::SeparateMultivariate:
    case Scheme::SeparateIndependent: return solve_separate(spec);
    case Scheme::FullCooperation: return solve_full_cooperation(spec);
    case Scheme::DpcMultivariate:
    case Scheme::DpcIndependent: return solve_dpc(spec);
    case Scheme::Cutset: return cutset_bound(spec);
  }
  throw std::invalid_argument("unknown scheme");
}

}  // namespace cranopt
