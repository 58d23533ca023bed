#include "cranopt/surrogate.hpp"

#include <cmath>

#include "cranopt/errors.hpp"

namespace cranopt {

namespace {

CMatrix pd_inverse_or_throw(const CMatrix& y, const char* what) {
  Eigen::LLT<CMatrix> llt(hermitize(y));
  if (llt.info() != Eigen::Success) throw DomainError(what);
  return llt.solve(CMatrix::Identity(y.rows(), y.cols()));
}

CMatrix sum_of(const std::vector<CMatrix>& r, const std::vector<int>& idx, const CMatrix& base) {
  CMatrix s = base;
  for (int l : idx) s += r[static_cast<std::size_t>(l)];
  return s;
}

CMatrix noise_plus(const CMatrix& h, const CMatrix& cov) {
  CMatrix m = h * cov * h.adjoint();
  m.diagonal().array() += 1.0;
  return hermitize(m);
}

// Rows of BS i embedded as an n_B x n_i selection.
CMatrix selection(const NetworkConfig& cfg, int i) {
  return block_select(cfg, std::vector<int>{i}).matrix();
}

}  // namespace

double phi(const CMatrix& x, const CMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw DimensionError("phi: shape mismatch");
  const CMatrix yinv = pd_inverse_or_throw(y, "phi: linearization point is singular");
  return log2det(hermitize(y)) + (yinv * (x - y)).trace().real() / kLn2;
}

std::vector<int> interferers(int k, int n_ms, const std::optional<std::vector<int>>& dpc_order) {
  std::vector<int> out;
  if (!dpc_order) {
    for (int l = 0; l < n_ms; ++l) {
      if (l != k) out.push_back(l);
    }
    return out;
  }
  const auto& order = *dpc_order;
  bool after = false;
  for (int l : order) {
    if (after) out.push_back(l);
    if (l == k) after = true;
  }
  return out;
}

double surrogate_objective(const Design& cand, const Design& anchor, const NetworkConfig& cfg,
                           const ChannelSet& chans,
                           const std::optional<std::vector<int>>& dpc_order) {
  double total = 0.0;
  for (int k = 0; k < cfg.n_ms(); ++k) {
    const double w = cfg.weights[static_cast<std::size_t>(k)];
    if (w == 0.0) continue;
    const auto idx = interferers(k, cfg.n_ms(), dpc_order);
    const CMatrix& h = chans.h(k);
    const CMatrix interf = sum_of(cand.r, idx, cand.omega);
    const double first = log2det(noise_plus(h, interf + cand.r[static_cast<std::size_t>(k)]));
    const double second = phi(noise_plus(h, interf), noise_plus(h, sum_of(anchor.r, idx, anchor.omega)));
    total += w * (first - second);
  }
  return total;
}

double surrogate_backhaul(const Design& cand, const Design& anchor, const NetworkConfig& cfg,
                          BsSubset subset) {
  const auto sel = block_select(cfg, subset);
  double g = 0.0;
  for (int i : sel.bs()) {
    const auto single = block_select(cfg, std::vector<int>{i});
    g += phi(signal_block(cfg, cand, i) + single.extract(cand.omega),
             signal_block(cfg, anchor, i) + single.extract(anchor.omega));
  }
  return g - log2det(hermitize(sel.extract(cand.omega)));
}

Function backhaul_surrogate_constraint(const NetworkConfig& cfg, BsSubset subset,
                                       const Design& anchor, const CMatrix& fixed_signal,
                                       const std::vector<int>& r_blocks, int omega_block) {
  const auto sel = block_select(cfg, subset);
  Function g;
  double cap = 0.0;
  for (int i : sel.bs()) {
    cap += cfg.backhaul[static_cast<std::size_t>(i)];
    const CMatrix e = selection(cfg, i);
    const CMatrix y = hermitize(e.adjoint() * (anchor.total_signal() + anchor.omega) * e);
    const CMatrix yinv = pd_inverse_or_throw(y, "backhaul surrogate: singular anchor block");
    const CMatrix x0 = e.adjoint() * fixed_signal * e;
    g.constant += log2det(y) + ((yinv * x0).trace().real() - static_cast<double>(y.rows())) / kLn2;
    const CMatrix grad = (e * yinv * e.adjoint()) / kLn2;
    for (int b : r_blocks) g.add_linear(b, grad);
    g.add_linear(omega_block, grad);
  }
  AffineMatrix joint(CMatrix::Zero(sel.size(), sel.size()));
  joint.add(omega_block, sel.matrix().adjoint());
  g.add_logdet(-1.0 / kLn2, std::move(joint));
  g.constant -= cap;
  return g;
}

Subproblem::Subproblem(const NetworkConfig& cfg, const ChannelSet& chans, const Formulation& form,
                       const Design& anchor)
    : anchor_(anchor), n_b_(cfg.total_bs_antennas()) {
  anchor.check_shapes(cfg);
  const int n_ms = cfg.n_ms();
  const bool vary_r = form.optimize_precoders;
  const bool vary_omega = form.omega != OmegaShape::Zero;
  if (!vary_r && !vary_omega) throw std::invalid_argument("Subproblem: nothing to optimize");
  if (form.omega == OmegaShape::Zero && form.backhaul) {
    throw std::invalid_argument("Subproblem: backhaul constraints need a quantization covariance");
  }

  if (vary_r) {
    for (int k = 0; k < n_ms; ++k) r_blocks_.push_back(prog_.add_hermitian(n_b_));
  }
  if (vary_omega) {
    std::vector<int> group(static_cast<std::size_t>(n_b_), 0);
    if (form.omega == OmegaShape::BlockDiagonal) {
      for (int i = 0; i < cfg.n_bs(); ++i) {
        for (int a = 0; a < cfg.bs_antennas[static_cast<std::size_t>(i)]; ++a) {
          group[static_cast<std::size_t>(cfg.bs_offset(i) + a)] = i;
        }
      }
    }
    omega_block_ = prog_.add_hermitian(n_b_, group);
  }
  const CMatrix zero = CMatrix::Zero(n_b_, n_b_);
  // Fixed part of sum_{l in idx} R_l + Omega, and the variable pieces.
  auto fixed_sum = [&](const std::vector<int>& idx) {
    CMatrix s = zero;
    if (!vary_r) s = sum_of(anchor.r, idx, s);
    return s;
  };
  auto add_vars = [&](AffineMatrix& m, const std::vector<int>& idx, const CMatrix& t) {
    if (vary_r) {
      for (int l : idx) m.add(r_blocks_[static_cast<std::size_t>(l)], t);
    }
    if (vary_omega) m.add(omega_block_, t);
  };
  auto add_linear = [&](Function& f, const std::vector<int>& idx, const CMatrix& g) {
    if (vary_r) {
      for (int l : idx) f.add_linear(r_blocks_[static_cast<std::size_t>(l)], g);
    }
    if (vary_omega) f.add_linear(omega_block_, g);
  };
  std::vector<int> all_ms(static_cast<std::size_t>(n_ms));
  for (int k = 0; k < n_ms; ++k) all_ms[static_cast<std::size_t>(k)] = k;

  Function obj;
  for (int k = 0; k < n_ms; ++k) {
    const double w = cfg.weights[static_cast<std::size_t>(k)];
    if (w == 0.0) continue;
    const CMatrix& h = chans.h(k);
    auto idx = interferers(k, n_ms, form.dpc_order);
    auto with_k = idx;
    with_k.push_back(k);

    AffineMatrix num(noise_plus(h, fixed_sum(with_k)));
    add_vars(num, with_k, h);
    obj.add_logdet(w / kLn2, std::move(num));

    const CMatrix y = noise_plus(h, sum_of(anchor.r, idx, anchor.omega));
    const CMatrix yinv = pd_inverse_or_throw(y, "Subproblem: singular anchor interference matrix");
    const CMatrix x0 = noise_plus(h, fixed_sum(idx));
    obj.constant -= w * (log2det(y) + ((yinv * x0).trace().real() - static_cast<double>(y.rows())) / kLn2);
    add_linear(obj, idx, -(w / kLn2) * (h.adjoint() * yinv * h));
  }
  prog_.set_objective(std::move(obj));

  if (form.backhaul) {
    std::vector<BsSubset> subsets;
    if (form.omega == OmegaShape::BlockDiagonal) {
      for (int i = 0; i < cfg.n_bs(); ++i) subsets.push_back(BsSubset{1} << static_cast<unsigned>(i));
    } else {
      if (cfg.n_bs() > kMaxEnumeratedBs) throw CapacityExceeded("Subproblem: too many BSs to enumerate");
      for (BsSubset s = 1; s <= cfg.all_bs(); ++s) subsets.push_back(s);
    }
    for (BsSubset s : subsets) {
      prog_.add_constraint(
          backhaul_surrogate_constraint(cfg, s, anchor, fixed_sum(all_ms), r_blocks_, omega_block_));
    }
  }

  for (int i = 0; i < cfg.n_bs(); ++i) {
    const CMatrix e = selection(cfg, i);
    Function p;
    p.constant = (e.adjoint() * fixed_sum(all_ms) * e).trace().real() - cfg.powers[static_cast<std::size_t>(i)];
    add_linear(p, all_ms, e * e.adjoint());
    prog_.add_constraint(std::move(p));
  }

  for (int b : r_blocks_) prog_.add_psd(b);
  if (vary_omega) prog_.add_psd(omega_block_);
}

RVector Subproblem::pack(const Design& d) const {
  RVector z = RVector::Zero(prog_.n_vars());
  for (std::size_t k = 0; k < r_blocks_.size(); ++k) prog_.set_hermitian(z, r_blocks_[k], d.r[k]);
  if (omega_block_ >= 0) prog_.set_hermitian(z, omega_block_, d.omega);
  return z;
}

Design Subproblem::unpack(const RVector& z) const {
  Design d = anchor_;
  for (std::size_t k = 0; k < r_blocks_.size(); ++k) d.r[k] = prog_.hermitian(z, r_blocks_[k]);
  d.omega = omega_block_ >= 0 ? prog_.hermitian(z, omega_block_) : CMatrix::Zero(n_b_, n_b_);
  return d;
}

}  // namespace cranopt
