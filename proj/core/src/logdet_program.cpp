#include "cranopt/logdet_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cranopt/errors.hpp"

namespace cranopt {

AffineMatrix& AffineMatrix::add(int block, CMatrix t, double coef) {
  if (t.rows() != dim()) throw DimensionError("AffineMatrix::add: factor rows must match dim()");
  pieces_.push_back({block, std::move(t), coef, false});
  return *this;
}

AffineMatrix& AffineMatrix::add_scalar(int block, CMatrix g) {
  if (g.rows() != dim() || g.cols() != dim()) {
    throw DimensionError("AffineMatrix::add_scalar: G must be dim() x dim()");
  }
  pieces_.push_back({block, hermitize(g), 1.0, true});
  return *this;
}

Function& Function::add_linear(int block, CMatrix g) {
  linear.push_back({block, hermitize(g), 0.0});
  return *this;
}

Function& Function::add_linear_scalar(int block, double a) {
  linear.push_back({block, CMatrix(), a});
  return *this;
}

Function& Function::add_logdet(double coef, AffineMatrix m) {
  logdets.push_back({coef, std::move(m)});
  return *this;
}

int LogdetProgram::add_hermitian(int dim) { return add_hermitian(dim, std::vector<int>(static_cast<std::size_t>(dim), 0)); }

int LogdetProgram::add_hermitian(int dim, std::vector<int> group) {
  if (dim < 1 || static_cast<int>(group.size()) != dim) {
    throw DimensionError("add_hermitian: group labels must cover every row");
  }
  Block b;
  b.dim = dim;
  b.offset = n_vars_;
  for (int p = 0; p < dim; ++p) b.coords.push_back({Coord::Diag, p, p});
  for (int p = 0; p < dim; ++p) {
    for (int q = p + 1; q < dim; ++q) {
      if (group[static_cast<std::size_t>(p)] != group[static_cast<std::size_t>(q)]) continue;
      b.coords.push_back({Coord::Re, p, q});
      b.coords.push_back({Coord::Im, p, q});
    }
  }
  n_vars_ += static_cast<int>(b.coords.size());
  blocks_.push_back(std::move(b));
  groups_.push_back(std::move(group));
  return static_cast<int>(blocks_.size()) - 1;
}

int LogdetProgram::add_scalar() {
  Block b;
  b.scalar = true;
  b.offset = n_vars_;
  b.coords.push_back({Coord::Diag, 0, 0});
  n_vars_ += 1;
  blocks_.push_back(std::move(b));
  groups_.emplace_back();
  return static_cast<int>(blocks_.size()) - 1;
}

CMatrix LogdetProgram::hermitian(const RVector& z, int block) const {
  const Block& b = blocks_.at(static_cast<std::size_t>(block));
  CMatrix x = CMatrix::Zero(b.dim, b.dim);
  for (std::size_t c = 0; c < b.coords.size(); ++c) {
    const double v = z[b.offset + static_cast<Eigen::Index>(c)];
    const Coord& k = b.coords[c];
    switch (k.kind) {
      case Coord::Diag: x(k.p, k.p) = v; break;
      case Coord::Re: x(k.p, k.q) += v; x(k.q, k.p) += v; break;
      case Coord::Im: x(k.p, k.q) += cplx(0, v); x(k.q, k.p) -= cplx(0, v); break;
    }
  }
  return x;
}

double LogdetProgram::scalar(const RVector& z, int block) const {
  return z[blocks_.at(static_cast<std::size_t>(block)).offset];
}

void LogdetProgram::set_hermitian(RVector& z, int block, const CMatrix& x) const {
  const Block& b = blocks_.at(static_cast<std::size_t>(block));
  if (x.rows() != b.dim || x.cols() != b.dim) throw DimensionError("set_hermitian: wrong size");
  for (std::size_t c = 0; c < b.coords.size(); ++c) {
    const Coord& k = b.coords[c];
    double v = 0.0;
    switch (k.kind) {
      case Coord::Diag: v = x(k.p, k.p).real(); break;
      case Coord::Re: v = 0.5 * (x(k.p, k.q).real() + x(k.q, k.p).real()); break;
      case Coord::Im: v = 0.5 * (x(k.p, k.q).imag() - x(k.q, k.p).imag()); break;
    }
    z[b.offset + static_cast<Eigen::Index>(c)] = v;
  }
}

void LogdetProgram::set_scalar(RVector& z, int block, double v) const {
  z[blocks_.at(static_cast<std::size_t>(block)).offset] = v;
}

void LogdetProgram::add_psd(int block) {
  const Block& b = blocks_.at(static_cast<std::size_t>(block));
  if (b.scalar) {
    AffineMatrix m(CMatrix::Zero(1, 1));
    m.add_scalar(block, CMatrix::Identity(1, 1));
    add_lmi(std::move(m));
    return;
  }
  const auto& group = groups_[static_cast<std::size_t>(block)];
  std::map<int, std::vector<int>> members;
  for (int p = 0; p < b.dim; ++p) members[group[static_cast<std::size_t>(p)]].push_back(p);
  for (const auto& [label, rows] : members) {
    CMatrix t = CMatrix::Zero(static_cast<Eigen::Index>(rows.size()), b.dim);
    for (std::size_t r = 0; r < rows.size(); ++r) t(static_cast<Eigen::Index>(r), rows[r]) = 1.0;
    AffineMatrix m(CMatrix::Zero(t.rows(), t.rows()));
    m.add(block, std::move(t));
    add_lmi(std::move(m));
  }
}

LogdetProgram::Blocks LogdetProgram::unpack_blocks(const RVector& z) const {
  Blocks xs;
  xs.reserve(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].scalar) {
      xs.push_back(CMatrix::Constant(1, 1, z[blocks_[b].offset]));
    } else {
      xs.push_back(hermitian(z, static_cast<int>(b)));
    }
  }
  return xs;
}

CMatrix LogdetProgram::evaluate(const AffineMatrix& m, const Blocks& xs) const {
  CMatrix out = m.constant();
  for (const auto& piece : m.pieces()) {
    const CMatrix& x = xs[static_cast<std::size_t>(piece.block)];
    if (piece.scalar) {
      out += x(0, 0).real() * piece.t;
    } else {
      out.noalias() += piece.coef * (piece.t * x * piece.t.adjoint());
    }
  }
  return hermitize(out);
}

CMatrix LogdetProgram::evaluate(const AffineMatrix& m, const RVector& z) const {
  return evaluate(m, unpack_blocks(z));
}

bool LogdetProgram::logdet_term(const AffineMatrix& m, const Blocks& xs, double coef,
                                double& val, RVector* grad, RMatrix* hess) const {
  const CMatrix mz = evaluate(m, xs);
  Eigen::LLT<CMatrix> llt(mz);
  if (llt.info() != Eigen::Success) return false;
  const CMatrix& l = llt.matrixLLT();
  double ld = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    ld += 2.0 * std::log(d);
  }
  val += coef * ld;
  if (grad == nullptr) return true;

  // Column j of A holds the Hermitian W_j = L^{-1} dM/dz_j L^{-H} in real coordinates
  // (diagonal, then sqrt2 Re / sqrt2 Im of the strict lower triangle), so that
  // Re tr(W_a W_b) = (A^T A)_ab. Gradient is tr W, Hessian -A^T A.
  const Eigen::Index md = mz.rows();
  std::vector<int> index;
  std::vector<Eigen::Index> local(static_cast<std::size_t>(n_vars_), -1);
  for (const auto& piece : m.pieces()) {
    const Block& b = blocks_[static_cast<std::size_t>(piece.block)];
    for (std::size_t c = 0; c < b.coords.size(); ++c) {
      const int g = b.offset + static_cast<int>(c);
      if (local[static_cast<std::size_t>(g)] < 0) {
        local[static_cast<std::size_t>(g)] = static_cast<Eigen::Index>(index.size());
        index.push_back(g);
      }
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(index.size());
  RMatrix jac = RMatrix::Zero(md * md, n);
  const double r2 = std::sqrt(2.0);
  auto add_column = [&](Eigen::Index col, const auto& entry) {
    double* out = jac.col(col).data();
    for (Eigen::Index p = 0; p < md; ++p) out[p] += entry(p, p).real();
    Eigen::Index r = md;
    for (Eigen::Index q = 0; q < md; ++q) {
      for (Eigen::Index p = q + 1; p < md; ++p, r += 2) {
        const cplx w = entry(p, q);
        out[r] += r2 * w.real();
        out[r + 1] += r2 * w.imag();
      }
    }
  };
  auto lower = llt.matrixL();
  for (const auto& piece : m.pieces()) {
    const Block& b = blocks_[static_cast<std::size_t>(piece.block)];
    if (piece.scalar) {
      const CMatrix x = lower.solve(piece.t);
      const CMatrix w = lower.solve(CMatrix(x.adjoint()));
      add_column(local[static_cast<std::size_t>(b.offset)],
                 [&](Eigen::Index p, Eigen::Index q) { return w(p, q); });
      continue;
    }
    const CMatrix s = lower.solve(piece.t);
    const double pc = piece.coef;
    for (std::size_t c = 0; c < b.coords.size(); ++c) {
      const Coord& k = b.coords[c];
      const Eigen::Index col = local[static_cast<std::size_t>(b.offset) + c];
      switch (k.kind) {
        case Coord::Diag:
          add_column(col, [&](Eigen::Index p, Eigen::Index q) {
            return pc * s(p, k.p) * std::conj(s(q, k.p));
          });
          break;
        case Coord::Re:
          add_column(col, [&](Eigen::Index p, Eigen::Index q) {
            return pc * (s(p, k.p) * std::conj(s(q, k.q)) + s(p, k.q) * std::conj(s(q, k.p)));
          });
          break;
        case Coord::Im:
          add_column(col, [&](Eigen::Index p, Eigen::Index q) {
            return pc * cplx(0.0, 1.0) *
                   (s(p, k.p) * std::conj(s(q, k.q)) - s(p, k.q) * std::conj(s(q, k.p)));
          });
          break;
      }
    }
  }
  const RVector tr = jac.topRows(md).colwise().sum().transpose();
  for (Eigen::Index a = 0; a < n; ++a) (*grad)[index[static_cast<std::size_t>(a)]] += coef * tr[a];
  if (hess != nullptr) {
    RMatrix h = RMatrix::Zero(n, n);
    h.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());
    for (Eigen::Index c = 0; c < n; ++c) {
      const int gc = index[static_cast<std::size_t>(c)];
      for (Eigen::Index a = c; a < n; ++a) {
        const int ga = index[static_cast<std::size_t>(a)];
        const double v = coef * h(a, c);
        (*hess)(std::max(ga, gc), std::min(ga, gc)) -= v;
        if (ga != gc) (*hess)(std::min(ga, gc), std::max(ga, gc)) -= v;
      }
    }
  }
  return true;
}

bool LogdetProgram::accumulate(const Function& f, const Blocks& xs, double scale, double& val,
                               RVector* grad, RMatrix* hess) const {
  val += scale * f.constant;
  for (const auto& lin : f.linear) {
    const Block& b = blocks_.at(static_cast<std::size_t>(lin.block));
    if (b.scalar) {
      val += scale * lin.a * xs[static_cast<std::size_t>(lin.block)](0, 0).real();
      if (grad) (*grad)[b.offset] += scale * lin.a;
      continue;
    }
    const CMatrix& x = xs[static_cast<std::size_t>(lin.block)];
    val += scale * lin.g.cwiseProduct(x.transpose()).sum().real();
    if (grad) {
      for (std::size_t c = 0; c < b.coords.size(); ++c) {
        const Coord& k = b.coords[c];
        double d = 0.0;
        switch (k.kind) {
          case Coord::Diag: d = lin.g(k.p, k.p).real(); break;
          case Coord::Re: d = 2.0 * lin.g(k.p, k.q).real(); break;
          case Coord::Im: d = 2.0 * lin.g(k.p, k.q).imag(); break;
        }
        (*grad)[b.offset + static_cast<Eigen::Index>(c)] += scale * d;
      }
    }
  }
  for (const auto& term : f.logdets) {
    if (!logdet_term(term.m, xs, scale * term.coef, val, grad, hess)) return false;
  }
  return true;
}

double LogdetProgram::value(const Function& f, const RVector& z) const {
  double v = 0.0;
  if (!accumulate(f, unpack_blocks(z), 1.0, v, nullptr, nullptr)) {
    throw DomainError("log-det argument is not positive definite");
  }
  return v;
}

bool LogdetProgram::strictly_feasible(const RVector& z) const {
  const Blocks xs = unpack_blocks(z);
  for (const auto& c : constraints_) {
    double v = 0.0;
    if (!accumulate(c, xs, 1.0, v, nullptr, nullptr) || !(v < 0.0)) return false;
  }
  for (const auto& m : lmis_) {
    Eigen::LLT<CMatrix> llt(evaluate(m, xs));
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

double LogdetProgram::nu() const {
  double n = static_cast<double>(constraints_.size());
  for (const auto& m : lmis_) n += m.dim();
  return std::max(1.0, n);
}

bool LogdetProgram::barrier(const RVector& z, double t, double& val, RVector* grad,
                            RMatrix* hess) const {
  val = 0.0;
  const Blocks xs = unpack_blocks(z);
  if (!accumulate(objective_, xs, -t, val, grad, hess)) return false;
  RVector g;
  for (const auto& c : constraints_) {
    double v = 0.0;
    if (!accumulate(c, xs, 1.0, v, nullptr, nullptr)) return false;
    if (!(v < 0.0)) return false;
    const double u = -v;
    val -= std::log(u);
    if (grad == nullptr) continue;
    // -log(-f): gradient f'/u, Hessian f''/u + f' f'^T / u^2.
    g.setZero(n_vars_);
    double unused = 0.0;
    accumulate(c, xs, 1.0 / u, unused, &g, hess);
    *grad += g;
    if (hess) hess->selfadjointView<Eigen::Lower>().rankUpdate(g);
  }
  for (const auto& m : lmis_) {
    if (!logdet_term(m, xs, -1.0, val, grad, hess)) return false;
  }
  return std::isfinite(val);
}

bool LogdetProgram::centering(BarrierResult& res, double t, const BarrierOptions& opt,
                              int budget) const {
  const Eigen::Index n = n_vars_;
  RVector grad(n);
  RMatrix hess(n, n);
  for (int k = 0; k < budget; ++k) {
    grad.setZero();
    hess.setZero();
    double f0 = 0.0;
    if (!barrier(res.z, t, f0, &grad, &hess)) throw DomainError("barrier left its domain");
    Eigen::LLT<RMatrix> llt(hess);
    double shift = 0.0;
    while (llt.info() != Eigen::Success) {
      shift = shift == 0.0 ? 1e-12 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff()) : shift * 10;
      llt.compute(hess + shift * RMatrix::Identity(n, n));
    }
    const RVector step = -llt.solve(grad);
    const double lambda2 = -grad.dot(step);
    res.decrement = lambda2;
    ++res.newton_steps;
    if (!(lambda2 > opt.centering_tol)) return true;
    // Inside the quadratic-convergence region the full step is taken whenever
    // it stays in the domain; elsewhere backtrack on the barrier value.
    const bool quadratic = lambda2 < 0.0625;
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      const RVector trial = res.z + alpha * step;
      double f1 = 0.0;
      if (!barrier(trial, t, f1, nullptr, nullptr)) continue;
      if (!quadratic && f1 > f0 - 0.25 * alpha * lambda2) continue;
      res.z = trial;
      moved = true;
      break;
    }
    if (!moved) return false;
  }
  return false;
}

BarrierResult LogdetProgram::center(const RVector& z0, double t, const BarrierOptions& opt) const {
  if (z0.size() != n_vars_) throw DimensionError("LogdetProgram::center: start has wrong size");
  if (!strictly_feasible(z0)) throw DomainError("LogdetProgram::center: start is not strictly feasible");
  BarrierResult res;
  res.z = z0;
  res.converged = centering(res, t, opt, opt.max_newton);
  res.gap = nu() / t;
  res.objective = value(objective_, res.z);
  return res;
}

BarrierResult LogdetProgram::solve(const RVector& z0, const BarrierOptions& opt) const {
  if (z0.size() != n_vars_) throw DimensionError("LogdetProgram::solve: start has wrong size");
  if (!strictly_feasible(z0)) throw DomainError("LogdetProgram::solve: start is not strictly feasible");
  BarrierResult res;
  res.z = z0;
  double t = opt.t0;
  while (true) {
    const bool centered = centering(res, t, opt, opt.max_newton - res.newton_steps);
    res.gap = nu() / t;
    if (!centered) break;
    if (res.gap < opt.gap_tol) {
      res.converged = true;
      break;
    }
    t *= opt.mu;
  }
  res.objective = value(objective_, res.z);
  return res;
}

}  // namespace cranopt
