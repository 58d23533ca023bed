#include "cranopt/rates.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <unordered_set>

#include "cranopt/errors.hpp"

namespace cranopt {

namespace {

CMatrix interference_plus_noise(const CMatrix& h, const CMatrix& cov) {
  CMatrix m = h * cov * h.adjoint();
  m.diagonal().array() += 1.0;
  return hermitize(m);
}

void check_omega(const CMatrix& omega) {
  if (!is_hermitian(omega, 1e-8)) throw DomainError("quantization covariance is not Hermitian");
}

double subset_capacity(const NetworkConfig& cfg, BsSubset s) {
  double c = 0.0;
  for (int i : subset_members(s)) c += cfg.backhaul[static_cast<std::size_t>(i)];
  return c;
}

void require_enumerable(const NetworkConfig& cfg) {
  if (cfg.n_bs() > kMaxEnumeratedBs) {
    std::ostringstream os;
    os << "N_B = " << cfg.n_bs() << " exceeds the exact subset enumeration cap of "
       << kMaxEnumeratedBs;
    throw CapacityExceeded(os.str());
  }
}

}  // namespace

Design Design::zeros(const NetworkConfig& cfg) {
  const int nb = cfg.total_bs_antennas();
  Design d;
  d.r.assign(static_cast<std::size_t>(cfg.n_ms()), CMatrix::Zero(nb, nb));
  d.omega = CMatrix::Zero(nb, nb);
  return d;
}

CMatrix Design::total_signal() const {
  CMatrix s = CMatrix::Zero(omega.rows(), omega.cols());
  for (const auto& rk : r) s += rk;
  return s;
}

CMatrix Design::signal_except(int k) const {
  CMatrix s = CMatrix::Zero(omega.rows(), omega.cols());
  for (std::size_t l = 0; l < r.size(); ++l) {
    if (static_cast<int>(l) != k) s += r[l];
  }
  return s;
}

void Design::check_shapes(const NetworkConfig& cfg) const {
  const int nb = cfg.total_bs_antennas();
  if (static_cast<int>(r.size()) != cfg.n_ms()) {
    throw DimensionError("design must hold one transmit covariance per MS");
  }
  for (const auto& rk : r) {
    if (rk.rows() != nb || rk.cols() != nb) throw DimensionError("R_k must be n_B x n_B");
  }
  if (omega.rows() != nb || omega.cols() != nb) throw DimensionError("Omega must be n_B x n_B");
}

Precoder Precoder::from_covariances(const std::vector<CMatrix>& r) {
  std::vector<CMatrix> a;
  a.reserve(r.size());
  for (const auto& rk : r) a.push_back(covariance_factor(rk));
  return Precoder(std::move(a));
}

std::vector<CMatrix> Precoder::covariances() const {
  std::vector<CMatrix> out;
  for (int k = 0; k < n_ms(); ++k) out.push_back(covariance(k));
  return out;
}

CMatrix Precoder::stacked() const {
  Eigen::Index cols = 0;
  for (const auto& ak : a_) cols += ak.cols();
  const Eigen::Index rows = a_.empty() ? 0 : a_.front().rows();
  CMatrix out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& ak : a_) {
    out.middleCols(c, ak.cols()) = ak;
    c += ak.cols();
  }
  return out;
}

QuantCov::QuantCov(const CMatrix& omega) {
  if (omega.rows() != omega.cols()) throw DimensionError("Omega must be square");
  omega_ = hermitize(omega);
}

CMatrix QuantCov::block(const NetworkConfig& cfg, int i, int j) const {
  return omega_.block(cfg.bs_offset(i), cfg.bs_offset(j), cfg.bs_antennas.at(static_cast<std::size_t>(i)),
                      cfg.bs_antennas.at(static_cast<std::size_t>(j)));
}

Design make_design(const Precoder& prec, const QuantCov& q) {
  return Design{prec.covariances(), q.matrix()};
}

CMatrix signal_block(const NetworkConfig& cfg, const Design& d, int i) {
  const int off = cfg.bs_offset(i);
  const int n = cfg.bs_antennas.at(static_cast<std::size_t>(i));
  CMatrix s = CMatrix::Zero(n, n);
  for (const auto& rk : d.r) s += rk.block(off, off, n, n);
  return s;
}

double user_rate(int k, const ChannelSet& chans, const Design& d) {
  if (k < 0 || k >= chans.n_ms() || static_cast<std::size_t>(k) >= d.r.size()) {
    throw DimensionError("user_rate: MS index out of range");
  }
  check_omega(d.omega);
  const CMatrix& h = chans.h(k);
  if (h.cols() != d.omega.rows()) throw DimensionError("user_rate: channel/design size mismatch");
  const CMatrix interf = d.signal_except(k) + d.omega;
  const double num = log2det(interference_plus_noise(h, interf + d.r[static_cast<std::size_t>(k)]));
  const double den = log2det(interference_plus_noise(h, interf));
  return std::max(0.0, num - den);
}

double user_rate(int k, const ChannelSet& chans, const Precoder& prec, const QuantCov& q) {
  return user_rate(k, chans, make_design(prec, q));
}

void validate_permutation(const std::vector<int>& perm, int n, const char* what) {
  std::vector<int> s = perm;
  std::sort(s.begin(), s.end());
  bool ok = static_cast<int>(s.size()) == n;
  for (int i = 0; ok && i < n; ++i) ok = s[static_cast<std::size_t>(i)] == i;
  if (!ok) {
    std::ostringstream os;
    os << what << ": not a permutation of 0.." << n - 1;
    throw std::invalid_argument(os.str());
  }
}

double dpc_rate(int position, const std::vector<int>& perm, const ChannelSet& chans,
                const Design& d) {
  validate_permutation(perm, static_cast<int>(d.r.size()), "dpc_rate");
  if (position < 0 || position >= static_cast<int>(perm.size())) {
    throw std::out_of_range("dpc_rate: position out of range");
  }
  check_omega(d.omega);
  const int user = perm[static_cast<std::size_t>(position)];
  CMatrix tail = d.omega;
  for (std::size_t l = static_cast<std::size_t>(position) + 1; l < perm.size(); ++l) {
    tail += d.r[static_cast<std::size_t>(perm[l])];
  }
  const CMatrix& h = chans.h(user);
  const double num = log2det(interference_plus_noise(h, tail + d.r[static_cast<std::size_t>(user)]));
  const double den = log2det(interference_plus_noise(h, tail));
  return std::max(0.0, num - den);
}

double dpc_rate(int position, const std::vector<int>& perm, const ChannelSet& chans,
                const Precoder& prec, const QuantCov& q) {
  return dpc_rate(position, perm, chans, make_design(prec, q));
}

SubsetRate backhaul_subset_rate_ex(const NetworkConfig& cfg, BsSubset subset, const Design& d) {
  if (subset == 0) throw std::invalid_argument("backhaul_subset_rate: empty subset");
  check_omega(d.omega);
  const auto sel = block_select(cfg, subset);
  SubsetRate out;
  try {
    for (int i : sel.bs()) {
      const auto single = block_select(cfg, std::vector<int>{i});
      const auto lg = guarded_log2det(hermitize(signal_block(cfg, d, i) + single.extract(d.omega)));
      out.bits += lg.bits;
      out.regularized |= lg.regularized;
    }
    const auto joint = guarded_log2det(hermitize(sel.extract(d.omega)));
    out.bits -= joint.bits;
    out.regularized |= joint.regularized;
  } catch (const DomainError& e) {
    std::ostringstream os;
    os << "backhaul rate for BS subset {";
    for (std::size_t j = 0; j < sel.bs().size(); ++j) os << (j ? "," : "") << sel.bs()[j] + 1;
    os << "}: " << e.what();
    throw DomainError(os.str());
  }
  out.bits = std::max(0.0, out.bits);
  return out;
}

double backhaul_subset_rate(const NetworkConfig& cfg, BsSubset subset, const Design& d) {
  return backhaul_subset_rate_ex(cfg, subset, d).bits;
}

double backhaul_subset_rate(const NetworkConfig& cfg, BsSubset subset, const Precoder& prec,
                            const QuantCov& q) {
  return backhaul_subset_rate(cfg, subset, make_design(prec, q));
}

double independent_backhaul_rate(const NetworkConfig& cfg, int i, const Design& d) {
  if (i < 0 || i >= cfg.n_bs()) throw std::out_of_range("independent_backhaul_rate: bad BS index");
  return backhaul_subset_rate(cfg, BsSubset{1} << static_cast<unsigned>(i), d);
}

double independent_backhaul_rate(const NetworkConfig& cfg, int i, const Precoder& prec,
                                 const QuantCov& q) {
  return independent_backhaul_rate(cfg, i, make_design(prec, q));
}

std::string FeasibilityReport::describe(std::size_t index) const {
  const auto& c = constraints.at(index);
  std::ostringstream os;
  if (c.kind == ConstraintStatus::Kind::Power) {
    os << "power[BS " << subset_members(c.subset).front() + 1 << "]";
  } else {
    os << "backhaul{";
    const auto m = subset_members(c.subset);
    for (std::size_t j = 0; j < m.size(); ++j) os << (j ? "," : "") << m[j] + 1;
    os << "}";
  }
  return os.str();
}

FeasibilityReport check_feasible(const NetworkConfig& cfg, const Design& d, double tol) {
  require_enumerable(cfg);
  d.check_shapes(cfg);
  FeasibilityReport rep;
  for (BsSubset s = 1; s <= cfg.all_bs(); ++s) {
    const auto g = backhaul_subset_rate_ex(cfg, s, d);
    rep.regularized |= g.regularized;
    rep.constraints.push_back({ConstraintStatus::Kind::Backhaul, s, g.bits, subset_capacity(cfg, s)});
  }
  for (int i = 0; i < cfg.n_bs(); ++i) {
    const int off = cfg.bs_offset(i);
    const int n = cfg.bs_antennas[static_cast<std::size_t>(i)];
    const double p = signal_block(cfg, d, i).trace().real() + d.omega.block(off, off, n, n).trace().real();
    rep.constraints.push_back({ConstraintStatus::Kind::Power, BsSubset{1} << static_cast<unsigned>(i), p,
                               cfg.powers[static_cast<std::size_t>(i)]});
  }
  rep.worst_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < rep.constraints.size(); ++c) {
    const double v = rep.constraints[c].violation();
    if (v > rep.worst_violation) {
      rep.worst_violation = v;
      rep.worst_index = c;
    }
    if (std::abs(v) <= tol) rep.active.push_back(c);
  }
  rep.feasible = rep.worst_violation <= tol;
  return rep;
}

FeasibilityReport check_feasible(const NetworkConfig& cfg, const Precoder& prec,
                                 const QuantCov& q, double tol) {
  return check_feasible(cfg, make_design(prec, q), tol);
}

std::vector<double> corner_point(const NetworkConfig& cfg, const std::vector<int>& perm,
                                 const Design& d) {
  validate_permutation(perm, cfg.n_bs(), "corner_point");
  check_omega(d.omega);
  std::vector<double> out;
  std::vector<int> prefix;
  for (int b : perm) {
    const auto self = block_select(cfg, std::vector<int>{b});
    CMatrix cond = self.extract(d.omega);
    if (!prefix.empty()) {
      const auto pre = block_select(cfg, prefix);
      const CMatrix opp = pre.extract(d.omega);
      Eigen::LLT<CMatrix> llt(opp);
      if (llt.info() != Eigen::Success) {
        std::ostringstream os;
        os << "corner_point: prefix block before BS " << b + 1 << " is singular";
        throw DomainError(os.str());
      }
      const CMatrix cross = submatrix(d.omega, self.rows(), pre.rows());
      cond -= cross * llt.solve(cross.adjoint());
    }
    const double num = guarded_log2det(hermitize(signal_block(cfg, d, b) + self.extract(d.omega))).bits;
    const double den = guarded_log2det(hermitize(cond)).bits;
    out.push_back(num - den);
    prefix.push_back(b);
  }
  return out;
}

std::vector<double> corner_point(const NetworkConfig& cfg, const std::vector<int>& perm,
                                 const Precoder& prec, const QuantCov& q) {
  return corner_point(cfg, perm, make_design(prec, q));
}

bool is_corner_ordering(const NetworkConfig& cfg, const Design& d, const std::vector<int>& perm,
                        double tol) {
  validate_permutation(perm, cfg.n_bs(), "is_corner_ordering");
  BsSubset s = 0;
  for (int b : perm) {
    s |= BsSubset{1} << static_cast<unsigned>(b);
    if (std::abs(backhaul_subset_rate(cfg, s, d) - subset_capacity(cfg, s)) > tol) return false;
  }
  return true;
}

std::optional<std::vector<int>> detect_corner_ordering(const NetworkConfig& cfg, const Design& d,
                                                       double tol) {
  require_enumerable(cfg);
  const int n = cfg.n_bs();
  std::vector<signed char> tight(static_cast<std::size_t>(cfg.all_bs()) + 1, -1);
  auto is_tight = [&](BsSubset s) {
    auto& t = tight[s];
    if (t < 0) t = std::abs(backhaul_subset_rate(cfg, s, d) - subset_capacity(cfg, s)) <= tol ? 1 : 0;
    return t == 1;
  };
  std::unordered_set<BsSubset> dead;
  std::vector<int> order;
  std::function<bool(BsSubset)> extend = [&](BsSubset s) {
    if (static_cast<int>(order.size()) == n) return true;
    if (dead.count(s)) return false;
    for (int j = 0; j < n; ++j) {
      const BsSubset bit = BsSubset{1} << static_cast<unsigned>(j);
      if ((s & bit) || !is_tight(s | bit)) continue;
      order.push_back(j);
      if (extend(s | bit)) return true;
      order.pop_back();
    }
    dead.insert(s);
    return false;
  };
  if (extend(0)) return order;
  return std::nullopt;
}

std::optional<std::vector<int>> detect_corner_ordering(const NetworkConfig& cfg,
                                                       const Precoder& prec, const QuantCov& q,
                                                       double tol) {
  return detect_corner_ordering(cfg, make_design(prec, q), tol);
}

namespace {

RateReport assemble(const NetworkConfig& cfg, const Design& d, std::vector<double> rates) {
  RateReport rep;
  rep.user_rates = std::move(rates);
  for (std::size_t k = 0; k < rep.user_rates.size(); ++k) {
    rep.weighted_sum += cfg.weights[k] * rep.user_rates[k];
  }
  if (cfg.n_bs() <= kMaxEnumeratedBs) {
    for (BsSubset s = 1; s <= cfg.all_bs(); ++s) {
      const auto g = backhaul_subset_rate_ex(cfg, s, d);
      rep.regularized |= g.regularized;
      rep.backhaul.push_back({s, g.bits, subset_capacity(cfg, s)});
    }
  }
  for (int i = 0; i < cfg.n_bs(); ++i) {
    const int off = cfg.bs_offset(i);
    const int n = cfg.bs_antennas[static_cast<std::size_t>(i)];
    rep.bs_power.push_back(signal_block(cfg, d, i).trace().real() +
                           d.omega.block(off, off, n, n).trace().real());
  }
  return rep;
}

}  // namespace

RateReport weighted_sum_rate(const NetworkConfig& cfg, const ChannelSet& chans, const Design& d) {
  d.check_shapes(cfg);
  std::vector<double> rates;
  for (int k = 0; k < cfg.n_ms(); ++k) rates.push_back(user_rate(k, chans, d));
  return assemble(cfg, d, std::move(rates));
}

RateReport weighted_sum_rate(const NetworkConfig& cfg, const ChannelSet& chans,
                             const Precoder& prec, const QuantCov& q) {
  return weighted_sum_rate(cfg, chans, make_design(prec, q));
}

RateReport weighted_sum_rate_dpc(const NetworkConfig& cfg, const ChannelSet& chans,
                                 const Design& d, const std::vector<int>& perm) {
  d.check_shapes(cfg);
  std::vector<double> rates(static_cast<std::size_t>(cfg.n_ms()), 0.0);
  for (int pos = 0; pos < cfg.n_ms(); ++pos) {
    rates[static_cast<std::size_t>(perm[static_cast<std::size_t>(pos)])] = dpc_rate(pos, perm, chans, d);
  }
  return assemble(cfg, d, std::move(rates));
}

}  // namespace cranopt
