#include "cranopt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cranopt/errors.hpp"

namespace cranopt {

CMatrix hermitize(const CMatrix& m) {
  CMatrix h = 0.5 * (m + m.adjoint());
  return h;
}

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

double min_eigenvalue(const CMatrix& hermitian) {
  if (hermitian.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double log2det(const CMatrix& hermitian_pd) {
  if (hermitian_pd.size() == 0) return 0.0;
  Eigen::LLT<CMatrix> llt(hermitian_pd);
  if (llt.info() != Eigen::Success) {
    throw DomainError("log2det: matrix is not positive definite");
  }
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc / kLn2;
}

GuardedLogdet guarded_log2det(const CMatrix& hermitian) {
  if (hermitian.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian, Eigen::EigenvaluesOnly);
  RVector ev = es.eigenvalues();
  GuardedLogdet out;
  if (ev.minCoeff() < kLogdetFloor) {
    out.regularized = true;
    ev.array() += kLogdetFloor;
    if (ev.minCoeff() <= 0.0) {
      std::ostringstream os;
      os << "log-det block has eigenvalue " << ev.minCoeff() - kLogdetFloor
         << " below the regularization floor";
      throw DomainError(os.str());
    }
  }
  out.bits = ev.array().log().sum() / kLn2;
  return out;
}

CMatrix psd_sqrt(const CMatrix& hermitian, double clip) {
  if (hermitian.size() == 0) return hermitian;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
  RVector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -clip) {
      throw DomainError("psd_sqrt: matrix has a significantly negative eigenvalue");
    }
    ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
  }
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix pd_inverse(const CMatrix& hermitian_pd) {
  Eigen::LLT<CMatrix> llt(hermitian_pd);
  if (llt.info() != Eigen::Success) {
    throw DomainError("pd_inverse: matrix is not positive definite");
  }
  return llt.solve(CMatrix::Identity(hermitian_pd.rows(), hermitian_pd.cols()));
}

CMatrix covariance_factor(const CMatrix& r, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(r));
  const RVector& ev = es.eigenvalues();
  const double top = ev.size() ? ev.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  if (top > 0.0) {
    for (Eigen::Index i = ev.size() - 1; i >= 0; --i) {
      if (ev(i) > rel_tol * top) keep.push_back(i);
    }
  }
  CMatrix a(r.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    a.col(static_cast<Eigen::Index>(c)) =
        es.eigenvectors().col(keep[c]) * std::sqrt(ev(keep[c]));
  }
  return a;
}

CMatrix principal_submatrix(const CMatrix& m, const std::vector<int>& idx) {
  return submatrix(m, idx, idx);
}

CMatrix submatrix(const CMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  CMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    }
  }
  return out;
}

}  // namespace cranopt
