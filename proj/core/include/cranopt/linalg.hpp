#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace cranopt {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kLn2 = std::numbers::ln2;

/// Eigenvalues below this are lifted before taking a log-determinant.
inline constexpr double kLogdetFloor = 1e-10;

/// (M + M^H) / 2
CMatrix hermitize(const CMatrix& m);

bool is_hermitian(const CMatrix& m, double tol = 1e-9);

double min_eigenvalue(const CMatrix& hermitian);

/// log2 det of a Hermitian positive definite matrix; throws DomainError otherwise.
double log2det(const CMatrix& hermitian_pd);

struct GuardedLogdet {
  double bits = 0.0;
  bool regularized = false;
};

/// log2 det with the domain guard: a block whose smallest eigenvalue is below
/// kLogdetFloor is evaluated as M + kLogdetFloor * I. Throws DomainError if the
/// lifted matrix is still not positive definite.
GuardedLogdet guarded_log2det(const CMatrix& hermitian);

/// Hermitian PSD square root; eigenvalues in [-clip, 0) are treated as zero.
CMatrix psd_sqrt(const CMatrix& hermitian, double clip = 1e-10);

/// Inverse of a Hermitian positive definite matrix via Cholesky.
CMatrix pd_inverse(const CMatrix& hermitian_pd);

/// Factor R = V D V^H keeping eigenvalues above rel_tol * max eigenvalue;
/// returns V D^{1/2} (possibly with zero columns when R == 0).
CMatrix covariance_factor(const CMatrix& r, double rel_tol = 1e-12);

/// Rows/columns `idx` of m.
CMatrix principal_submatrix(const CMatrix& m, const std::vector<int>& idx);

CMatrix submatrix(const CMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace cranopt
