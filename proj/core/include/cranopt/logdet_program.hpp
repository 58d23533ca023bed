#pragma once

// A small interior-point engine for concave programs built from affine
// Hermitian matrix expressions and log-determinants. Variables are Hermitian
// matrix blocks (stored by their real coordinates) and real scalars.

#include <vector>

#include "cranopt/linalg.hpp"

namespace cranopt {

/// M(z) = M0 + sum_j coef_j T_j X_{b_j} T_j^H + sum_s z_s G_s
class AffineMatrix {
 public:
  AffineMatrix() = default;
  explicit AffineMatrix(CMatrix constant) : constant_(std::move(constant)) {}

  int dim() const { return static_cast<int>(constant_.rows()); }
  CMatrix& constant() { return constant_; }
  const CMatrix& constant() const { return constant_; }

  /// Adds coef * T X_block T^H; T is dim() x block dimension.
  AffineMatrix& add(int block, CMatrix t, double coef = 1.0);
  /// Adds z_block * G for a scalar block; G Hermitian dim() x dim().
  AffineMatrix& add_scalar(int block, CMatrix g);

  struct Piece {
    int block = 0;
    CMatrix t;  // congruence factor, or G for scalar pieces
    double coef = 1.0;
    bool scalar = false;
  };
  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  CMatrix constant_;
  std::vector<Piece> pieces_;
};

/// constant + sum Re tr(G_b X_b) + sum a_s z_s + sum coef_j ln det M_j(z)
struct Function {
  struct Linear {
    int block = 0;
    CMatrix g;      // Hermitian blocks
    double a = 0.0; // scalar blocks
  };
  struct Logdet {
    double coef = 1.0;
    AffineMatrix m;
  };

  double constant = 0.0;
  std::vector<Linear> linear;
  std::vector<Logdet> logdets;

  Function& add_linear(int block, CMatrix g);
  Function& add_linear_scalar(int block, double a);
  Function& add_logdet(double coef, AffineMatrix m);
};

struct BarrierOptions {
  double t0 = 1.0;
  double mu = 50.0;
  double gap_tol = 1e-8;        ///< stop when nu / t falls below this
  double centering_tol = 1e-6;  ///< squared Newton decrement per centering
  int max_newton = 600;
};

struct BarrierResult {
  RVector z;
  double objective = 0.0;
  double gap = 0.0;        ///< nu / t at exit: bound on the objective suboptimality
  double decrement = 0.0;  ///< last squared Newton decrement
  int newton_steps = 0;
  bool converged = false;
};

class LogdetProgram {
 public:
  /// Full Hermitian block of the given size.
  int add_hermitian(int dim);
  /// Hermitian block whose entry (p, q) is free only when group[p] == group[q];
  /// every other entry is fixed at zero.
  int add_hermitian(int dim, std::vector<int> group);
  int add_scalar();

  int n_vars() const { return n_vars_; }
  int block_dim(int block) const { return blocks_.at(static_cast<std::size_t>(block)).dim; }
  bool is_scalar(int block) const { return blocks_.at(static_cast<std::size_t>(block)).scalar; }

  CMatrix hermitian(const RVector& z, int block) const;
  double scalar(const RVector& z, int block) const;
  void set_hermitian(RVector& z, int block, const CMatrix& x) const;
  void set_scalar(RVector& z, int block, double v) const;

  /// Concave objective to maximize.
  void set_objective(Function f) { objective_ = std::move(f); }
  /// Convex constraint f(z) <= 0.
  void add_constraint(Function f) { constraints_.push_back(std::move(f)); }
  /// Strict linear matrix inequality M(z) > 0.
  void add_lmi(AffineMatrix m) { lmis_.push_back(std::move(m)); }
  /// X_block >= 0, split along the block's sparsity groups.
  void add_psd(int block);

  const Function& objective() const { return objective_; }
  const std::vector<Function>& constraints() const { return constraints_; }

  CMatrix evaluate(const AffineMatrix& m, const RVector& z) const;
  /// Throws DomainError when a log-det argument is not positive definite.
  double value(const Function& f, const RVector& z) const;
  /// All constraints strictly negative and all LMIs positive definite.
  bool strictly_feasible(const RVector& z) const;

  /// Barrier-parameter sweep with damped Newton centering from a strictly
  /// feasible start. Throws DomainError if z0 is not strictly feasible.
  BarrierResult solve(const RVector& z0, const BarrierOptions& opt = {}) const;
  /// Newton centering at a fixed barrier parameter t only.
  BarrierResult center(const RVector& z0, double t, const BarrierOptions& opt = {}) const;

  /// Barrier complexity: number of scalar constraints plus total LMI size.
  double nu() const;

 private:
  struct Coord {
    enum Kind { Diag, Re, Im } kind;
    int p, q;
  };
  struct Block {
    int dim = 1;
    bool scalar = false;
    int offset = 0;
    std::vector<Coord> coords;
  };

  using Blocks = std::vector<CMatrix>;  // every block's current matrix (1x1 for scalars)
  Blocks unpack_blocks(const RVector& z) const;
  CMatrix evaluate(const AffineMatrix& m, const Blocks& xs) const;
  bool accumulate(const Function& f, const Blocks& xs, double scale, double& val, RVector* grad,
                  RMatrix* hess) const;
  bool logdet_term(const AffineMatrix& m, const Blocks& xs, double coef, double& val,
                   RVector* grad, RMatrix* hess) const;
  bool barrier(const RVector& z, double t, double& val, RVector* grad, RMatrix* hess) const;
  /// Returns true when centered; updates z, step count and decrement.
  bool centering(BarrierResult& res, double t, const BarrierOptions& opt, int budget) const;

  std::vector<Block> blocks_;
  std::vector<std::vector<int>> groups_;
  int n_vars_ = 0;
  Function objective_;
  std::vector<Function> constraints_;
  std::vector<AffineMatrix> lmis_;
};

}  // namespace cranopt
