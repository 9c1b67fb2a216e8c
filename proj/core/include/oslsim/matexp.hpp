#pragma once

// Matrix powers r^E = exp(E ln r) of symmetric exponents and numerical checks of
// the matrix-power estimates the rest of the library relies on.

#include "oslsim/common.hpp"

namespace osl {

/// Real symmetric d x d matrix. Construction rejects inputs whose asymmetry
/// exceeds 1e-12 (absolute, entrywise) and stores the symmetrised matrix.
class SymMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(int dim);
  static SymMatrix diagonal(const Vector& diag);
  static SymMatrix scaled_identity(int dim, double s);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  /// Largest |m(i,j) - m(j,i)| of an arbitrary square matrix.
  static double asymmetry(const Matrix& m);

 private:
  Matrix m_;
};

/// Orthogonal eigendecomposition E = O diag(values) O^T, eigenvalues ascending.
struct EigenData {
  Vector values;
  Matrix vectors;

  int dim() const { return static_cast<int>(values.size()); }
  double lambda_min() const { return values(0); }
  double lambda_max() const { return values(values.size() - 1); }
};

EigenData eigen_decompose(const SymMatrix& e);

/// r^E for r > 0, computed as O diag(r^{a_i}) O^T. Throws std::domain_error for r <= 0.
SymMatrix mat_pow(const SymMatrix& e, double r);
SymMatrix mat_pow(const EigenData& eig, double r);

/// r^E v without forming the matrix.
Vector apply_pow(const EigenData& eig, double r, const Vector& v);

/// exp(t A) for symmetric A.
SymMatrix mat_exp(const SymMatrix& a, double t);

struct EigenBounds {
  double lambda;  // smallest eigenvalue
  double Lambda;  // largest eigenvalue
};
EigenBounds eigen_bounds(const SymMatrix& e);

/// Operator 2-norm.
double spectral_norm(const Matrix& m);

struct NormCheck {
  double measured;
  double bound;
};
/// measured = ||r^E||_2, bound = r^lambda for r <= 1 and r^Lambda for r > 1.
NormCheck power_norm_check(const SymMatrix& e, double r);

/// Frobenius norm of e^{(A+B)t} - e^{At} - int_0^t e^{A(t-s)} B e^{(A+B)s} ds,
/// with the integral evaluated by adaptive quadrature to absolute tolerance quad_tol.
/// Throws QuadratureError if the quadrature does not converge.
double van_loan_residual(const SymMatrix& a, const SymMatrix& b, double t, double quad_tol);

struct PowerDiff {
  double lhs;        // ||r^{E1} - r^{E2}||_2
  double rhs_shape;  // ||E1 - E2||_2 * r^{a - delta}
};
/// Requires r in (0,1), both spectra >= a and 0 < delta < a - 1/2 (std::domain_error otherwise).
PowerDiff power_diff_check(const SymMatrix& e1, const SymMatrix& e2, double r, double a,
                           double delta);

}  // namespace osl
