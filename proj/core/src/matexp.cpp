#include "oslsim/matexp.hpp"

#include "oslsim/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace osl {

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw std::invalid_argument("SymMatrix: expected a non-empty square matrix, got " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw std::invalid_argument("SymMatrix: non-finite entry");
  const double defect = asymmetry(m);
  if (defect > kSymmetryTolerance) {
    throw std::invalid_argument("SymMatrix: asymmetry " + std::to_string(defect) +
                                " exceeds 1e-12");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::diagonal(const Vector& diag) {
  return SymMatrix(Matrix(diag.asDiagonal()));
}

SymMatrix SymMatrix::scaled_identity(int dim, double s) {
  return SymMatrix(s * Matrix::Identity(dim, dim));
}

double SymMatrix::asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

EigenData eigen_decompose(const SymMatrix& e) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(e.matrix());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigen_decompose: eigensolver failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

void require_positive(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::domain_error("matrix power requires r > 0, got " + std::to_string(r));
  }
}

Matrix spectral_function(const EigenData& eig, const Vector& fvals) {
  Matrix m = eig.vectors * fvals.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (m + m.transpose());
}

}  // namespace

SymMatrix mat_pow(const SymMatrix& e, double r) {
  require_positive(r);
  return mat_pow(eigen_decompose(e), r);
}

SymMatrix mat_pow(const EigenData& eig, double r) {
  require_positive(r);
  const double lr = std::log(r);
  Vector p = (eig.values * lr).array().exp().matrix();
  return SymMatrix(spectral_function(eig, p));
}

Vector apply_pow(const EigenData& eig, double r, const Vector& v) {
  require_positive(r);
  const double lr = std::log(r);
  Vector coeff = eig.vectors.transpose() * v;
  coeff.array() *= (eig.values * lr).array().exp();
  return eig.vectors * coeff;
}

SymMatrix mat_exp(const SymMatrix& a, double t) {
  const EigenData eig = eigen_decompose(a);
  Vector p = (eig.values * t).array().exp().matrix();
  return SymMatrix(spectral_function(eig, p));
}

EigenBounds eigen_bounds(const SymMatrix& e) {
  const EigenData eig = eigen_decompose(e);
  return {eig.lambda_min(), eig.lambda_max()};
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

NormCheck power_norm_check(const SymMatrix& e, double r) {
  require_positive(r);
  const EigenData eig = eigen_decompose(e);
  const double measured = spectral_norm(mat_pow(eig, r).matrix());
  const double exponent = r <= 1.0 ? eig.lambda_min() : eig.lambda_max();
  return {measured, std::pow(r, exponent)};
}

double van_loan_residual(const SymMatrix& a, const SymMatrix& b, double t, double quad_tol) {
  if (!(quad_tol > 0.0)) throw std::domain_error("van_loan_residual: quad_tol must be > 0");
  if (!(t >= 0.0)) throw std::domain_error("van_loan_residual: t must be >= 0");
  if (a.dim() != b.dim()) throw std::invalid_argument("van_loan_residual: dimension mismatch");

  const EigenData eig_a = eigen_decompose(a);
  const EigenData eig_ab = eigen_decompose(SymMatrix(a.matrix() + b.matrix()));
  auto expm = [](const EigenData& eig, double s) {
    Vector p = (eig.values * s).array().exp().matrix();
    return Matrix(eig.vectors * p.asDiagonal() * eig.vectors.transpose());
  };

  const Matrix& bm = b.matrix();
  auto integrand = [&](double s) -> Matrix { return expm(eig_a, t - s) * bm * expm(eig_ab, s); };

  Matrix integral = Matrix::Zero(a.dim(), a.dim());
  if (t > 0.0) {
    auto res = quad::integrate(integrand, 0.0, t, quad_tol, 0.0, 4000);
    if (!res.converged) {
      throw QuadratureError("van_loan_residual: quadrature did not converge",
                            res.value.norm(), res.error);
    }
    integral = res.value;
  }
  return (expm(eig_ab, t) - expm(eig_a, t) - integral).norm();
}

PowerDiff power_diff_check(const SymMatrix& e1, const SymMatrix& e2, double r, double a,
                           double delta) {
  if (!(r > 0.0 && r < 1.0)) throw std::domain_error("power_diff_check: r must lie in (0,1)");
  if (!(delta > 0.0 && delta < a - 0.5)) {
    throw std::domain_error("power_diff_check: delta must satisfy 0 < delta < a - 1/2");
  }
  const EigenData eig1 = eigen_decompose(e1);
  const EigenData eig2 = eigen_decompose(e2);
  if (eig1.lambda_min() < a - 1e-12 || eig2.lambda_min() < a - 1e-12) {
    throw std::domain_error("power_diff_check: an eigenvalue lies below a");
  }
  const double lhs = spectral_norm(mat_pow(eig1, r).matrix() - mat_pow(eig2, r).matrix());
  const double rhs = spectral_norm(e1.matrix() - e2.matrix()) * std::pow(r, a - delta);
  return {lhs, rhs};
}

}  // namespace osl
