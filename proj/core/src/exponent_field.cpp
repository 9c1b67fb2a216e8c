#include "oslsim/exponent_field.hpp"

#include "oslsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace osl {

namespace {

void require_e3(double a, const std::string& what) {
  if (!(a > 0.5 + ExponentField::kStrictness)) {
    std::ostringstream os;
    os << what << ": lower eigenvalue bound a = " << a << " violates (E3) (need a > 1/2)";
    throw AdmissibilityError(os.str());
  }
}

}  // namespace

ExponentField::ExponentField(int dim, Evaluator evaluator, double a, std::optional<double> b,
                             double lip, std::string kind)
    : dim_(dim),
      evaluator_(std::move(evaluator)),
      a_(a),
      b_(b),
      lip_(lip),
      kind_(std::move(kind)) {
  if (dim_ < 1) throw std::invalid_argument("ExponentField: dimension must be >= 1");
  if (!evaluator_) throw std::invalid_argument("ExponentField: empty evaluator");
  if (b_ && *b_ < a_) throw AdmissibilityError("ExponentField: (E4) bound b is below a");
  if (!(lip_ >= 0.0)) throw std::invalid_argument("ExponentField: Lipschitz constant must be >= 0");
}

SymMatrix ExponentField::at(const Vector& x) const { return SymMatrix(evaluator_(x)); }

EigenData ExponentField::eigen_at(const Vector& x) const {
  if (constant_eigen_) return *constant_eigen_;
  return eigen_decompose(at(x));
}

ExponentField ExponentField::with_declared(double a, std::optional<double> b, double lip) const {
  ExponentField copy = *this;
  copy.a_ = a;
  copy.b_ = b;
  copy.lip_ = lip;
  return copy;
}

ExponentField make_constant(const SymMatrix& e0) {
  auto eig = std::make_shared<const EigenData>(eigen_decompose(e0));
  require_e3(eig->lambda_min(), "make_constant");
  Matrix m = e0.matrix();
  ExponentField field(e0.dim(), [m](const Vector&) { return m; }, eig->lambda_min(),
                      eig->lambda_max(), 0.0, "constant");
  field.constant_eigen_ = std::move(eig);
  return field;
}

ExponentField make_stable_like(int dim, ScalarField alpha) {
  if (!alpha.fn) throw std::invalid_argument("make_stable_like: empty alpha");
  if (!(alpha.min > 0.0) || !(alpha.max >= alpha.min)) {
    throw AdmissibilityError("make_stable_like: alpha range must satisfy 0 < min <= max");
  }
  if (!(alpha.max < 2.0)) {
    std::ostringstream os;
    os << "make_stable_like: alpha_max = " << alpha.max
       << " gives a = 1/alpha_max <= 1/2, violating (E3)";
    throw AdmissibilityError(os.str());
  }
  if (!(alpha.lipschitz >= 0.0)) throw std::invalid_argument("make_stable_like: L_alpha < 0");
  const double a = 1.0 / alpha.max;
  const double b = 1.0 / alpha.min;
  require_e3(a, "make_stable_like");
  if (alpha.min == alpha.max) return make_constant(SymMatrix::scaled_identity(dim, a));
  const double lip = alpha.lipschitz / (alpha.min * alpha.min);
  auto fn = alpha.fn;
  return ExponentField(
      dim, [fn, dim](const Vector& x) { return Matrix(Matrix::Identity(dim, dim) / fn(x)); }, a,
      b, lip, "stable_like");
}

ExponentField make_interpolated(const SymMatrix& e_low, const SymMatrix& e_high,
                                ScalarField blend) {
  if (e_low.dim() != e_high.dim()) {
    throw std::invalid_argument("make_interpolated: dimension mismatch");
  }
  if (!blend.fn) throw std::invalid_argument("make_interpolated: empty blend");
  const EigenBounds lo = eigen_bounds(e_low);
  const EigenBounds hi = eigen_bounds(e_high);
  const double a = std::min(lo.lambda, hi.lambda);
  require_e3(a, "make_interpolated");
  const double b = std::max(lo.Lambda, hi.Lambda);
  const Matrix low = e_low.matrix();
  const Matrix diff = e_high.matrix() - e_low.matrix();
  const double lip = blend.lipschitz * spectral_norm(diff);
  auto fn = blend.fn;
  return ExponentField(
      e_low.dim(), [fn, low, diff](const Vector& x) { return Matrix(low + fn(x) * diff); }, a, b,
      lip, "interpolated");
}

ScalarField sin_alpha(double center, double amplitude, int coord) {
  if (coord < 0) throw std::invalid_argument("sin_alpha: negative coordinate");
  const double amp = std::abs(amplitude);
  return {[=](const Vector& x) { return center + amplitude * std::sin(x(coord)); },
          center - amp, center + amp, amp};
}

ScalarField clamp_blend(int coord, double lo, double hi) {
  if (coord < 0) throw std::invalid_argument("clamp_blend: negative coordinate");
  if (!(hi > lo)) throw std::invalid_argument("clamp_blend: need hi > lo");
  return {[=](const Vector& x) { return std::clamp((x(coord) - lo) / (hi - lo), 0.0, 1.0); },
          0.0, 1.0, 1.0 / (hi - lo)};
}

ScalarField sin_blend(int coord, double k) {
  if (coord < 0) throw std::invalid_argument("sin_blend: negative coordinate");
  return {[=](const Vector& x) { return 0.5 * (1.0 + std::sin(k * x(coord))); }, 0.0, 1.0,
          0.5 * std::abs(k)};
}

ValidationReport validate_admissible(const ExponentField& field, const Box& box, int grid_n,
                                     int pair_m, std::uint64_t seed) {
  if (grid_n < 2) throw std::invalid_argument("validate_admissible: grid_n must be >= 2");
  if (pair_m < 1) throw std::invalid_argument("validate_admissible: pair_m must be >= 1");
  const int d = field.dim();
  if (box.lo.size() != d || box.hi.size() != d) {
    throw std::invalid_argument("validate_admissible: box dimension mismatch");
  }

  ValidationReport rep;
  rep.min_lambda = std::numeric_limits<double>::infinity();
  rep.max_Lambda = -std::numeric_limits<double>::infinity();

  // Walk the lattice with an odometer index.
  std::vector<int> idx(d, 0);
  Vector x(d);
  bool done = false;
  while (!done) {
    for (int k = 0; k < d; ++k) {
      x(k) = box.lo(k) + (box.hi(k) - box.lo(k)) * idx[k] / double(grid_n - 1);
    }
    const Matrix m = field.raw(x);
    rep.max_symmetry_defect = std::max(rep.max_symmetry_defect, SymMatrix::asymmetry(m));
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    rep.min_lambda = std::min(rep.min_lambda, es.eigenvalues()(0));
    rep.max_Lambda = std::max(rep.max_Lambda, es.eigenvalues()(d - 1));
    ++rep.grid_points;

    int k = 0;
    while (k < d && ++idx[k] == grid_n) idx[k++] = 0;
    done = k == d;
  }

  Rng rng(seed);
  Vector y(d);
  for (int i = 0; i < pair_m; ++i) {
    for (int k = 0; k < d; ++k) {
      x(k) = box.lo(k) + (box.hi(k) - box.lo(k)) * rng.uniform();
      y(k) = box.lo(k) + (box.hi(k) - box.lo(k)) * rng.uniform();
    }
    const double dist = (x - y).norm();
    if (dist == 0.0) continue;
    const double ratio = spectral_norm(field.raw(x) - field.raw(y)) / dist;
    rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, ratio);
    ++rep.pairs;
  }

  std::ostringstream os;
  if (rep.max_symmetry_defect > SymMatrix::kSymmetryTolerance) {
    os << "(E1) symmetry defect " << rep.max_symmetry_defect << " exceeds 1e-12";
    rep.violations.push_back(os.str());
    os.str("");
  }
  if (!(field.a() > 0.5 + ExponentField::kStrictness)) {
    os << "(E3) declared a = " << field.a() << " is not > 1/2";
    rep.violations.push_back(os.str());
    os.str("");
  }
  if (rep.min_lambda < field.a() - 1e-9) {
    os << "(E3) min eigenvalue " << rep.min_lambda << " below declared a = " << field.a();
    rep.violations.push_back(os.str());
    os.str("");
  }
  if (field.b() && rep.max_Lambda > *field.b() + 1e-9) {
    os << "(E4) max eigenvalue " << rep.max_Lambda << " above declared b = " << *field.b();
    rep.violations.push_back(os.str());
    os.str("");
  }
  if (rep.max_lipschitz_ratio > field.lip() * (1.0 + 1e-6) + 1e-15) {
    os << "(E2) empirical Lipschitz ratio " << rep.max_lipschitz_ratio
       << " exceeds declared constant " << field.lip();
    rep.violations.push_back(os.str());
  }
  return rep;
}

}  // namespace osl
