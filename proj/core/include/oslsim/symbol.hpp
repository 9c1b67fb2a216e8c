#pragma once

// Operator-stable-like Levy measures
//   phi_x(A) = int_S int_0^inf 1_A(r^{E(x)} theta) r^{-2} dr sigma(dtheta)
// and the associated symbol, indices and generator.

#include "oslsim/common.hpp"
#include "oslsim/exponent_field.hpp"
#include "oslsim/spectral_measure.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <string>

namespace osl {

class OslModel {
 public:
  OslModel(ExponentField field, SpectralMeasure sigma);

  int dim() const { return field_.dim(); }
  const ExponentField& field() const { return field_; }
  const SpectralMeasure& sigma() const { return sigma_; }
  /// True iff sigma is reflection symmetric; the symbol is then real.
  bool symmetric() const { return sigma_.symmetric(); }

 private:
  ExponentField field_;
  SpectralMeasure sigma_;
};

struct QuadSpec {
  double rel_tol = 1e-8;
  /// Interior knot of the radial integral (the compensator switches off here).
  double r_split = 1.0;
  /// Cut-off for radial integrals that have no analytic tail.
  double R_max = 1e6;
  int max_subdivisions = 2000;
  /// Tolerance for uniform sphere rules; 0 selects rel_tol.
  double sphere_tol = 0.0;

  void validate() const;
  double angular_tol() const { return sphere_tol > 0.0 ? sphere_tol : rel_tol; }
};

/// Integral of f against phi_x. The caller declares |f(y)| <= K (1 ^ ||y||^2).
/// The small-r remainder is pushed below 0.1 rel_tol |result|; the tail beyond
/// R_max is bounded by K mass / R_max and added to the error.
Estimate levy_integrate(const OslModel& model, const Vector& x,
                        const std::function<double(const Vector&)>& f, double K,
                        const QuadSpec& quad = {});

/// q(x, xi) = int int (1 - cos<r^{E(x)} theta, xi>) r^{-2} dr sigma(dtheta).
/// Throws ContractError for non-symmetric models.
Estimate symbol_symmetric(const OslModel& model, const Vector& x, const Vector& xi,
                          const QuadSpec& quad = {});

struct ComplexEstimate {
  std::complex<double> value;
  double error = 0.0;
};

/// Compensated symbol with integrand 1 - e^{i phi} + 1_{r<1} i phi.
ComplexEstimate symbol_general(const OslModel& model, const Vector& x, const Vector& xi,
                               const QuadSpec& quad = {});

/// |q(x, t^{E(x)} xi) - t q(x, xi)| / (t q(x, xi) + 1e-300).
double scaling_residual(const OslModel& model, const Vector& x, const Vector& xi, double t,
                        const QuadSpec& quad = {});

struct SymbolShapes {
  double lower;
  double upper;
};

/// Growth shapes ||xi||^{1/lambda(x)} and ||xi||^{1/Lambda(x)}, ordered by ||xi|| vs 1.
SymbolShapes symbol_bounds(const OslModel& model, const Vector& x, const Vector& xi);

struct IndicesInfinity {
  double beta;   // 1 / lambda(x)
  double delta;  // 1 / Lambda(x)
};
IndicesInfinity bg_indices_infinity(const OslModel& model, const Vector& x);

struct IndexAtZero {
  double value;         // inf over the grid of 1 / Lambda(x)
  Vector argmin;
  bool boundary_warning;  // the infimum sits on the box boundary
  std::string warning;
};
/// Requires a declared upper bound b (ContractError otherwise).
IndexAtZero bg_indices_zero(const OslModel& model, const Box& box, int grid_n);

struct TestFunction {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  /// Optional Hessian; enables an analytic second-order treatment of tiny jumps.
  std::function<Matrix(const Vector&)> hessian;
  double sup_norm = 1.0;
  double hessian_norm_bound = 1.0;
};

/// Generator A u(x). Symmetric models integrate the symmetrised second
/// difference; others use the compensated first difference with gradient.
Estimate apply_generator(const OslModel& model, const TestFunction& u, const Vector& x,
                         const QuadSpec& quad = {});

}  // namespace osl
