#pragma once

// Generalised polar coordinates xi = tau^E ell with ||ell|| = 1, for symmetric E
// with positive spectrum. The reference sphere is the Euclidean unit sphere.

#include "oslsim/common.hpp"
#include "oslsim/matexp.hpp"

namespace osl {

struct PolarDecomposition {
  double tau;
  Vector ell;
};

/// Solves ||tau^{-E} xi|| = 1 by bisection in log tau to relative tolerance tol.
/// Throws std::domain_error for xi = 0 or a non-positive spectrum and
/// std::range_error if the root lies outside [1e-30, 1e30].
PolarDecomposition polar_decompose(const SymMatrix& e, const Vector& xi, double tol = 1e-12);
PolarDecomposition polar_decompose(const EigenData& eig, const Vector& xi, double tol = 1e-12);

struct PolarPropertiesReport {
  double reflection_tau = 0.0;   // |tau(-xi) - tau(xi)| / tau(xi)
  double reflection_ell = 0.0;   // ||ell(-xi) + ell(xi)||
  double scaling_tau = 0.0;      // |tau(r^E xi) - r tau(xi)| / (r tau(xi))
  double scaling_ell = 0.0;      // ||ell(r^E xi) - ell(xi)||
  double tolerance = 1e-8;

  bool ok() const {
    return reflection_tau <= tolerance && reflection_ell <= tolerance &&
           scaling_tau <= tolerance && scaling_ell <= tolerance;
  }
};

PolarPropertiesReport polar_properties_check(const SymMatrix& e, const Vector& xi, double r);

struct PolarGrowth {
  double tau;
  double lower;  // ||xi||^{1/Lambda} if ||xi|| >= 1, else ||xi||^{1/lambda}
  double upper;  // ||xi||^{1/lambda} if ||xi|| >= 1, else ||xi||^{1/Lambda}
};

PolarGrowth polar_growth_check(const SymMatrix& e, const Vector& xi);

}  // namespace osl
