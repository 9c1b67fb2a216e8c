#pragma once

// Random matrices and directions for property checks, benchmarks and the verify suite.

#include "oslsim/matexp.hpp"
#include "oslsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace osl::gen {

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
inline Matrix random_orthogonal(Rng& rng, int d) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(d, d);
}

/// Symmetric matrix with eigenvalues drawn uniformly from [lo, hi].
inline SymMatrix random_sym(Rng& rng, int d, double lo, double hi) {
  Vector ev(d);
  for (int i = 0; i < d; ++i) ev(i) = lo + (hi - lo) * rng.uniform();
  Matrix o = random_orthogonal(rng, d);
  Matrix m = o * ev.asDiagonal() * o.transpose();
  return SymMatrix(0.5 * (m + m.transpose()));
}

/// Symmetric matrix with iid entries in [-s, s].
inline SymMatrix random_entries(Rng& rng, int d, double s) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = s * (2.0 * rng.uniform() - 1.0);
  return SymMatrix(m);
}

inline Vector random_unit(Rng& rng, int d) {
  Vector v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

/// Log-uniform magnitude in [lo, hi].
inline double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace osl::gen
