#include "oslsim/polar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace osl {

namespace {

// log ||r^{-E} xi|| at r = e^u, in the eigenbasis (z = O^T xi).
double log_norm(const EigenData& eig, const Vector& z, double u) {
  // Factor out the largest term to stay finite for extreme u.
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < z.size(); ++i) {
    if (z(i) != 0.0) best = std::max(best, std::log(std::abs(z(i))) - eig.values(i) * u);
  }
  double s = 0.0;
  for (int i = 0; i < z.size(); ++i) {
    if (z(i) != 0.0) s += std::exp(2.0 * (std::log(std::abs(z(i))) - eig.values(i) * u - best));
  }
  return best + 0.5 * std::log(s);
}

}  // namespace

PolarDecomposition polar_decompose(const EigenData& eig, const Vector& xi, double tol) {
  if (xi.size() != eig.dim()) throw std::invalid_argument("polar_decompose: dimension mismatch");
  const double n = xi.norm();
  if (!(n > 0.0)) throw std::domain_error("polar_decompose: xi must be nonzero");
  if (!(eig.lambda_min() > 0.0)) {
    throw std::domain_error("polar_decompose: exponent must have positive spectrum");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("polar_decompose: tol must be positive");

  const Vector z = eig.vectors.transpose() * xi;
  const double ln_n = std::log(n);
  const double u1 = ln_n / eig.lambda_max();
  const double u2 = ln_n / eig.lambda_min();
  double lo = std::min(u1, u2) - std::log(2.0);
  double hi = std::max(u1, u2) + std::log(2.0);
  const double u_min = std::log(1e-30);
  const double u_max = std::log(1e30);
  // g(u) = log ||e^{-uE} xi|| is strictly decreasing; g(lo) >= 0 >= g(hi).
  while (log_norm(eig, z, lo) < 0.0) {
    lo -= 1.0;
    if (lo < u_min) throw std::range_error("polar_decompose: root below 1e-30");
  }
  while (log_norm(eig, z, hi) > 0.0) {
    hi += 1.0;
    if (hi > u_max) throw std::range_error("polar_decompose: root above 1e30");
  }
  if (std::max(std::abs(lo), std::abs(hi)) > u_max) {
    throw std::range_error("polar_decompose: bracket outside [1e-30, 1e30]");
  }
  // Bisection in u; |du| <= tol gives relative accuracy tol on tau.
  const double ln_tol = std::log1p(tol) * 0.5;
  for (int it = 0; it < 400 && hi - lo > ln_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_norm(eig, z, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double u = 0.5 * (lo + hi);
  PolarDecomposition out;
  out.tau = std::exp(u);
  Vector zl(z.size());
  for (int i = 0; i < z.size(); ++i) zl(i) = z(i) * std::exp(-eig.values(i) * u);
  out.ell = eig.vectors * zl;
  // The residual of bisection leaves ||ell|| = 1 + O(tol); normalise exactly.
  out.ell /= out.ell.norm();
  return out;
}

PolarDecomposition polar_decompose(const SymMatrix& e, const Vector& xi, double tol) {
  return polar_decompose(eigen_decompose(e), xi, tol);
}

PolarPropertiesReport polar_properties_check(const SymMatrix& e, const Vector& xi, double r) {
  if (!(r > 0.0)) throw std::domain_error("polar_properties_check: r must be positive");
  const EigenData eig = eigen_decompose(e);
  const PolarDecomposition p = polar_decompose(eig, xi);
  const PolarDecomposition pm = polar_decompose(eig, -xi);
  const PolarDecomposition ps = polar_decompose(eig, apply_pow(eig, r, xi));
  PolarPropertiesReport rep;
  rep.reflection_tau = std::abs(pm.tau - p.tau) / p.tau;
  rep.reflection_ell = (pm.ell + p.ell).norm();
  rep.scaling_tau = std::abs(ps.tau - r * p.tau) / (r * p.tau);
  rep.scaling_ell = (ps.ell - p.ell).norm();
  return rep;
}

PolarGrowth polar_growth_check(const SymMatrix& e, const Vector& xi) {
  const EigenData eig = eigen_decompose(e);
  const PolarDecomposition p = polar_decompose(eig, xi);
  const double n = xi.norm();
  const double s_small = std::pow(n, 1.0 / eig.lambda_max());
  const double s_large = std::pow(n, 1.0 / eig.lambda_min());
  PolarGrowth g;
  g.tau = p.tau;
  g.lower = std::min(s_small, s_large);
  g.upper = std::max(s_small, s_large);
  return g;
}

}  // namespace osl
