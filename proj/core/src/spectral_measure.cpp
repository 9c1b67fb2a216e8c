#include "oslsim/spectral_measure.hpp"

#include "oslsim/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace osl {

namespace {

constexpr double kUnitTolerance = 1e-12;
constexpr double kMatchTolerance = 1e-12;

bool detect_symmetry(const std::vector<Vector>& atoms, const std::vector<double>& weights) {
  std::vector<bool> used(atoms.size(), false);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    bool found = false;
    for (std::size_t j = 0; j < atoms.size() && !found; ++j) {
      if ((atoms[i] + atoms[j]).cwiseAbs().maxCoeff() <= kMatchTolerance &&
          std::abs(weights[i] - weights[j]) <= kMatchTolerance * std::max(1.0, weights[i])) {
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// Product rule on S^{d-1}, d >= 3: Gauss-Legendre in each polar angle (with the
// sin^k Jacobian folded into the weights) and the trapezoid rule in the azimuth.
std::vector<SphereNode> product_rule(int dim, double mass, int level) {
  const int n_polar = 4 << level;
  const int n_azimuth = 8 << level;
  std::vector<double> gx;
  std::vector<double> gw;
  gauss_legendre(n_polar, gx, gw);

  const int n_angles = dim - 2;
  std::vector<int> idx(n_angles, 0);
  std::vector<SphereNode> nodes;
  double total = 0.0;
  bool done = false;
  while (!done) {
    double jac = 1.0;
    std::vector<double> sines(n_angles);
    std::vector<double> cosines(n_angles);
    for (int j = 0; j < n_angles; ++j) {
      const double phi = 0.5 * std::numbers::pi * (gx[idx[j]] + 1.0);
      sines[j] = std::sin(phi);
      cosines[j] = std::cos(phi);
      jac *= gw[idx[j]] * 0.5 * std::numbers::pi * std::pow(sines[j], dim - 2 - j);
    }
    for (int k = 0; k < n_azimuth; ++k) {
      const double psi = 2.0 * std::numbers::pi * k / n_azimuth;
      Vector theta(dim);
      double prod = 1.0;
      for (int j = 0; j < n_angles; ++j) {
        theta(j) = prod * cosines[j];
        prod *= sines[j];
      }
      theta(dim - 2) = prod * std::cos(psi);
      theta(dim - 1) = prod * std::sin(psi);
      const double wgt = jac * 2.0 * std::numbers::pi / n_azimuth;
      nodes.push_back({theta / theta.norm(), wgt});
      total += wgt;
    }
    int j = 0;
    while (j < n_angles && ++idx[j] == n_polar) idx[j++] = 0;
    done = j == n_angles;
  }
  for (auto& nd : nodes) nd.weight *= mass / total;
  return nodes;
}

std::size_t rule_size(int dim, int level) {
  if (dim == 1) return 2;
  if (dim == 2) return std::size_t{8} << level;
  std::size_t n = std::size_t{8} << level;
  for (int j = 0; j < dim - 2; ++j) n *= std::size_t{4} << level;
  return n;
}

}  // namespace

SpectralMeasure SpectralMeasure::discrete(std::vector<Vector> atoms, std::vector<double> weights) {
  if (atoms.empty()) throw AdmissibilityError("SpectralMeasure: no atoms");
  if (atoms.size() != weights.size()) {
    throw std::invalid_argument("SpectralMeasure: atoms and weights differ in length");
  }
  const int dim = static_cast<int>(atoms.front().size());
  if (dim < 1) throw std::invalid_argument("SpectralMeasure: dimension must be >= 1");
  SpectralMeasure s;
  s.dim_ = dim;
  s.kind_ = Kind::discrete;
  double cum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].size() != dim) throw std::invalid_argument("SpectralMeasure: mixed dimensions");
    if (std::abs(atoms[i].norm() - 1.0) > kUnitTolerance) {
      std::ostringstream os;
      os << "SpectralMeasure: atom " << i << " has norm " << atoms[i].norm() << ", expected 1";
      throw AdmissibilityError(os.str());
    }
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      throw AdmissibilityError("SpectralMeasure: weights must be positive and finite");
    }
    cum += weights[i];
    s.cumulative_.push_back(cum);
  }
  s.mass_ = cum;
  s.symmetric_ = detect_symmetry(atoms, weights);
  s.atoms_ = std::move(atoms);
  s.weights_ = std::move(weights);
  return s;
}

SpectralMeasure SpectralMeasure::uniform(int dim, double mass) {
  if (dim < 1) throw std::invalid_argument("SpectralMeasure: dimension must be >= 1");
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw AdmissibilityError("SpectralMeasure: mass must be positive and finite");
  }
  SpectralMeasure s;
  s.dim_ = dim;
  s.kind_ = Kind::uniform;
  s.symmetric_ = true;
  s.mass_ = mass;
  return s;
}

Vector SpectralMeasure::sample_direction(Rng& rng) const {
  if (kind_ == Kind::discrete) {
    if (atoms_.size() == 1) return atoms_.front();
    const double u = rng.uniform() * mass_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto i = std::min<std::size_t>(it - cumulative_.begin(), atoms_.size() - 1);
    return atoms_[i];
  }
  Vector v(dim_);
  double n2 = 0.0;
  do {
    for (int k = 0; k < dim_; ++k) v(k) = rng.normal();
    n2 = v.squaredNorm();
  } while (n2 == 0.0);
  return v / std::sqrt(n2);
}

std::vector<SphereNode> sphere_rule(const SpectralMeasure& sigma, int level) {
  std::vector<SphereNode> nodes;
  if (sigma.kind() == SpectralMeasure::Kind::discrete) {
    for (std::size_t i = 0; i < sigma.atoms().size(); ++i) {
      nodes.push_back({sigma.atoms()[i], sigma.weights()[i]});
    }
    return nodes;
  }
  const int d = sigma.dim();
  const double m = sigma.total_mass();
  if (d == 1) {
    nodes.push_back({Vector::Constant(1, 1.0), 0.5 * m});
    nodes.push_back({Vector::Constant(1, -1.0), 0.5 * m});
    return nodes;
  }
  if (d == 2) {
    const int n = 8 << level;
    for (int k = 0; k < n; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / n;
      Vector t(2);
      t << std::cos(phi), std::sin(phi);
      nodes.push_back({t, m / n});
    }
    return nodes;
  }
  return product_rule(d, m, level);
}

namespace {

SphereIntegral integrate_uniform_2d(const SpectralMeasure& sigma,
                                    const std::function<Estimate(const Vector&)>& g,
                                    double tol) {
  // Nested trapezoid rule: each level adds the odd multiples of the new step.
  const double m = sigma.total_mass();
  std::vector<double> values;
  std::vector<double> errors;
  double sup = 0.0;
  auto eval_at = [&](int k, int n) {
    const double phi = 2.0 * std::numbers::pi * k / n;
    Vector t(2);
    t << std::cos(phi), std::sin(phi);
    Estimate e = g(t);
    sup = std::max(sup, std::abs(e.value));
    values.push_back(e.value);
    errors.push_back(e.error);
  };
  int n = 8;
  for (int k = 0; k < n; ++k) eval_at(k, n);
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  double prev = m * mean(values);
  SphereIntegral out;
  while (true) {
    if (values.size() * 2 > kMaxSphereNodes) {
      out.value = prev;
      out.error = std::numeric_limits<double>::infinity();
      out.converged = false;
      break;
    }
    const int n2 = 2 * n;
    for (int k = 1; k < n2; k += 2) eval_at(k, n2);
    n = n2;
    const double cur = m * mean(values);
    const double diff = std::abs(cur - prev);
    const double target = tol * m * sup;
    if (diff <= target) {
      out.value = cur;
      out.error = diff + m * mean(errors);
      out.converged = true;
      break;
    }
    if (values.size() * 2 > kMaxSphereNodes) {
      out.value = cur;
      out.error = diff + m * mean(errors);
      out.converged = false;
      break;
    }
    prev = cur;
  }
  out.nodes = values.size();
  return out;
}

}  // namespace

SphereIntegral integrate_sphere(const SpectralMeasure& sigma,
                                const std::function<Estimate(const Vector&)>& g, double tol) {
  SphereIntegral out;
  const bool exact = sigma.kind() == SpectralMeasure::Kind::discrete || sigma.dim() == 1;
  if (exact) {
    for (const auto& nd : sphere_rule(sigma, 0)) {
      const Estimate e = g(nd.theta);
      out.value += nd.weight * e.value;
      out.error += nd.weight * e.error;
      ++out.nodes;
    }
    return out;
  }
  if (sigma.dim() == 2) return integrate_uniform_2d(sigma, g, tol);

  const double m = sigma.total_mass();
  double prev = 0.0;
  for (int level = 0;; ++level) {
    if (rule_size(sigma.dim(), level) > kMaxSphereNodes) {
      out.value = prev;
      out.error = std::numeric_limits<double>::infinity();
      out.converged = false;
      return out;
    }
    double sum = 0.0;
    double err = 0.0;
    double sup = 0.0;
    std::size_t count = 0;
    for (const auto& nd : sphere_rule(sigma, level)) {
      const Estimate e = g(nd.theta);
      sum += nd.weight * e.value;
      err += nd.weight * e.error;
      sup = std::max(sup, std::abs(e.value));
      ++count;
    }
    out.nodes += count;
    if (level > 0 && std::abs(sum - prev) <= tol * m * sup) {
      out.value = sum;
      out.error = std::abs(sum - prev) + err;
      return out;
    }
    prev = sum;
  }
}

SphereIntegral integrate_sphere(const SpectralMeasure& sigma,
                                const std::function<double(const Vector&)>& g, double tol) {
  return integrate_sphere(
      sigma, std::function<Estimate(const Vector&)>([&g](const Vector& t) {
        return Estimate{g(t), 0.0};
      }),
      tol);
}

namespace {

// Gauss-Legendre product rule on S^{d-1}, d >= 3, in spherical angles about the
// given basis with every angle range split where a basis coordinate vanishes.
std::vector<SphereNode> split_product_rule(int dim, double mass, const Matrix& basis, int n) {
  std::vector<double> gx;
  std::vector<double> gw;
  gauss_legendre(n, gx, gw);
  // The integrand behaves like |x|^beta at the panel ends. The quintic
  // smoothstep s(t) = t^3 (10 - 15 t + 6 t^2) turns x^beta into t^(3 beta + 2),
  // which Gauss-Legendre resolves quickly.
  std::vector<double> px;
  std::vector<double> pw;
  for (int i = 0; i < n; ++i) {
    const double t = 0.5 * (gx[i] + 1.0);
    px.push_back(t * t * t * (10.0 - 15.0 * t + 6.0 * t * t));
    pw.push_back(0.5 * gw[i] * 30.0 * t * t * (1.0 - t) * (1.0 - t));
  }
  const double pi = std::numbers::pi;
  // Polar angles: two panels [0, pi/2], [pi/2, pi]; azimuth: four quadrants.
  std::vector<double> polar;
  std::vector<double> polar_w;
  for (int half = 0; half < 2; ++half) {
    for (int i = 0; i < n; ++i) {
      polar.push_back(0.5 * pi * (px[i] + half));
      polar_w.push_back(0.5 * pi * pw[i]);
    }
  }
  std::vector<double> az;
  std::vector<double> az_w;
  for (int q = 0; q < 4; ++q) {
    for (int i = 0; i < n; ++i) {
      az.push_back(0.5 * pi * (px[i] + q));
      az_w.push_back(0.5 * pi * pw[i]);
    }
  }
  const int n_angles = dim - 2;
  const auto np = static_cast<int>(polar.size());
  std::vector<int> idx(n_angles, 0);
  std::vector<SphereNode> nodes;
  double total = 0.0;
  bool done = false;
  Vector omega(dim);
  while (!done) {
    double jac = 1.0;
    double prod = 1.0;
    for (int j = 0; j < n_angles; ++j) {
      const double phi = polar[idx[j]];
      omega(j) = prod * std::cos(phi);
      prod *= std::sin(phi);
      jac *= polar_w[idx[j]] * std::pow(std::sin(phi), dim - 2 - j);
    }
    for (std::size_t k = 0; k < az.size(); ++k) {
      omega(dim - 2) = prod * std::cos(az[k]);
      omega(dim - 1) = prod * std::sin(az[k]);
      const double wgt = jac * az_w[k];
      const Vector theta = basis * omega;
      nodes.push_back({theta / theta.norm(), wgt});
      total += wgt;
    }
    int j = 0;
    while (j < n_angles && ++idx[j] == np) idx[j++] = 0;
    done = j == n_angles;
  }
  for (auto& nd : nodes) nd.weight *= mass / total;
  return nodes;
}

}  // namespace

SphereIntegral integrate_sphere_aligned(const SpectralMeasure& sigma, const Matrix& basis,
                                        const std::function<Estimate(const Vector&)>& g,
                                        double tol, int max_panels) {
  const int d = sigma.dim();
  if (sigma.kind() == SpectralMeasure::Kind::discrete || d == 1) {
    return integrate_sphere(sigma, g, tol);
  }
  if (basis.rows() != d || basis.cols() != d) {
    throw std::invalid_argument("integrate_sphere_aligned: basis has wrong shape");
  }
  const double m = sigma.total_mass();
  SphereIntegral out;
  if (d == 2) {
    double inner_rel = 0.0;
    Vector omega(2);
    auto f = [&](double phi) {
      omega << std::cos(phi), std::sin(phi);
      const Estimate e = g(basis * omega);
      if (e.value != 0.0) inner_rel = std::max(inner_rel, e.error / std::abs(e.value));
      ++out.nodes;
      return e.value;
    };
    const double pi = std::numbers::pi;
    const std::array<double, 5> breaks{0.0, 0.5 * pi, pi, 1.5 * pi, 2.0 * pi};
    auto res = quad::integrate(f, std::span<const double>(breaks), 0.0, tol, max_panels);
    const double scale = m / (2.0 * pi);
    out.value = scale * res.value;
    out.error = scale * res.error + inner_rel * std::abs(out.value);
    out.converged = res.converged;
    return out;
  }
  double prev = 0.0;
  for (int n = 2;; n *= 2) {
    const auto nodes = split_product_rule(d, m, basis, n);
    if (nodes.size() > kMaxSphereNodes) {
      out.value = prev;
      out.error = std::numeric_limits<double>::infinity();
      out.converged = false;
      return out;
    }
    double sum = 0.0;
    double err = 0.0;
    for (const auto& nd : nodes) {
      const Estimate e = g(nd.theta);
      sum += nd.weight * e.value;
      err += nd.weight * e.error;
    }
    out.nodes += nodes.size();
    if (n > 2 && std::abs(sum - prev) <= tol * std::abs(sum)) {
      out.value = sum;
      out.error = std::abs(sum - prev) + err;
      return out;
    }
    prev = sum;
  }
}

SpectralMeasure symmetrize(const SpectralMeasure& sigma) {
  if (sigma.kind() == SpectralMeasure::Kind::uniform) return sigma;
  std::vector<Vector> atoms;
  std::vector<double> weights;
  auto add = [&](const Vector& t, double w) {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if ((atoms[i] - t).cwiseAbs().maxCoeff() <= kMatchTolerance) {
        weights[i] += w;
        return;
      }
    }
    atoms.push_back(t);
    weights.push_back(w);
  };
  for (std::size_t i = 0; i < sigma.atoms().size(); ++i) {
    add(sigma.atoms()[i], 0.5 * sigma.weights()[i]);
    add(-sigma.atoms()[i], 0.5 * sigma.weights()[i]);
  }
  return SpectralMeasure::discrete(std::move(atoms), std::move(weights));
}

}  // namespace osl
