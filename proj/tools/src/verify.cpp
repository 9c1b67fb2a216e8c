#include "verify.hpp"

#include "oslsim/generators.hpp"
#include "oslsim/path_stats.hpp"
#include "oslsim/polar.hpp"
#include "oslsim/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>

namespace osl::cli {
namespace {

using std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Outcome {
  bool passed = false;
  std::string detail;
  bool skipped = false;
};

using Check = std::function<Outcome(const VerifyContext&)>;

struct Entry {
  const char* name;
  Check check;
};

int pick(const VerifyContext& c, int quick, int desk) {
  return c.scale == Scale::quick ? quick : desk;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// d = 1, E = Id, unit atoms at +-1: q(xi) = pi |xi|.
OslModel cauchy_model() {
  return OslModel(make_constant(SymMatrix::identity(1)),
                  SpectralMeasure::discrete({v1(1), v1(-1)}, {1, 1}));
}

OslModel stable_like_model() {
  return OslModel(make_stable_like(2, sin_alpha(1.2, 0.3)), SpectralMeasure::uniform(2, 1.0));
}

// Exponents near 1/2 keep the oscillation count of generator integrands small.
OslModel low_exponent_model() {
  return OslModel(
      make_interpolated(SymMatrix::scaled_identity(2, 0.6), SymMatrix::diagonal(v2(0.7, 0.55)),
                        sin_blend(1, 1.5)),
      SpectralMeasure::discrete({v2(1, 0), v2(-1, 0), v2(0.8, -0.6), v2(-0.8, 0.6)},
                                {1.0, 1.0, 0.7, 0.7}));
}

OslModel interpolated_model() {
  return OslModel(
      make_interpolated(SymMatrix::scaled_identity(2, 0.8), SymMatrix::diagonal(v2(1.2, 0.6)),
                        sin_blend(0, 1.0)),
      SpectralMeasure::discrete({v2(1, 0), v2(-1, 0), v2(0.6, 0.8), v2(-0.6, -0.8)},
                                {1.0, 1.0, 0.5, 0.5}));
}

OslModel model_or(const VerifyContext& c, const OslModel& fallback) {
  return c.model ? *c.model : fallback;
}

// A symmetric model for symbol and path checks: the configured one when symmetric.
OslModel symmetric_model(const VerifyContext& c) {
  if (c.model && c.model->symmetric()) return *c.model;
  return interpolated_model();
}

Box box_for(const VerifyContext& c, int dim) {
  if (c.box && c.box->lo.size() == dim) return *c.box;
  return {Vector::Constant(dim, -pi), Vector::Constant(dim, pi)};
}

Vector point_in(Rng& rng, const Box& b) {
  Vector x(b.lo.size());
  for (int i = 0; i < x.size(); ++i) x(i) = b.lo(i) + (b.hi(i) - b.lo(i)) * rng.uniform();
  return x;
}

// ----- matexp -----

Outcome group_law(const VerifyContext& c) {
  Rng rng(c.seed + 1);
  const int n = pick(c, 200, 1000);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const int d = 1 + i % 5;
    const SymMatrix e = gen::random_sym(rng, d, 0.55, 3.0);
    const double r = gen::log_uniform(rng, 1e-3, 1e3);
    const double s = gen::log_uniform(rng, 1e-3, 1e3);
    const Matrix ar = mat_pow(e, r).matrix(), as = mat_pow(e, s).matrix();
    const Matrix ars = mat_pow(e, r * s).matrix();
    // Products carry rounding of order eps ||A(r)|| ||A(s)||.
    const double tol = 1e-10 * spectral_norm(ars) + 8 * d * kEps * spectral_norm(ar) * spectral_norm(as);
    worst = std::max(worst, spectral_norm(ar * as - ars) / tol);
  }
  return {worst <= 1.0, "max error / tolerance " + fmt(worst)};
}

Outcome inverse_law(const VerifyContext& c) {
  Rng rng(c.seed + 2);
  const int n = pick(c, 200, 1000);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const int d = 1 + i % 5;
    const SymMatrix e = gen::random_sym(rng, d, 0.55, 3.0);
    const double r = gen::log_uniform(rng, 1e-6, 1e6);
    const Matrix a = mat_pow(e, r).matrix(), b = mat_pow(e, 1 / r).matrix();
    const double tol = 1e-10 + 8 * d * kEps * spectral_norm(a) * spectral_norm(b);
    worst = std::max(worst, spectral_norm(a * b - Matrix::Identity(d, d)) / tol);
  }
  return {worst <= 1.0, "max error / tolerance " + fmt(worst)};
}

Outcome norm_identity(const VerifyContext& c) {
  Rng rng(c.seed + 3);
  const int n = pick(c, 200, 1000);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const SymMatrix e = gen::random_sym(rng, 1 + i % 5, 0.55, 3.0);
    const double r = gen::log_uniform(rng, 1e-6, 1.0);
    const NormCheck nc = power_norm_check(e, r);
    worst = std::max(worst, std::abs(nc.measured - nc.bound) / nc.bound);
  }
  return {worst <= 1e-10, "max relative error " + fmt(worst)};
}

Outcome van_loan(const VerifyContext& c) {
  Rng rng(c.seed + 4);
  const int n = pick(c, 20, 100);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const int d = 2 + i % 3;
    const SymMatrix a = gen::random_entries(rng, d, 2.0);
    const SymMatrix b = gen::random_entries(rng, d, 2.0);
    worst = std::max(worst, van_loan_residual(a, b, 0.1 + 1.9 * rng.uniform(), 1e-8));
  }
  return {worst <= 1e-7, "max residual " + fmt(worst)};
}

// ----- exponent_field (admissibility) -----

Outcome admissibility(const VerifyContext& c, const std::string& tag) {
  std::vector<OslModel> models;
  if (c.model) {
    models.push_back(*c.model);
  } else {
    models = {stable_like_model(), interpolated_model(),
              OslModel(make_constant(SymMatrix::diagonal(v2(1, 2))), SpectralMeasure::uniform(2, 1))};
  }
  std::string found;
  for (const auto& m : models) {
    const int d = m.dim();
    const int grid = std::max(2, static_cast<int>(std::pow(pick(c, 400, 4000), 1.0 / d)));
    const auto rep = validate_admissible(m.field(), box_for(c, d), grid, pick(c, 500, 5000), c.seed);
    for (const auto& v : rep.violations) {
      if (v.find(tag) != std::string::npos) found += (found.empty() ? "" : "; ") + v;
    }
  }
  return {found.empty(), found.empty() ? "no violation" : found};
}

// ----- spectral_measure -----

Outcome sampling_frequencies(const VerifyContext& c) {
  const OslModel m = model_or(c, interpolated_model());
  const SpectralMeasure& s = m.sigma();
  Rng rng(c.seed + 5);
  const int n = pick(c, 20000, 200000);
  const int d = s.dim();
  Vector mean = Vector::Zero(d);
  Vector second = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    const Vector t = s.sample_direction(rng);
    mean += t / n;
    second += t.cwiseProduct(t) / n;
  }
  // Reference moments under sigma / mass.
  Vector m_ref = Vector::Zero(d), s_ref = Vector::Constant(d, 1.0 / d);
  if (s.kind() == SpectralMeasure::Kind::discrete) {
    s_ref.setZero();
    for (std::size_t k = 0; k < s.atoms().size(); ++k) {
      const double w = s.weights()[k] / s.total_mass();
      m_ref += w * s.atoms()[k];
      s_ref += w * s.atoms()[k].cwiseProduct(s.atoms()[k]);
    }
  }
  const double z = std::max((mean - m_ref).cwiseAbs().maxCoeff(),
                            (second - s_ref).cwiseAbs().maxCoeff()) * std::sqrt(double(n));
  return {z <= 5.0, "max moment deviation " + fmt(z) + " / sqrt(n)"};
}

Outcome odd_integrand(const VerifyContext& c) {
  const SpectralMeasure s = symmetrize(model_or(c, interpolated_model()).sigma());
  Rng rng(c.seed + 6);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Vector a = gen::random_unit(rng, s.dim());
    const auto r = integrate_sphere(s, [&](const Vector& t) { return std::sinh(2 * a.dot(t)); }, 1e-9);
    worst = std::max(worst, std::abs(r.value) / (s.total_mass() * std::sinh(2.0)));
  }
  return {worst <= 1e-9, "max |integral| / (mass sup) " + fmt(worst)};
}

// ----- polar -----

Outcome polar_round_trip(const VerifyContext& c) {
  Rng rng(c.seed + 7);
  const int n = pick(c, 2000, 10000);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const int d = 1 + i % 5;
    const SymMatrix e = gen::random_sym(rng, d, 0.55, 3.0);
    const Vector xi = gen::log_uniform(rng, 1e-6, 1e6) * gen::random_unit(rng, d);
    const auto p = polar_decompose(e, xi);
    const Matrix power = mat_pow(e, p.tau).matrix();
    // Rounding in ell is amplified by ||tau^E||.
    const double tol = 1e-9 * (1 + xi.norm()) + 8 * d * kEps * spectral_norm(power);
    worst = std::max(worst, (power * p.ell - xi).norm() / tol);
  }
  return {worst <= 1.0, "max error / tolerance " + fmt(worst)};
}

Outcome polar_scaling(const VerifyContext& c) {
  Rng rng(c.seed + 8);
  const int n = pick(c, 1000, 10000);
  int bad = 0;
  for (int i = 0; i < n; ++i) {
    const int d = 1 + i % 5;
    const SymMatrix e = gen::random_sym(rng, d, 0.55, 3.0);
    const Vector xi = gen::log_uniform(rng, 1e-3, 1e3) * gen::random_unit(rng, d);
    bad += !polar_properties_check(e, xi, gen::log_uniform(rng, 1e-3, 1e3)).ok();
  }
  return {bad == 0, std::to_string(bad) + " of " + std::to_string(n) + " cases outside 1e-8"};
}

// ----- symbol -----

Outcome cauchy_oracle(const VerifyContext& c) {
  const OslModel m = cauchy_model();
  const int n = pick(c, 13, 61);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double xi = std::pow(10.0, -3.0 + 6.0 * i / (n - 1));
    const double q = symbol_symmetric(m, v1(0), v1(xi)).value;
    worst = std::max(worst, std::abs(q - pi * xi) / (pi * xi));
  }
  return {worst <= 3e-8, "max relative error " + fmt(worst)};
}

Outcome stable_like_ratio(const VerifyContext& c) {
  const OslModel m = stable_like_model();
  Rng rng(c.seed + 9);
  double spread = 0.0;
  for (int k = 0; k < pick(c, 2, 5); ++k) {
    const Vector x = point_in(rng, box_for(c, 2));
    const double alpha = 1.2 + 0.3 * std::sin(x(0));
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Vector xi = gen::random_unit(rng, 2) * gen::log_uniform(rng, 1e-2, 1e2);
      const double r = symbol_symmetric(m, x, xi).value / std::pow(xi.norm(), alpha);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    spread = std::max(spread, (hi - lo) / lo);
  }
  return {spread <= 1e-4, "max relative spread " + fmt(spread)};
}

Outcome symbol_scaling(const VerifyContext& c) {
  const OslModel m = symmetric_model(c);
  Rng rng(c.seed + 10);
  const QuadSpec q;
  const int n = pick(c, 20, 100);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector x = point_in(rng, box_for(c, m.dim()));
    const Vector xi = gen::random_unit(rng, m.dim()) * gen::log_uniform(rng, 0.1, 10);
    worst = std::max(worst, scaling_residual(m, x, xi, gen::log_uniform(rng, 0.1, 10), q));
  }
  return {worst <= 10 * q.rel_tol, "max residual " + fmt(worst)};
}

Outcome symbol_even_nonneg(const VerifyContext& c) {
  const OslModel m = symmetric_model(c);
  Rng rng(c.seed + 11);
  const QuadSpec q;
  double worst_even = 0.0, lowest = 0.0;
  for (int i = 0; i < pick(c, 20, 100); ++i) {
    const Vector x = point_in(rng, box_for(c, m.dim()));
    const Vector xi = gen::random_unit(rng, m.dim()) * gen::log_uniform(rng, 1e-2, 1e2);
    const double a = symbol_symmetric(m, x, xi, q).value;
    const double b = symbol_symmetric(m, x, Vector(-xi), q).value;
    worst_even = std::max(worst_even, std::abs(a - b) / a);
    lowest = std::min({lowest, a, b});
  }
  return {worst_even <= 10 * q.rel_tol && lowest >= -10 * q.rel_tol,
          "max evenness defect " + fmt(worst_even) + ", min q " + fmt(lowest)};
}

Outcome generator_duality(const VerifyContext& c) {
  const OslModel m = low_exponent_model();
  // The cosine tail beyond R_max is only bounded by mass / R_max, so R_max sits well past 1e7.
  const QuadSpec q{.rel_tol = 1e-8, .R_max = 1e8, .max_subdivisions = 200000};
  Rng rng(c.seed + 12);
  double worst = 0.0;
  for (int i = 0; i < pick(c, 5, 50); ++i) {
    const Vector x = gen::random_unit(rng, 2) * 2.0;
    const Vector xi = gen::random_unit(rng, 2) * gen::log_uniform(rng, 0.3, 3);
    TestFunction u;
    u.value = [=](const Vector& y) { return std::cos(xi.dot(y - x)); };
    u.gradient = [=](const Vector& y) { return Vector(-std::sin(xi.dot(y - x)) * xi); };
    u.hessian = [=](const Vector& y) {
      return Matrix(-std::cos(xi.dot(y - x)) * xi * xi.transpose());
    };
    u.hessian_norm_bound = xi.squaredNorm();
    const double sym = symbol_symmetric(m, x, xi, q).value;
    worst = std::max(worst, std::abs(apply_generator(m, u, x, q).value + sym) / sym);
  }
  return {worst <= 10 * 1e-8, "max relative deviation " + fmt(worst)};
}

// ----- simulator -----

Outcome replay(const VerifyContext& c) {
  const OslModel m = model_or(c, interpolated_model());
  const SimConfig cfg{.horizon = 1.0, .eps = 1e-2, .seed = c.seed};
  const auto res = map_paths(
      m, Vector::Zero(m.dim()), cfg, static_cast<std::size_t>(pick(c, 50, 500)),
      [&](const PathSample& p) { return replay_residual(p, m); }, c.threads);
  const double worst = *std::max_element(res.begin(), res.end());
  return {worst <= 1e-10, "max replay residual " + fmt(worst)};
}

Outcome event_count(const VerifyContext& c) {
  const SimConfig cfg{.horizon = 1.0, .eps = 1e-2, .seed = c.seed + 13};
  const int n = pick(c, 2000, 10000);
  const auto counts = map_paths(
      cauchy_model(), v1(0), cfg, static_cast<std::size_t>(n),
      [](const PathSample& p) { return static_cast<double>(p.size()); }, c.threads);
  const double mean = pairwise_sum(counts) / n;
  const double z = std::abs(mean - 200.0) / (std::sqrt(200.0) / std::sqrt(double(n)));
  return {z <= 3.0, "mean count " + fmt(mean) + " (z = " + fmt(z) + ")"};
}

Outcome levy_cf(const VerifyContext& c) {
  const OslModel m = cauchy_model();
  const double T = 0.5, eps = 1e-3;
  const int n = pick(c, 20000, 200000);
  const SimConfig cfg{.horizon = T, .eps = eps, .seed = c.seed + 14};
  const auto xs = map_paths(
      m, v1(0), cfg, static_cast<std::size_t>(n),
      [](const PathSample& p) { return Vector(p.final_state()); }, c.threads);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double tq = 0.1 * std::pow(30.0, k / 9.0);
    const double xi = tq / (T * pi);
    const CfEstimate cf = empirical_cf(xs, v1(xi));
    const double budget = 0.5 * xi * xi * T * truncation_error_bound(m, eps);
    worst = std::max(worst, std::abs(cf.re - std::exp(-tq)) / (4 * cf.stderr_re + budget));
  }
  return {worst <= 1.0, "max deviation / (4 se + budget) " + fmt(worst)};
}

Outcome symmetric_cf(const VerifyContext& c) {
  const OslModel m = symmetric_model(c);
  const SimConfig cfg{.horizon = 1.0, .eps = 1e-2, .seed = c.seed + 15};
  const int n = pick(c, 2000, 10000);
  const auto cf = map_paths(
      m, Vector::Zero(m.dim()), cfg, static_cast<std::size_t>(n),
      [](const PathSample& p) { return Vector(p.final_state() - p.x0); }, c.threads);
  // The imaginary part of the empirical characteristic function tests symmetry
  // without requiring finite moments.
  Rng rng(c.seed + 16);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Vector xi = gen::random_unit(rng, m.dim()) * gen::log_uniform(rng, 0.2, 2);
    const CfEstimate e = empirical_cf(cf, xi);
    worst = std::max(worst, std::abs(e.im) / (e.stderr_im + 1e-300));
  }
  return {worst <= 4.0, "max |Im| / se " + fmt(worst)};
}

// ----- path_stats -----

Outcome exit_max_duality(const VerifyContext& c) {
  const OslModel m = symmetric_model(c);
  const SimConfig cfg{.horizon = 1.0, .eps = 1e-2, .seed = c.seed + 17};
  const auto ok = map_paths(
      m, Vector::Zero(m.dim()), cfg, static_cast<std::size_t>(pick(c, 200, 2000)),
      [](const PathSample& p) {
        for (double R : {0.05, 0.2, 1.0, 5.0}) {
          const ExitTime e = first_exit_time(p, R);
          for (double t : {0.01, 0.1, 0.5, 1.0}) {
            const double mx = max_process(p, t);
            if (!e.censored && e.time <= t && !(mx >= R)) return 0;
            if (mx > R && (e.censored || e.time > t)) return 0;
          }
        }
        return 1;
      },
      c.threads);
  const int bad = static_cast<int>(ok.size()) - std::accumulate(ok.begin(), ok.end(), 0);
  return {bad == 0, std::to_string(bad) + " paths violate the inclusion"};
}

// Running maxima at t for the alpha = 1 reference model.
std::vector<double> cauchy_maxima(const VerifyContext& c, std::uint64_t seed, int n, double t) {
  const SimConfig cfg{.horizon = t, .eps = 1e-3, .seed = seed};
  return map_paths(
      cauchy_model(), v1(0), cfg, static_cast<std::size_t>(n),
      [t](const PathSample& p) { return max_process(p, t); }, c.threads);
}

const std::vector<double> kTailGrid{0.2, 0.3, 0.5, 0.7, 1.0, 1.4, 2.0};

Outcome tail_slope(const VerifyContext& c) {
  const int n = pick(c, 20000, 100000);
  const double t = 0.01;
  const auto fit = tail_report(cauchy_maxima(c, c.seed + 18, n, t), t, kTailGrid, -1.0);
  const auto test = tail_report(cauchy_maxima(c, c.seed + 19, n, t), t, kTailGrid, -1.0);
  const double C = fit_tail_constant(fit, 1.0);
  const bool slope_ok = std::abs(fit.fitted_slope + 1.0) <= 0.2;
  const bool bound_ok = tail_bound_holds(test, C, 1.0);
  return {slope_ok && bound_ok,
          "slope " + fmt(fit.fitted_slope) + ", split-sample bound " + (bound_ok ? "holds" : "fails")};
}

Outcome moment_threshold(const VerifyContext& c) {
  const int n = pick(c, 20000, 100000);
  const auto maxima = cauchy_maxima(c, c.seed + 18, n, 0.01);
  const auto low = empirical_moment(maxima, 0.5, 200, c.seed);
  const auto half = empirical_moment(std::span<const double>(maxima).first(maxima.size() / 2), 0.5, 200,
                                     c.seed);
  const auto high = empirical_moment(maxima, 1.5, 200, c.seed);
  const bool doubling_ok =
      std::abs(low.estimate - half.estimate) <= low.ci_half_width + half.ci_half_width;
  return {low.stable && doubling_ok && !high.stable,
          "p=0.5 estimate " + fmt(low.estimate) + " +- " + fmt(low.ci_half_width) +
              " (half sample " + fmt(half.estimate) + "), p=1.5 top share " + fmt(high.top_share)};
}

Outcome p_variation(const VerifyContext& c) {
  const OslModel m = cauchy_model();
  const SimConfig cfg{.horizon = 1.0, .eps = 1e-4, .seed = c.seed + 20};
  const int n = pick(c, 40, 200);
  const std::vector<double> eps{1e-2, 1e-3, 1e-4};
  const auto sums = map_paths(
      m, v1(0), cfg, static_cast<std::size_t>(n),
      [&](const PathSample& p) {
        std::vector<double> s;
        for (double e : eps) {
          const PathSample q = coarsen_path(p, m, e);
          s.push_back(p_variation_jump_sum(q, 1.3));
          s.push_back(p_variation_jump_sum(q, 0.7));
        }
        return s;
      },
      c.threads);
  std::vector<double> mean(6, 0.0);
  for (const auto& s : sums)
    for (std::size_t k = 0; k < 6; ++k) mean[k] += s[k] / n;
  const double change = std::abs(mean[4] - mean[2]) / mean[2];
  // Sum of r^0.7 over the r^{-2} intensity scales like eps^{-0.3}.
  const double g1 = mean[3] / mean[1], g2 = mean[5] / mean[3];
  const double ref = std::pow(10.0, 0.3);
  const bool grow_ok = std::abs(g1 / ref - 1) <= 0.05 && std::abs(g2 / ref - 1) <= 0.05;
  return {change < 0.1 && grow_ok, "p=1.3 last change " + fmt(change) + ", p=0.7 decade ratios " +
                                       fmt(g1) + ", " + fmt(g2) + " (reference " + fmt(ref) + ")"};
}

Outcome exit_scaling(const VerifyContext& c) {
  const int n = pick(c, 4000, 20000);
  std::vector<double> lx, ly, w;
  bool censored = false;
  for (double R : {0.25, 0.5, 1.0}) {
    const SimConfig cfg{.horizon = 20.0, .eps = 1e-3, .seed = c.seed + 21, .stop_radius = R};
    const auto exits = map_paths(
        cauchy_model(), v1(0), cfg, static_cast<std::size_t>(n),
        [R](const PathSample& p) { return first_exit_time(p, R); }, c.threads);
    const auto rep = exit_time_moment_check(exits, R, 1.0, 1.0);
    censored = censored || rep.heavy_censoring;
    lx.push_back(std::log(R));
    ly.push_back(std::log(rep.mean));
    w.push_back(1.0);
  }
  const double slope = weighted_line_fit(lx, ly, w).slope;
  return {!censored && std::abs(slope - 1.0) <= 0.25, "log-log slope " + fmt(slope)};
}

Outcome growth(const VerifyContext& c) {
  const std::vector<double> t{1e-1, 1e-2, 1e-3};
  const SimConfig cfg{.horizon = 0.1, .eps = 1e-5, .seed = c.seed + 22};
  const auto per_path = map_paths(
      cauchy_model(), v1(0), cfg, static_cast<std::size_t>(pick(c, 300, 2000)),
      [&](const PathSample& p) {
        std::vector<double> m;
        for (double s : t) m.push_back(max_process(p, s));
        return m;
      },
      c.threads);
  std::vector<std::vector<double>> maxima(t.size());
  for (const auto& m : per_path)
    for (std::size_t j = 0; j < t.size(); ++j) maxima[j].push_back(m[j]);
  const auto above = growth_exponent_check(t, maxima, 2.0, true);
  const auto below = growth_exponent_check(t, maxima, 0.5, true);
  const bool ok = above.verdict == Trend::decreasing &&
                  above.median_ratio.back() <= 0.2 * above.median_ratio.front() &&
                  below.verdict == Trend::increasing &&
                  below.median_ratio.back() >= 5 * below.median_ratio.front();
  return {ok, std::string("gamma=2 ") + to_string(above.verdict) + ", gamma=0.5 " +
                  to_string(below.verdict)};
}

// ----- indices -----

Outcome index_closed_forms(const VerifyContext&) {
  std::string bad;
  auto expect = [&](const char* what, double got, double want) {
    if (std::abs(got - want) > 1e-12 * std::max(1.0, std::abs(want))) {
      bad += std::string(what) + " = " + fmt(got) + " (want " + fmt(want) + "); ";
    }
  };
  const OslModel c(make_constant(SymMatrix::diagonal(v2(1, 2))), SpectralMeasure::uniform(2, 1));
  const auto ic = bg_indices_infinity(c, v2(0.3, -1));
  expect("constant beta", ic.beta, 1.0);
  expect("constant delta", ic.delta, 0.5);
  expect("constant zero", bg_indices_zero(c, {Vector::Constant(2, -1), Vector::Constant(2, 1)}, 5).value,
         0.5);

  const OslModel s(make_stable_like(1, sin_alpha(1.2, 0.3)),
                   SpectralMeasure::discrete({v1(1), v1(-1)}, {1, 1}));
  const auto is = bg_indices_infinity(s, v1(0.7));
  expect("stable-like beta", is.beta, 1.2 + 0.3 * std::sin(0.7));
  expect("stable-like zero", bg_indices_zero(s, {v1(-pi), v1(pi)}, 41).value, 0.9);

  const OslModel i = interpolated_model();
  const Vector x = v2(0.4, 0.2);
  const double b = 0.5 * (1 + std::sin(0.4));
  expect("interpolated beta", bg_indices_infinity(i, x).beta, 1 / (0.8 - 0.2 * b));
  expect("interpolated delta", bg_indices_infinity(i, x).delta, 1 / (0.8 + 0.4 * b));
  // the blend reaches 1 at x0 = pi / 2, where Lambda = 1.2
  const Box box{v2(pi / 2 - 1, -1), v2(pi / 2 + 1, 1)};
  expect("interpolated zero", bg_indices_zero(i, box, 21).value, 1 / 1.2);
  return {bad.empty(), bad.empty() ? "all hand values matched" : bad};
}

const std::vector<std::pair<std::string, std::vector<Entry>>>& registry() {
  static const std::vector<std::pair<std::string, std::vector<Entry>>> r = {
      {"matexp",
       {{"group_law", group_law},
        {"inverse_law", inverse_law},
        {"norm_identity", norm_identity},
        {"van_loan", van_loan}}},
      {"exponent_field",
       {{"admissibility.E1", [](const VerifyContext& c) { return admissibility(c, "(E1)"); }},
        {"admissibility.E2", [](const VerifyContext& c) { return admissibility(c, "(E2)"); }},
        {"admissibility.E3", [](const VerifyContext& c) { return admissibility(c, "(E3)"); }},
        {"admissibility.E4", [](const VerifyContext& c) { return admissibility(c, "(E4)"); }}}},
      {"spectral_measure",
       {{"sampling_moments", sampling_frequencies}, {"odd_integrand", odd_integrand}}},
      {"polar", {{"round_trip", polar_round_trip}, {"scaling_reflection", polar_scaling}}},
      {"symbol",
       {{"cauchy_oracle", cauchy_oracle},
        {"stable_like_ratio", stable_like_ratio},
        {"scaling", symbol_scaling},
        {"even_nonnegative", symbol_even_nonneg},
        {"generator_duality", generator_duality}}},
      {"indices", {{"closed_forms", index_closed_forms}}},
      {"simulator",
       {{"replay", replay},
        {"event_count", event_count},
        {"symmetric_cf", symmetric_cf},
        {"levy_cf", levy_cf}}},
      {"path_stats",
       {{"exit_max_duality", exit_max_duality},
        {"tail_slope", tail_slope},
        {"moment_threshold", moment_threshold},
        {"p_variation", p_variation},
        {"exit_time_scaling", exit_scaling},
        {"growth_exponent", growth}}},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [suite, items] : registry()) n.push_back(suite);
    return n;
  }();
  return names;
}

std::vector<VerifyItem> run_verify(const std::vector<std::string>& suites,
                                   const VerifyContext& ctx) {
  std::vector<VerifyItem> out;
  for (const auto& wanted : suites) {
    for (const auto& [suite, items] : registry()) {
      if (suite != wanted) continue;
      for (const auto& entry : items) {
        VerifyItem item;
        item.suite = suite;
        item.name = entry.name;
        const auto start = std::chrono::steady_clock::now();
        try {
          const Outcome o = entry.check(ctx);
          item.passed = o.passed;
          item.skipped = o.skipped;
          item.detail = o.detail;
        } catch (const std::exception& e) {
          item.passed = false;
          item.detail = std::string("exception: ") + e.what();
        }
        item.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (ctx.log) {
          *ctx.log << (item.passed ? "PASS " : "FAIL ") << suite << "." << item.name << " ("
                   << fmt(item.seconds) << " s): " << item.detail << "\n";
        }
        out.push_back(std::move(item));
      }
    }
  }
  return out;
}

nlohmann::json to_json(const VerifyItem& item) {
  return {{"suite", item.suite},   {"item", item.name},         {"passed", item.passed},
          {"skipped", item.skipped}, {"detail", item.detail}, {"seconds", item.seconds}};
}

}  // namespace osl::cli
