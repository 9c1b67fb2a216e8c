#include "oslsim/simulator.hpp"

#include "oslsim/path_stats.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace osl {
namespace {

using std::numbers::pi;

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

OslModel cauchy_1d(double w = 1.0) {
  return OslModel(make_constant(SymMatrix::identity(1)),
                  SpectralMeasure::discrete({v1(1), v1(-1)}, {w, w}));
}

OslModel interpolated_2d() {
  return OslModel(
      make_interpolated(SymMatrix::scaled_identity(2, 0.8), SymMatrix::diagonal(v2(1.2, 0.6)),
                        sin_blend(0, 1.0)),
      SpectralMeasure::discrete({v2(1, 0), v2(-1, 0), v2(0.6, 0.8), v2(-0.6, -0.8)},
                                {1.0, 1.0, 0.5, 0.5}));
}

OslModel skewed_2d() {
  return OslModel(make_stable_like(2, sin_alpha(1.2, 0.3)),
                  SpectralMeasure::discrete({v2(1, 0), v2(0, 1)}, {1.0, 0.5}));
}

bool same_path(const PathSample& a, const PathSample& b) {
  return a.times == b.times && a.states == b.states && a.radii == b.radii &&
         a.thetas == b.thetas && a.drifts == b.drifts && a.seed_used == b.seed_used;
}

TEST(SimConfig, Validation) {
  EXPECT_THROW((SimConfig{.horizon = 0.0}).validate(), std::invalid_argument);
  EXPECT_THROW((SimConfig{.eps = 1.0}).validate(), std::invalid_argument);
  EXPECT_THROW((SimConfig{.eps = 0.0}).validate(), std::invalid_argument);
  EXPECT_THROW((SimConfig{.record_mode = RecordMode::grid}).validate(), std::invalid_argument);
  EXPECT_THROW((SimConfig{.stop_radius = -1.0}).validate(), std::invalid_argument);
  EXPECT_NO_THROW((SimConfig{}).validate());
}

TEST(TruncationBound, HandValues) {
  EXPECT_DOUBLE_EQ(truncation_error_bound(cauchy_1d(), 1e-4), 2e-4);
  const OslModel m(make_constant(SymMatrix::scaled_identity(2, 0.75)),
                   SpectralMeasure::uniform(2, 1.0));
  EXPECT_DOUBLE_EQ(truncation_error_bound(m, 1.0), 2.0);
  EXPECT_NEAR(truncation_error_bound(m, 1e-2), 0.2, 1e-15);
  // eps^{2a-1} halves when eps is divided by 4 at a = 3/4
  EXPECT_NEAR(truncation_error_bound(m, 0.25e-2), 0.1, 1e-15);
}

TEST(TruncationBoundProperty, DominatesExactSecondMoment) {
  // For constant E the discarded second moment is sum_i z_i^2 eps^{2l_i-1}/(2l_i-1).
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 4;
    const SymMatrix e = testing::random_sym(rng, d, 0.55, 3.0);
    std::vector<Vector> atoms;
    std::vector<double> w;
    for (int k = 0; k < 3; ++k) {
      atoms.push_back(testing::random_unit(rng, d));
      w.push_back(0.2 + rng.uniform());
    }
    const OslModel m(make_constant(e), SpectralMeasure::discrete(atoms, w));
    const double eps = testing::log_uniform(rng, 1e-6, 0.5);
    const EigenData eig = eigen_decompose(e);
    double exact = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const Vector z = eig.vectors.transpose() * atoms[k];
      for (int i = 0; i < d; ++i) {
        const double s = 2 * eig.values(i) - 1;
        exact += w[k] * z(i) * z(i) * std::pow(eps, s) / s;
      }
    }
    EXPECT_LE(exact, truncation_error_bound(m, eps) * (1 + 1e-12)) << trial;
  }
}

TEST(CompensatorDrift, HandValues) {
  const OslModel one(make_constant(SymMatrix::identity(1)),
                     SpectralMeasure::discrete({v1(1)}, {1}));
  EXPECT_NEAR(compensator_drift(one, v1(0), 1e-3)(0), std::log(1e-3), 1e-14);
  const OslModel low(make_constant(SymMatrix::scaled_identity(1, 0.8)),
                     SpectralMeasure::discrete({v1(1)}, {2}));
  // int_eps^1 r^{-1.2} dr = (eps^{-0.2} - 1) / 0.2
  const double w = (std::pow(1e-3, -0.2) - 1) / 0.2;
  EXPECT_NEAR(compensator_drift(low, v1(5), 1e-3)(0), -2 * w, 1e-12);
  EXPECT_EQ(compensator_drift(cauchy_1d(), v1(0), 1e-3)(0), 0.0);
}

TEST(DriftMode, Resolution) {
  std::string warning;
  EXPECT_EQ(resolve_drift_mode(cauchy_1d(), DriftMode::automatic, &warning),
            DriftMode::force_zero);
  EXPECT_TRUE(warning.empty());
  EXPECT_EQ(resolve_drift_mode(skewed_2d(), DriftMode::automatic, &warning),
            DriftMode::force_numeric);
  EXPECT_FALSE(warning.empty());
  EXPECT_EQ(resolve_drift_mode(skewed_2d(), DriftMode::force_zero), DriftMode::force_zero);
}

TEST(SimulatePath, Invariants) {
  const OslModel m = interpolated_2d();
  const SimConfig c{.horizon = 2.0, .eps = 1e-2, .seed = 3};
  for (std::uint64_t i = 0; i < 20; ++i) {
    const PathSample p = simulate_indexed_path(m, v2(0.3, -0.2), c, i);
    EXPECT_EQ(p.eps_used, 1e-2);
    EXPECT_EQ(p.seed_used, derive_seed(3, i));
    EXPECT_FALSE(p.has_drift());
    for (std::size_t k = 0; k < p.size(); ++k) {
      ASSERT_GT(p.radii[k], c.eps);
      ASSERT_LE(p.times[k], c.horizon);
      if (k > 0) ASSERT_GT(p.times[k], p.times[k - 1]);
    }
    EXPECT_LE(replay_residual(p, m), 1e-10);
  }
}

TEST(SimulatePath, EventCountIsPoisson) {
  // sigma-mass 2, eps 0.01, T = 1: Poisson(200)
  const SimConfig c{.horizon = 1.0, .eps = 1e-2, .seed = 11};
  const int n = 10000;
  const auto counts = map_paths(cauchy_1d(), v1(0), c, n,
                                [](const PathSample& p) { return double(p.size()); });
  double mean = 0.0, var = 0.0;
  for (double k : counts) mean += k / n;
  for (double k : counts) var += (k - mean) * (k - mean) / (n - 1);
  EXPECT_NEAR(mean, 200.0, 3 * std::sqrt(200.0) / 100);
  EXPECT_NEAR(var / 200.0, 1.0, 0.05);
}

TEST(SimulatePath, RadialMarksArePareto) {
  Rng rng(4);
  const SimConfig c{.horizon = 50.0, .eps = 1e-2};
  const PathSample p = simulate_path(cauchy_1d(), v1(0), c, rng, 4);
  const double n = static_cast<double>(p.size());
  ASSERT_GT(n, 5000);
  // P(r > k eps) = 1/k
  for (double k : {2.0, 10.0}) {
    double above = 0.0;
    for (double r : p.radii) above += r > k * c.eps;
    const double q = 1.0 / k;
    EXPECT_NEAR(above / n, q, 4 * std::sqrt(q * (1 - q) / n));
  }
}

TEST(SimulatePath, SingleAtomIsMonotone) {
  const OslModel m(make_constant(SymMatrix::identity(2)),
                   SpectralMeasure::discrete({v2(0.6, 0.8)}, {1}));
  Rng rng(5);
  const SimConfig c{.horizon = 1.0, .eps = 1e-2, .drift_mode = DriftMode::force_zero};
  const PathSample p = simulate_path(m, Vector::Zero(2), c, rng, 5);
  ASSERT_GT(p.size(), 10u);
  double prev = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_LE((p.jump(k) - p.radii[k] * v2(0.6, 0.8)).norm(), 1e-14 * p.radii[k]);
    const double along = p.state(k).dot(v2(0.6, 0.8));
    EXPECT_GT(along, prev);
    EXPECT_NEAR(p.state(k)(0) * 0.8 - p.state(k)(1) * 0.6, 0.0, 1e-12 * (1 + along));
    prev = along;
  }
}

TEST(SimulatePath, SymmetricMeanIsZero) {
  // E = Id / 1.5 keeps the variance finite so a z-test applies.
  const OslModel m(make_constant(SymMatrix::scaled_identity(1, 1 / 1.5)),
                   SpectralMeasure::discrete({v1(1), v1(-1)}, {1, 1}));
  const SimConfig c{.horizon = 1.0, .eps = 1e-2, .seed = 8};
  const int n = 10000;
  const auto xt = map_paths(m, v1(0), c, n,
                            [](const PathSample& p) { return p.final_state()(0); });
  double mean = 0.0, var = 0.0;
  for (double x : xt) mean += x / n;
  for (double x : xt) var += (x - mean) * (x - mean) / (n - 1);
  EXPECT_LE(std::abs(mean), 4 * std::sqrt(var / n));
}

TEST(SimulatePath, NonSymmetricDriftReplays) {
  const OslModel m = skewed_2d();
  const SimConfig c{.horizon = 1.0, .eps = 1e-2, .seed = 2};
  for (std::uint64_t i = 0; i < 10; ++i) {
    const PathSample p = simulate_indexed_path(m, v2(0.1, 0.4), c, i);
    ASSERT_TRUE(p.has_drift());
    EXPECT_EQ(p.drifts.size(), (p.size() + 1) * 2);
    EXPECT_LE(replay_residual(p, m), 1e-10);
    // first drift slot is the compensator at x0
    EXPECT_EQ(Vector(Eigen::Map<const Vector>(p.drifts.data(), 2)),
              compensator_drift(m, v2(0.1, 0.4), c.eps));
  }
}

TEST(SimulatePath, ReplayDetectsTampering) {
  const OslModel m = interpolated_2d();
  PathSample p = simulate_indexed_path(m, v2(0, 0), SimConfig{.eps = 1e-2}, 0);
  ASSERT_GT(p.size(), 3u);
  p.states[2] += 1e-6;
  EXPECT_GE(replay_residual(p, m), 1e-6 * 0.99);
}

TEST(SimulatePath, StopRadius) {
  const SimConfig c{.horizon = 100.0, .eps = 1e-2, .seed = 1, .stop_radius = 1.0};
  for (std::uint64_t i = 0; i < 20; ++i) {
    const PathSample p = simulate_indexed_path(cauchy_1d(), v1(0), c, i);
    ASSERT_TRUE(p.stopped);
    EXPECT_GT(std::abs(p.final_state()(0)), 1.0);
    for (std::size_t k = 0; k + 1 < p.size(); ++k) EXPECT_LE(std::abs(p.state(k)(0)), 1.0);
    const ExitTime e = first_exit_time(p, 1.0);
    EXPECT_FALSE(e.censored);
    EXPECT_EQ(e.time, p.times.back());
  }
}

TEST(SimulatePath, GridRecording) {
  const OslModel m = interpolated_2d();
  const SimConfig c{.horizon = 1.0, .eps = 1e-2, .seed = 6, .record_mode = RecordMode::grid,
                    .grid_dt = 0.1};
  const PathSample p = simulate_indexed_path(m, v2(0, 0), c, 0);
  ASSERT_EQ(p.grid_times.size(), 11u);
  EXPECT_EQ(p.grid_times.back(), 1.0);
  for (std::size_t k = 0; k < p.grid_times.size(); ++k) {
    EXPECT_EQ(Vector(Eigen::Map<const Vector>(p.grid_states.data() + 2 * k, 2)),
              p.state_at(p.grid_times[k]));
  }
  const PathSample plain = simulate_indexed_path(m, v2(0, 0), SimConfig{.horizon = 1.0,
                                                                        .eps = 1e-2, .seed = 6},
                                                 0);
  EXPECT_EQ(plain.states, p.states);
  EXPECT_TRUE(plain.grid_times.empty());
}

TEST(StateAt, PiecewiseConstant) {
  Rng rng(2);
  const PathSample p = simulate_path(cauchy_1d(), v1(1), SimConfig{.eps = 0.1}, rng, 2);
  ASSERT_GT(p.size(), 2u);
  EXPECT_EQ(p.state_at(0.0), v1(1));
  EXPECT_EQ(p.state_at(p.times[0]), Vector(p.state(0)));
  EXPECT_EQ(p.state_at(0.5 * (p.times[0] + p.times[1])), Vector(p.state(0)));
  EXPECT_EQ(p.final_state(), Vector(p.state(p.size() - 1)));
  EXPECT_THROW(p.state_at(1.5), std::domain_error);
}

TEST(Ensemble, SeedsAndReproducibility) {
  const OslModel m = interpolated_2d();
  const SimConfig c{.eps = 1e-2, .seed = 42};
  const Ensemble a = simulate_ensemble(m, v2(0, 0), c, 20);
  const Ensemble b = simulate_ensemble(m, v2(0, 0), c, 20);
  SimConfig c2 = c;
  c2.seed = 43;
  const Ensemble other = simulate_ensemble(m, v2(0, 0), c2, 20);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_TRUE(same_path(a.paths[i], b.paths[i]));
    EXPECT_FALSE(same_path(a.paths[i], other.paths[i]));
  }
  EXPECT_FALSE(same_path(a.paths[0], a.paths[1]));
  EXPECT_THROW(simulate_ensemble(m, v2(0, 0), c, 0), std::invalid_argument);
}

TEST(Ensemble, SinglePathEqualsSimulatePath) {
  const OslModel m = interpolated_2d();
  const SimConfig c{.eps = 1e-2, .seed = 7};
  const Ensemble e = simulate_ensemble(m, v2(0.5, 0.5), c, 1);
  Rng rng(derive_seed(7, 0));
  EXPECT_TRUE(same_path(e.paths[0], simulate_path(m, v2(0.5, 0.5), c, rng, derive_seed(7, 0))));
}

TEST(Ensemble, ThreadCountDoesNotChangeContent) {
  const OslModel m = skewed_2d();
  const SimConfig c{.eps = 1e-2, .seed = 9};
  const Ensemble one = simulate_ensemble(m, v2(0, 0), c, 64, 1);
  const Ensemble many = simulate_ensemble(m, v2(0, 0), c, 64, 4);
  ASSERT_EQ(many.paths.size(), 64u);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_TRUE(same_path(one.paths[i], many.paths[i]));
  EXPECT_EQ(one.warnings.size(), 1u);
}

TEST(ParallelFor, RethrowsWorkerFailure) {
  EXPECT_THROW(parallel_for(100, 3,
                            [](std::size_t i) {
                              if (i == 57) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(ResolveThreads, ExplicitThenEnvironment) {
  EXPECT_EQ(resolve_threads(3), 3);
  ::setenv("OSLSIM_THREADS", "5", 1);
  EXPECT_EQ(resolve_threads(std::nullopt), 5);
  EXPECT_EQ(resolve_threads(0), 5);
  ::setenv("OSLSIM_THREADS", "x", 1);
  EXPECT_EQ(resolve_threads(std::nullopt), 1);
  ::unsetenv("OSLSIM_THREADS");
  EXPECT_EQ(resolve_threads(std::nullopt), 1);
}

TEST(CoarsenPath, KeepsLargeJumpsAndReplays) {
  const OslModel m = interpolated_2d();
  const PathSample fine = simulate_indexed_path(m, v2(0, 0), SimConfig{.eps = 1e-3, .seed = 1}, 0);
  const PathSample same = coarsen_path(fine, m, 1e-3);
  EXPECT_EQ(same.states, fine.states);
  const PathSample coarse = coarsen_path(fine, m, 1e-2);
  std::size_t kept = 0;
  for (double r : fine.radii) kept += r > 1e-2;
  EXPECT_EQ(coarse.size(), kept);
  EXPECT_EQ(coarse.eps_used, 1e-2);
  EXPECT_LE(replay_residual(coarse, m), 1e-10);
  EXPECT_THROW(coarsen_path(fine, m, 1e-4), std::invalid_argument);
}

TEST(CoarsenPath, MatchesDirectSimulationInLaw) {
  // Coarsened event counts are Poisson(mass / eps_coarse * T).
  const SimConfig c{.eps = 1e-3, .seed = 21};
  const int n = 2000;
  const auto counts = map_paths(cauchy_1d(), v1(0), c, n, [](const PathSample& p) {
    return double(coarsen_path(p, cauchy_1d(), 1e-2).size());
  });
  double mean = 0.0;
  for (double k : counts) mean += k / n;
  EXPECT_NEAR(mean, 200.0, 4 * std::sqrt(200.0 / n));
}

TEST(CoefficientChecks, HandValues) {
  const OslModel id(make_constant(SymMatrix::identity(2)), SpectralMeasure::uniform(2, 3.0));
  const auto c = sde_coefficient_checks(id, v2(0, 0), v2(1, 1));
  EXPECT_NEAR(c.growth_lhs, 3.0, 1e-10);
  EXPECT_EQ(c.lipschitz_lhs, 0.0);
  EXPECT_DOUBLE_EQ(c.lipschitz_rhs_shape, 2.0);

  const OslModel m = interpolated_2d();
  EXPECT_EQ(sde_coefficient_checks(m, v2(0.3, 0.1), v2(0.3, 0.1)).lipschitz_lhs, 0.0);
}

TEST(CoefficientChecksProperty, LipschitzRatioBounded) {
  const OslModel m = interpolated_2d();
  Rng rng(13);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const Vector x = testing::random_unit(rng, 2) * 3 * rng.uniform();
    const Vector y = x + testing::random_unit(rng, 2) * testing::log_uniform(rng, 1e-4, 1);
    const auto c = sde_coefficient_checks(m, x, y);
    EXPECT_GT(c.growth_lhs, 0.0);
    worst = std::max(worst, c.lipschitz_lhs / c.lipschitz_rhs_shape);
  }
  // ||r^{E(x)} - r^{E(y)}|| <= L ||x - y|| r^a |ln r| gives the bound below.
  const double a = m.field().a(), L = m.field().lip(), mass = m.sigma().total_mass();
  EXPECT_LE(worst, mass * L * L * 2 / std::pow(2 * a - 1, 3));
}

TEST(EndToEnd, CauchyCharacteristicFunction) {
  // q(xi) = pi |xi| for unit atoms at +-1 and E = Id
  const OslModel m = cauchy_1d();
  const double T = 0.5, eps = 1e-2;
  const int n = 20000;
  const Ensemble e = simulate_ensemble(m, v1(0), SimConfig{.horizon = T, .eps = eps, .seed = 3}, n);
  for (double xi : {0.1, 0.5, 1.0, 1.5}) {
    const CfEstimate cf = empirical_cf(e, T, v1(xi));
    const double target = std::exp(-T * pi * xi);
    const double budget = 0.5 * xi * xi * T * truncation_error_bound(m, eps);
    EXPECT_LE(std::abs(cf.re - target), 4 * cf.stderr_re + budget) << xi;
    EXPECT_LE(std::abs(cf.im), 4 * cf.stderr_im + 1e-12) << xi;
  }
}

}  // namespace
}  // namespace osl
