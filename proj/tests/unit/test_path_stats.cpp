#include "oslsim/path_stats.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace osl {
namespace {

Vector v1(double a) { return Vector::Constant(1, a); }
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Hand-built pure-jump path in d dimensions from (time, jump) pairs.
PathSample toy_path(const Vector& x0, const std::vector<std::pair<double, Vector>>& events,
                    double horizon = 1.0) {
  PathSample p;
  p.dim = static_cast<int>(x0.size());
  p.x0 = x0;
  p.horizon = horizon;
  Vector x = x0;
  for (const auto& [t, j] : events) {
    x += j;
    p.times.push_back(t);
    p.radii.push_back(j.norm());
    p.states.insert(p.states.end(), x.data(), x.data() + x.size());
    const Vector th = j / j.norm();
    p.thetas.insert(p.thetas.end(), th.data(), th.data() + th.size());
    p.jumps.insert(p.jumps.end(), j.data(), j.data() + j.size());
  }
  return p;
}

OslModel cauchy_1d() {
  return OslModel(make_constant(SymMatrix::identity(1)),
                  SpectralMeasure::discrete({v1(1), v1(-1)}, {1, 1}));
}

TEST(PairwiseSum, OrderInsensitive) {
  Rng rng(1);
  std::vector<double> v(10001);
  for (double& x : v) x = testing::log_uniform(rng, 1e-8, 1e8);
  const double forward = pairwise_sum(v);
  std::shuffle(v.begin(), v.end(), rng.engine());
  EXPECT_NEAR(pairwise_sum(v), forward, 1e-12 * forward);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(MaxProcess, ToyPaths) {
  EXPECT_EQ(max_process(toy_path(v1(0), {{0.5, v1(2)}}), 0.4), 0.0);
  const PathSample single = toy_path(v2(1, 1), {{0.3, v2(3, 4)}});
  EXPECT_DOUBLE_EQ(max_process(single, 1.0), 5.0);
  const PathSample opposing = toy_path(v1(0), {{0.2, v1(1.5)}, {0.6, v1(-1.5)}});
  EXPECT_DOUBLE_EQ(max_process(opposing, 1.0), 1.5);
  EXPECT_EQ(opposing.final_state()(0), 0.0);
  EXPECT_THROW(max_process(opposing, 1.5), std::domain_error);
}

TEST(MaxProcess, DriftSegmentEndpoints) {
  PathSample p = toy_path(v1(0), {{0.5, v1(1)}});
  // drift -4 on [0, 0.5): pre-jump state -2, post-jump -1, then drift +1 to the horizon
  p.drifts = {-4.0, 1.0};
  p.states = {-1.0};
  EXPECT_DOUBLE_EQ(max_process(p, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(max_process(p, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(p.state_at(1.0)(0), -0.5);
}

TEST(FirstExitTime, ToyPaths) {
  const PathSample p = toy_path(v1(0), {{0.2, v1(0.5)}, {0.4, v1(1.0)}, {0.9, v1(-3.5)}});
  EXPECT_EQ(first_exit_time(p, 0.25).time, 0.2);
  EXPECT_EQ(first_exit_time(p, 1.0).time, 0.4);
  const ExitTime never = first_exit_time(p, 10.0);
  EXPECT_TRUE(never.censored);
  EXPECT_EQ(never.time, 1.0);
  // boundary: reaching exactly R is not an exit
  EXPECT_EQ(first_exit_time(p, 1.5).time, 0.9);
  EXPECT_THROW(first_exit_time(p, 0.0), std::domain_error);
}

TEST(ExitMaxDuality, HoldsOnSimulatedPaths) {
  const SimConfig c{.horizon = 1.0, .eps = 1e-2, .seed = 5};
  const auto ok = map_paths(cauchy_1d(), v1(0), c, 300, [](const PathSample& p) {
    for (double R : {0.05, 0.2, 1.0, 5.0}) {
      const ExitTime e = first_exit_time(p, R);
      for (double t : {0.01, 0.1, 0.5, 1.0}) {
        const double m = max_process(p, t);
        if (!e.censored && e.time <= t && !(m >= R)) return false;
        if (m > R && (e.censored || e.time > t)) return false;
      }
    }
    return true;
  });
  EXPECT_TRUE(std::all_of(ok.begin(), ok.end(), [](bool b) { return b; }));
}

TEST(WilsonInterval, HandValues) {
  const Interval i = wilson_interval(50, 100);
  EXPECT_NEAR(i.lo, 0.40383, 1e-5);
  EXPECT_NEAR(i.hi, 0.59617, 1e-5);
  const Interval z = wilson_interval(0, 100);
  EXPECT_EQ(z.lo, 0.0);
  EXPECT_NEAR(z.hi, 0.036994, 1e-6);
  EXPECT_DOUBLE_EQ(wilson_interval(100, 100).hi, 1.0);
}

TEST(WilsonIntervalProperty, ContainsPointEstimate) {
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 1000);
    const std::size_t k = static_cast<std::size_t>(rng.uniform() * (n + 1)) % (n + 1);
    const Interval i = wilson_interval(k, n);
    const double p = double(k) / double(n);
    EXPECT_LE(i.lo, p + 1e-15);
    EXPECT_GE(i.hi, p - 1e-15);
    EXPECT_GE(i.lo, 0.0);
    EXPECT_LE(i.hi, 1.0);
  }
}

TEST(WeightedLineFit, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, -1, -3, -5}, w{1, 2, 3, 4};
  const SlopeFit f = weighted_line_fit(x, y, w);
  EXPECT_NEAR(f.slope, -2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
}

TEST(TailReport, AllExceedGivesSlopeZero) {
  const std::vector<double> maxima(500, 10.0);
  const std::vector<double> R{0.2, 0.5, 1.0, 2.0};
  const TailReport rep = tail_report(maxima, 0.1, R, -1.0);
  for (double p : rep.probs) EXPECT_EQ(p, 1.0);
  EXPECT_EQ(rep.fitted_slope, 0.0);
  EXPECT_EQ(rep.reference_slope, -1.0);
}

TEST(TailReport, PowerLawSlopeAndMonotoneProbs) {
  // maxima with P(M > R) = R^{-1} for R >= 1 (Pareto by inversion)
  Rng rng(3);
  std::vector<double> maxima(100000);
  for (double& m : maxima) m = 1.0 / rng.uniform_pos();
  const std::vector<double> R{1.5, 2, 4, 8, 16};
  const TailReport rep = tail_report(maxima, 1.0, R, -1.0);
  EXPECT_NEAR(rep.fitted_slope, -1.0, 0.05);
  for (std::size_t i = 1; i < rep.probs.size(); ++i) EXPECT_LE(rep.probs[i], rep.probs[i - 1]);
  for (std::size_t i = 0; i < rep.probs.size(); ++i) {
    EXPECT_LE(rep.ci[i].lo, rep.probs[i]);
    EXPECT_GE(rep.ci[i].hi, rep.probs[i]);
  }
  EXPECT_TRUE(rep.warnings.empty());
}

TEST(TailReport, FewExceedancesWarn) {
  const std::vector<double> maxima{0.1, 0.2, 3.0};
  const std::vector<double> R{1.0};
  EXPECT_FALSE(tail_report(maxima, 1.0, R, -1.0).warnings.empty());
  const std::vector<double> bad{2.0, 1.0};
  EXPECT_THROW(tail_report(maxima, 1.0, bad, -1.0), std::invalid_argument);
}

TEST(TailConstant, SplitSample) {
  Rng rng(4);
  auto sample = [&] {
    std::vector<double> m(20000);
    for (double& x : m) x = 0.5 / rng.uniform_pos();
    return m;
  };
  const std::vector<double> R{1, 2, 4};
  const TailReport fit = tail_report(sample(), 1.0, R, -1.0);
  const double C = fit_tail_constant(fit, 1.0);
  EXPECT_NEAR(C, 0.5, 0.05);
  EXPECT_TRUE(tail_bound_holds(tail_report(sample(), 1.0, R, -1.0), C, 1.0));
  EXPECT_FALSE(tail_bound_holds(tail_report(sample(), 1.0, R, -1.0), 0.5 * C, 1.0));
}

TEST(EmpiricalMoment, SmallPLimit) {
  const std::vector<double> v{0.3, 2.0, 7.5, 1e-3};
  const MomentReport m = empirical_moment(v, 1e-6);
  EXPECT_NEAR(m.estimate, 1.0, 1e-4);
  EXPECT_THROW(empirical_moment(v, 0.0), std::invalid_argument);
}

TEST(EmpiricalMoment, StabilityFlag) {
  std::vector<double> v(1000, 1.0);
  EXPECT_TRUE(empirical_moment(v, 2.0).stable);
  EXPECT_EQ(empirical_moment(v, 2.0).ci_half_width, 0.0);
  v[0] = 1e3;
  const MomentReport m = empirical_moment(v, 2.0);
  EXPECT_FALSE(m.stable);
  EXPECT_NEAR(m.top_share, 1e6 / (1e6 + 999), 1e-12);
}

TEST(EmpiricalMoment, BootstrapWidthMatchesStandardError) {
  Rng rng(6);
  std::vector<double> v(4000);
  for (double& x : v) x = rng.uniform();
  const MomentReport m = empirical_moment(v, 1.0, 400, 9);
  const double se = std::sqrt(1.0 / 12.0 / 4000.0);
  EXPECT_NEAR(m.ci_half_width / (1.96 * se), 1.0, 0.15);
  EXPECT_EQ(m.ci_half_width, empirical_moment(v, 1.0, 400, 9).ci_half_width);
}

TEST(GrowthExponent, Verdicts) {
  // maxima scaling like t^{1/alpha} with alpha = 1
  Rng rng(7);
  const std::vector<double> t{1e-1, 1e-2, 1e-3};
  std::vector<std::vector<double>> maxima;
  for (double s : t) {
    std::vector<double> m(2000);
    for (double& x : m) x = s / rng.uniform_pos();
    maxima.push_back(m);
  }
  EXPECT_EQ(growth_exponent_check(t, maxima, 2.0, true).verdict, Trend::decreasing);
  EXPECT_EQ(growth_exponent_check(t, maxima, 0.5, true).verdict, Trend::increasing);
  EXPECT_EQ(growth_exponent_check(t, maxima, 1.0, true).verdict, Trend::inconclusive);
  const GrowthReport r = growth_exponent_check(t, maxima, 2.0, true);
  EXPECT_EQ(r.t_grid.front(), 1e-1);
  EXPECT_LE(r.median_ratio.back(), 0.2 * r.median_ratio.front());
  EXPECT_STREQ(to_string(Trend::inconclusive), "inconclusive");
}

TEST(PVariation, OneJump) {
  const PathSample p = toy_path(v2(0, 0), {{0.3, v2(3, 4)}});
  for (double q : {0.5, 1.0, 2.0}) {
    EXPECT_DOUBLE_EQ(p_variation_jump_sum(p, q), std::pow(5.0, q));
    EXPECT_DOUBLE_EQ(p_variation_dyadic(p, q, 6).running_max.back(), std::pow(5.0, q));
  }
}

TEST(PVariation, JumpSumAgainstBruteForce) {
  // Strong p-variation of a piecewise-constant path: maximise over subsets of
  // jump boundaries (every partition reduces to grouping consecutive jumps).
  const PathSample p =
      toy_path(v1(0), {{0.1, v1(1)}, {0.2, v1(1)}, {0.3, v1(-0.5)}, {0.4, v1(2)}});
  const std::vector<double> jumps{1, 1, -0.5, 2};
  auto brute = [&](double q) {
    double best = 0.0;
    for (unsigned mask = 0; mask < 8; ++mask) {  // cut after jump i if bit i set
      double s = 0.0, acc = 0.0;
      for (int i = 0; i < 4; ++i) {
        acc += jumps[i];
        if (i == 3 || (mask >> i & 1)) {
          s += std::pow(std::abs(acc), q);
          acc = 0.0;
        }
      }
      best = std::max(best, s);
    }
    return best;
  };
  for (double q : {0.5, 0.9, 1.0}) {
    EXPECT_NEAR(p_variation_jump_sum(p, q), brute(q), 1e-14) << q;
  }
  for (double q : {1.3, 2.0}) EXPECT_LE(p_variation_jump_sum(p, q), brute(q) + 1e-14) << q;
  EXPECT_LT(p_variation_jump_sum(p, 2.0), brute(2.0));
}

TEST(PVariation, DyadicNondecreasing) {
  const PathSample p = simulate_indexed_path(cauchy_1d(), v1(0), SimConfig{.eps = 1e-2}, 0);
  const DyadicCurve c = p_variation_dyadic(p, 1.5, 12);
  ASSERT_EQ(c.levels.size(), 13u);
  for (std::size_t i = 1; i < c.running_max.size(); ++i) {
    EXPECT_GE(c.running_max[i], c.running_max[i - 1]);
  }
  EXPECT_THROW(p_variation_dyadic(p, 1.5, 31), std::invalid_argument);
}

TEST(PVariationProperty, JumpSumGrowsAsEpsShrinks) {
  const OslModel m = cauchy_1d();
  for (std::uint64_t i = 0; i < 20; ++i) {
    const PathSample fine = simulate_indexed_path(m, v1(0), SimConfig{.eps = 1e-4, .seed = 2}, i);
    double prev = 0.0;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const double s = p_variation_jump_sum(coarsen_path(fine, m, eps), 0.7);
      EXPECT_GE(s, prev);
      prev = s;
    }
  }
}

TEST(EmpiricalCf, ZeroFrequencyAndSymmetry) {
  const Ensemble e = simulate_ensemble(cauchy_1d(), v1(0), SimConfig{.eps = 1e-2, .seed = 4}, 2000);
  const CfEstimate zero = empirical_cf(e, 1.0, v1(0));
  EXPECT_EQ(zero.re, 1.0);
  EXPECT_EQ(zero.im, 0.0);
  EXPECT_EQ(zero.stderr_re, 0.0);
  const CfEstimate at0 = empirical_cf(e, 0.0, v1(3));
  EXPECT_EQ(at0.re, 1.0);
  EXPECT_EQ(at0.im, 0.0);
  const CfEstimate c = empirical_cf(e, 1.0, v1(0.7));
  EXPECT_LE(std::abs(c.im), 4 * c.stderr_im);
}

TEST(ExitMoment, ShapesAndCensoring) {
  const std::vector<ExitTime> exits{{0.5, false}, {1.5, false}, {2.0, true}};
  const ExitMomentReport r = exit_time_moment_check(exits, 4.0, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(r.mean, 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.lower_shape, 4.0);
  EXPECT_DOUBLE_EQ(r.upper_shape, 16.0);
  EXPECT_TRUE(r.heavy_censoring);
  EXPECT_NEAR(r.censored_fraction, 1.0 / 3.0, 1e-15);
}

TEST(ExitMoment, DoubledMassHalvesMeanExitTime) {
  const OslModel m1 = cauchy_1d();
  const OslModel m2(make_constant(SymMatrix::identity(1)),
                    SpectralMeasure::discrete({v1(1), v1(-1)}, {2, 2}));
  const SimConfig c{.horizon = 50.0, .eps = 1e-2, .seed = 12, .stop_radius = 0.5};
  const auto r1 = exit_time_moment_check(simulate_ensemble(m1, v1(0), c, 4000), 0.5, 1, 1);
  SimConfig c2 = c;
  c2.seed = 13;
  const auto r2 = exit_time_moment_check(simulate_ensemble(m2, v1(0), c2, 4000), 0.5, 1, 1);
  EXPECT_FALSE(r1.heavy_censoring);
  EXPECT_NEAR(r1.mean / 2, r2.mean, r1.ci_half_width / 2 + r2.ci_half_width);
}

}  // namespace
}  // namespace osl
