#pragma once

// Path functionals and Monte-Carlo estimators: running maxima, exit times,
// exceedance tails, fractional moments, growth exponents and p-variation.

#include "oslsim/common.hpp"
#include "oslsim/simulator.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace osl {

/// Order-insensitive sum (pairwise recursion over the given order).
double pairwise_sum(std::span<const double> v);

/// sup_{s <= t} ||X_s - x0||, exact at event times. With an active drift the
/// segment endpoints are evaluated, a first-order approximation of the supremum.
double max_process(const PathSample& path, double t);

struct ExitTime {
  double time;    // first event time with ||X - x0|| > R, else the horizon
  bool censored;  // no exit before the horizon
};
ExitTime first_exit_time(const PathSample& path, double R);

struct Interval {
  double lo;
  double hi;
};

/// Wilson score interval for k successes out of n at normal quantile z.
Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.96);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};
/// Weighted least squares y = intercept + slope x.
SlopeFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                           std::span<const double> w);

struct TailReport {
  double t = 0.0;
  std::size_t n = 0;
  std::vector<double> R_grid;
  std::vector<std::size_t> exceedances;
  std::vector<double> probs;
  std::vector<Interval> ci;
  double fitted_slope = 0.0;
  double slope_stderr = 0.0;
  double reference_slope = 0.0;
  std::vector<std::string> warnings;
};

/// Exceedance probabilities P(sup_{s<=t} ||X_s - x0|| > R) from per-path maxima,
/// with Wilson intervals and a log-log slope weighted by the interval widths.
TailReport tail_report(std::span<const double> maxima, double t, std::span<const double> R_grid,
                       double reference_slope);
TailReport tail_report(const Ensemble& ensemble, double t, std::span<const double> R_grid,
                       double reference_slope);

/// Split-sample constant: max_R upper_ci(R) * R^{kappa} / t from a fitting sample.
double fit_tail_constant(const TailReport& fit, double kappa);
/// Every lower Wilson bound of the test sample sits below C t R^{-kappa}.
bool tail_bound_holds(const TailReport& test, double C, double kappa);

struct MomentReport {
  double p = 0.0;
  double estimate = 0.0;
  double ci_half_width = 0.0;  // 1.96 bootstrap standard deviations
  double top_share = 0.0;      // largest term / sum
  bool stable = true;          // top_share <= 0.2
};

/// Mean of values^p with a bootstrap interval (B resamples from `seed`).
MomentReport empirical_moment(std::span<const double> values, double p, int bootstrap = 200,
                              std::uint64_t seed = 1);
MomentReport empirical_moment(const Ensemble& ensemble, double p, double t, int bootstrap = 200,
                              std::uint64_t seed = 1);

enum class Trend { decreasing, increasing, inconclusive };
const char* to_string(Trend t);

struct GrowthReport {
  double gamma = 0.0;
  std::vector<double> t_grid;  // in the order of approach (toward the limit)
  std::vector<double> median_ratio;
  std::vector<double> upper_ratio;  // 90% quantile
  Trend verdict = Trend::inconclusive;
};

/// Ratios max_process(t) / t^{1/gamma} along t_grid, ordered toward the limit
/// (t decreasing when short_time, increasing otherwise). maxima[j] holds the
/// per-path maxima at t_grid[j]. A trend is declared when the end-to-end change
/// is at least 2x and no step reverses by more than 10%.
GrowthReport growth_exponent_check(std::span<const double> t_grid,
                                   const std::vector<std::vector<double>>& maxima, double gamma,
                                   bool short_time);

/// Sum of ||jump||^p over recorded jumps. Equals the strong p-variation of a
/// pure-jump piecewise-constant path for p <= 1 and bounds it from below for p > 1.
double p_variation_jump_sum(const PathSample& path, double p);

struct DyadicCurve {
  std::vector<int> levels;
  std::vector<double> raw;          // sums along the level-L dyadic partition of [0, T]
  std::vector<double> running_max;  // nondecreasing envelope of raw
};
DyadicCurve p_variation_dyadic(const PathSample& path, double p, int max_level);

struct CfEstimate {
  double re = 1.0;
  double im = 0.0;
  double stderr_re = 0.0;
  double stderr_im = 0.0;
};
/// Sample mean of (cos, sin)<xi, X_t - x0> over the given displacements.
CfEstimate empirical_cf(const std::vector<Vector>& displacements, const Vector& xi);
CfEstimate empirical_cf(const Ensemble& ensemble, double t, const Vector& xi);

struct ExitMomentReport {
  double R = 0.0;
  double mean = 0.0;
  double ci_half_width = 0.0;
  double censored_fraction = 0.0;
  bool heavy_censoring = false;  // >= 5% censored: mean is a lower bound
  double lower_shape = 0.0;      // min(R^{1/a}, R^{1/b})
  double upper_shape = 0.0;      // max(R^{1/a}, R^{1/b})
};
ExitMomentReport exit_time_moment_check(std::span<const ExitTime> exits, double R, double a,
                                        double b);
ExitMomentReport exit_time_moment_check(const Ensemble& ensemble, double R, double a, double b);

/// Uniform machine-readable summary of one statistic.
struct StatReport {
  std::string statistic;
  std::vector<std::pair<std::string, double>> params;
  double estimate = 0.0;
  Interval ci{0.0, 0.0};
  std::string reference_shape;
  std::string verdict;
};

}  // namespace osl
