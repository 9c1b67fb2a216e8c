#include "oslsim/path_stats.hpp"

#include "oslsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace osl {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

namespace {

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= v.size()) return v.back();
  return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

std::vector<double> maxima_at(const Ensemble& e, double t) {
  std::vector<double> m(e.paths.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = max_process(e.paths[i], t);
  return m;
}

double dist_from(const PathSample& path, const Vector& x) { return (x - path.x0).norm(); }

}  // namespace

double max_process(const PathSample& path, double t) {
  if (t < 0.0 || t > path.horizon) {
    throw std::domain_error("max_process: t outside [0, horizon]");
  }
  double best = 0.0;
  for (std::size_t k = 0; k < path.size() && path.times[k] <= t; ++k) {
    best = std::max(best, dist_from(path, path.state(k)));
    if (path.has_drift()) best = std::max(best, dist_from(path, path.state(k) - path.jump(k)));
  }
  if (path.has_drift()) best = std::max(best, dist_from(path, path.state_at(t)));
  return best;
}

ExitTime first_exit_time(const PathSample& path, double R) {
  if (!(R > 0.0)) throw std::domain_error("first_exit_time: R must be positive");
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (dist_from(path, path.state(k)) > R) return {path.times[k], false};
  }
  return {path.horizon, true};
}

Interval wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

SlopeFit weighted_line_fit(std::span<const double> x, std::span<const double> y,
                           std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) {
    throw std::invalid_argument("weighted_line_fit: length mismatch");
  }
  double sw = 0.0;
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  SlopeFit f;
  if (x.size() < 2 || !(sw > 0.0)) return f;
  const double xm = sx / sw;
  const double ym = sy / sw;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - xm) * (x[i] - xm);
    sxy += w[i] * (x[i] - xm) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  f.stderr_slope = std::sqrt(1.0 / sxx);
  return f;
}

TailReport tail_report(std::span<const double> maxima, double t, std::span<const double> R_grid,
                       double reference_slope) {
  if (maxima.empty()) throw std::invalid_argument("tail_report: empty sample");
  for (std::size_t i = 1; i < R_grid.size(); ++i) {
    if (!(R_grid[i] > R_grid[i - 1])) throw std::invalid_argument("tail_report: R_grid not increasing");
  }
  TailReport rep;
  rep.t = t;
  rep.n = maxima.size();
  rep.reference_slope = reference_slope;
  std::vector<double> sorted(maxima.begin(), maxima.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> lx;
  std::vector<double> ly;
  std::vector<double> lw;
  for (double R : R_grid) {
    if (!(R > 0.0)) throw std::invalid_argument("tail_report: R must be positive");
    const auto above = static_cast<std::size_t>(
        sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), R));
    const Interval ci = wilson_interval(above, rep.n);
    rep.R_grid.push_back(R);
    rep.exceedances.push_back(above);
    rep.probs.push_back(static_cast<double>(above) / static_cast<double>(rep.n));
    rep.ci.push_back(ci);
    if (above < 100) {
      rep.warnings.push_back("tail_report: only " + std::to_string(above) +
                             " exceedances at R = " + std::to_string(R) + "; interval is wide");
    }
    if (above > 0 && ci.lo > 0.0) {
      const double sd = (std::log(ci.hi) - std::log(ci.lo)) / (2.0 * 1.96);
      lx.push_back(std::log(R));
      ly.push_back(std::log(rep.probs.back()));
      lw.push_back(sd > 0.0 ? 1.0 / (sd * sd) : 1e12);
    }
  }
  const SlopeFit fit = weighted_line_fit(lx, ly, lw);
  rep.fitted_slope = fit.slope;
  rep.slope_stderr = fit.stderr_slope;
  return rep;
}

TailReport tail_report(const Ensemble& ensemble, double t, std::span<const double> R_grid,
                       double reference_slope) {
  const auto m = maxima_at(ensemble, t);
  return tail_report(m, t, R_grid, reference_slope);
}

double fit_tail_constant(const TailReport& fit, double kappa) {
  double c = 0.0;
  for (std::size_t i = 0; i < fit.R_grid.size(); ++i) {
    c = std::max(c, fit.ci[i].hi * std::pow(fit.R_grid[i], kappa) / fit.t);
  }
  return c;
}

bool tail_bound_holds(const TailReport& test, double C, double kappa) {
  for (std::size_t i = 0; i < test.R_grid.size(); ++i) {
    if (test.ci[i].lo > C * test.t * std::pow(test.R_grid[i], -kappa)) return false;
  }
  return true;
}

MomentReport empirical_moment(std::span<const double> values, double p, int bootstrap,
                              std::uint64_t seed) {
  if (!(p > 0.0)) throw std::invalid_argument("empirical_moment: p must be positive");
  if (values.empty()) throw std::invalid_argument("empirical_moment: empty sample");
  MomentReport rep;
  rep.p = p;
  std::vector<double> powered(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) powered[i] = std::pow(values[i], p);
  const double total = pairwise_sum(powered);
  rep.estimate = total / static_cast<double>(powered.size());
  const double top = *std::max_element(powered.begin(), powered.end());
  rep.top_share = total > 0.0 ? top / total : 0.0;
  rep.stable = rep.top_share <= 0.2;

  if (bootstrap > 1) {
    Rng rng(seed);
    const std::size_t n = powered.size();
    std::vector<double> means(bootstrap);
    std::vector<double> resample(n);
    for (int b = 0; b < bootstrap; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        resample[i] = powered[std::min(n - 1, static_cast<std::size_t>(rng.uniform() * n))];
      }
      means[b] = mean(resample);
    }
    rep.ci_half_width = 1.96 * sample_stddev(means);
  }
  return rep;
}

MomentReport empirical_moment(const Ensemble& ensemble, double p, double t, int bootstrap,
                              std::uint64_t seed) {
  const auto m = maxima_at(ensemble, t);
  return empirical_moment(m, p, bootstrap, seed);
}

const char* to_string(Trend t) {
  switch (t) {
    case Trend::decreasing:
      return "decreasing";
    case Trend::increasing:
      return "increasing";
    default:
      return "inconclusive";
  }
}

GrowthReport growth_exponent_check(std::span<const double> t_grid,
                                   const std::vector<std::vector<double>>& maxima, double gamma,
                                   bool short_time) {
  if (t_grid.size() != maxima.size() || t_grid.size() < 2) {
    throw std::invalid_argument("growth_exponent_check: need >= 2 grid points with data");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("growth_exponent_check: gamma must be > 0");
  std::vector<std::size_t> order(t_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return short_time ? t_grid[l] > t_grid[r] : t_grid[l] < t_grid[r];
  });
  GrowthReport rep;
  rep.gamma = gamma;
  for (std::size_t j : order) {
    const double scale = std::pow(t_grid[j], 1.0 / gamma);
    std::vector<double> ratio(maxima[j].size());
    for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] = maxima[j][i] / scale;
    rep.t_grid.push_back(t_grid[j]);
    rep.median_ratio.push_back(quantile(ratio, 0.5));
    rep.upper_ratio.push_back(quantile(ratio, 0.9));
  }
  const auto& m = rep.median_ratio;
  bool down = m.back() <= 0.5 * m.front();
  bool up = m.back() >= 2.0 * m.front();
  for (std::size_t i = 1; i < m.size(); ++i) {
    if (m[i] > 1.1 * m[i - 1]) down = false;
    if (m[i] < m[i - 1] / 1.1) up = false;
  }
  rep.verdict = down ? Trend::decreasing : up ? Trend::increasing : Trend::inconclusive;
  return rep;
}

double p_variation_jump_sum(const PathSample& path, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("p_variation: p must be positive");
  std::vector<double> terms(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) terms[k] = std::pow(path.jump(k).norm(), p);
  return pairwise_sum(terms);
}

DyadicCurve p_variation_dyadic(const PathSample& path, double p, int max_level) {
  if (!(p > 0.0)) throw std::invalid_argument("p_variation: p must be positive");
  if (max_level < 0 || max_level > 30) {
    throw std::invalid_argument("p_variation: max_level must lie in [0, 30]");
  }
  DyadicCurve c;
  double envelope = 0.0;
  for (int level = 0; level <= max_level; ++level) {
    const std::size_t cells = std::size_t{1} << level;
    std::vector<double> terms;
    terms.reserve(cells);
    Vector prev = path.x0;
    for (std::size_t j = 1; j <= cells; ++j) {
      const double t = j == cells ? path.horizon
                                  : path.horizon * static_cast<double>(j) / static_cast<double>(cells);
      Vector cur = path.state_at(t);
      terms.push_back(std::pow((cur - prev).norm(), p));
      prev = std::move(cur);
    }
    const double v = pairwise_sum(terms);
    envelope = std::max(envelope, v);
    c.levels.push_back(level);
    c.raw.push_back(v);
    c.running_max.push_back(envelope);
  }
  return c;
}

CfEstimate empirical_cf(const std::vector<Vector>& displacements, const Vector& xi) {
  CfEstimate e;
  if (displacements.empty()) throw std::invalid_argument("empirical_cf: empty sample");
  std::vector<double> c(displacements.size());
  std::vector<double> s(displacements.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double phase = xi.dot(displacements[i]);
    c[i] = std::cos(phase);
    s[i] = std::sin(phase);
  }
  const double n = static_cast<double>(c.size());
  e.re = mean(c);
  e.im = mean(s);
  e.stderr_re = sample_stddev(c) / std::sqrt(n);
  e.stderr_im = sample_stddev(s) / std::sqrt(n);
  return e;
}

CfEstimate empirical_cf(const Ensemble& ensemble, double t, const Vector& xi) {
  std::vector<Vector> disp;
  disp.reserve(ensemble.paths.size());
  for (const auto& p : ensemble.paths) disp.push_back(p.state_at(t) - p.x0);
  return empirical_cf(disp, xi);
}

ExitMomentReport exit_time_moment_check(std::span<const ExitTime> exits, double R, double a,
                                        double b) {
  if (exits.empty()) throw std::invalid_argument("exit_time_moment_check: empty sample");
  ExitMomentReport rep;
  rep.R = R;
  std::vector<double> times(exits.size());
  std::size_t censored = 0;
  for (std::size_t i = 0; i < exits.size(); ++i) {
    times[i] = exits[i].time;
    if (exits[i].censored) ++censored;
  }
  rep.mean = mean(times);
  rep.ci_half_width = 1.96 * sample_stddev(times) / std::sqrt(static_cast<double>(times.size()));
  rep.censored_fraction = static_cast<double>(censored) / static_cast<double>(exits.size());
  rep.heavy_censoring = rep.censored_fraction >= 0.05;
  const double s1 = std::pow(R, 1.0 / a);
  const double s2 = std::pow(R, 1.0 / b);
  rep.lower_shape = std::min(s1, s2);
  rep.upper_shape = std::max(s1, s2);
  return rep;
}

ExitMomentReport exit_time_moment_check(const Ensemble& ensemble, double R, double a, double b) {
  std::vector<ExitTime> exits;
  exits.reserve(ensemble.paths.size());
  for (const auto& p : ensemble.paths) exits.push_back(first_exit_time(p, R));
  return exit_time_moment_check(exits, R, a, b);
}

}  // namespace osl
