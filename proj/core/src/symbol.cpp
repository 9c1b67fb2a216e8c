#include "oslsim/symbol.hpp"

#include "oslsim/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace osl {

OslModel::OslModel(ExponentField field, SpectralMeasure sigma)
    : field_(std::move(field)), sigma_(std::move(sigma)) {
  if (field_.dim() != sigma_.dim()) {
    throw std::invalid_argument("OslModel: field and spectral measure dimensions differ");
  }
}

void QuadSpec::validate() const {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadSpec: rel_tol must be positive");
  if (r_split != 1.0) throw std::invalid_argument("QuadSpec: r_split is fixed at 1");
  if (!(R_max >= 1.0)) throw std::invalid_argument("QuadSpec: R_max must be >= 1");
  if (max_subdivisions < 1) throw std::invalid_argument("QuadSpec: max_subdivisions < 1");
  if (sphere_tol < 0.0) throw std::invalid_argument("QuadSpec: sphere_tol < 0");
}

namespace {

using cplx = std::complex<double>;

// Largest radius for which the asymptotic tail is attempted.
constexpr double kTailCap = 1e15;
// Phase magnitude at which the asymptotic tail expansion starts.
constexpr double kTailPhase = 50.0;
// Phase change allowed per initial panel of a stationary-phase window.
constexpr double kPanelPhase = 8.0;
// Initial panels allowed per window (about 1.6e6 rad of phase).
constexpr std::size_t kMaxPhaseBreaks = 200000;

// phi(r) = sum_i c_i r^{a_i} along one direction, with equal exponents merged and
// vanishing coefficients dropped.
struct Phase {
  std::vector<double> a;
  std::vector<double> c;

  bool empty() const { return a.empty(); }
  std::size_t size() const { return a.size(); }

  double at_u(double u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += c[i] * std::exp(a[i] * u);
    return s;
  }
  // k-th derivative in r.
  double deriv(double r, int k) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      double f = 1.0;
      for (int j = 0; j < k; ++j) f *= a[i] - j;
      s += c[i] * f * std::pow(r, a[i] - k);
    }
    return s;
  }
};

Phase make_phase(const EigenData& eig, const Vector& theta, const Vector& xi) {
  const Vector zt = eig.vectors.transpose() * theta;
  const Vector zx = eig.vectors.transpose() * xi;
  const double floor = 1e-14 * theta.norm() * xi.norm();
  Phase p;
  for (int i = 0; i < eig.dim(); ++i) {
    const double ai = eig.values(i);
    const double ci = zt(i) * zx(i);
    if (!p.a.empty() && std::abs(ai - p.a.back()) <= 1e-14 * std::abs(ai)) {
      p.c.back() += ci;
    } else {
      p.a.push_back(ai);
      p.c.push_back(ci);
    }
  }
  Phase q;
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    if (std::abs(p.c[i]) > floor) {
      q.a.push_back(p.a[i]);
      q.c.push_back(p.c[i]);
    }
  }
  return q;
}

// phi - sin(phi) without cancellation for small phi.
double phi_minus_sin(double phi) {
  if (std::abs(phi) < 1e-2) {
    const double p2 = phi * phi;
    return phi * p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0));
  }
  return phi - std::sin(phi);
}

// int_R^1 r^{a-2} dr (negative when R > 1).
double compensator_integral(double a, double R) {
  if (std::abs(a - 1.0) < 1e-12) return -std::log(R);
  return (1.0 - std::pow(R, a - 1.0)) / (a - 1.0);
}

// Roots of phi' beyond R: sign changes on a geometric grid, refined by bisection
// in ln r. The scan ends once the highest exponent dominates phi', past which
// phi' keeps its sign.
std::vector<double> stationary_points(const Phase& p, double R) {
  std::vector<double> roots;
  if (p.size() < 2) return roots;
  std::size_t top = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p.a[i] > p.a[top]) top = i;
  }
  const double step = std::pow(2.0, 0.125);
  double prev_r = R;
  bool prev = p.deriv(R, 1) > 0.0;
  for (double r = R * step; r < kTailCap; r *= step) {
    const bool cur = p.deriv(r, 1) > 0.0;
    if (cur != prev) {
      double lo = std::log(prev_r), hi = std::log(r);
      for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++k) {
        const double mid = 0.5 * (lo + hi);
        ((p.deriv(std::exp(mid), 1) > 0.0) == prev ? lo : hi) = mid;
      }
      roots.push_back(std::exp(0.5 * (lo + hi)));
    }
    prev = cur;
    prev_r = r;
    double rest = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i != top) rest += std::abs(p.c[i]) * p.a[i] * std::pow(r, p.a[i] - 1.0);
    }
    if (std::abs(p.c[top]) * p.a[top] * std::pow(r, p.a[top] - 1.0) >= 2.0 * rest) break;
  }
  return roots;
}

// Repeated integration by parts of int_A^inf e^{i phi} r^{-2} dr with
// h_0 = r^{-2} / phi', h_{k+1} = h_k' / phi':
//   int_A^inf = e^{i phi(A)} sum_{k < K} i^{k+1} h_k(A) + remainder,
// where the remainder is at most |h_K| plus its variation. The h_k come from
// truncated Taylor series in sigma = r / A - 1.
constexpr int kIbpTerms = 10;

struct IbpTerms {
  cplx boundary;
  double last;  // |h_K(A)|
};

using Series = std::array<double, kIbpTerms + 1>;

// Taylor coefficients in sigma of f(A (1 + sigma)) and of the phase derivative
// phi'(A (1 + sigma)), and phi(A).
IbpTerms ibp_series(const Series& f, const Series& d, double A, double phase) {
  constexpr int N = kIbpTerms + 1;
  // h <- g / d on the first n coefficients.
  auto divide = [&d](Series& h, const Series& g, int n) {
    for (int j = 0; j < n; ++j) {
      double v = g[j];
      for (int m = 1; m <= j; ++m) v -= d[m] * h[j - m];
      h[j] = v / d[0];
    }
  };
  Series h{};
  divide(h, f, N);
  cplx sum{};
  cplx ik(0.0, 1.0);
  for (int k = 0; k < kIbpTerms; ++k) {
    sum += ik * h[0];
    ik *= cplx(0.0, 1.0);
    const int n = N - k - 1;
    Series g{};
    for (int j = 0; j < n; ++j) g[j] = (j + 1) * h[j + 1] / A;
    divide(h, g, n);
  }
  return {std::polar(1.0, phase) * sum, std::abs(h[0])};
}

// Coefficients of A^{-2} (1 + sigma)^{-2}.
Series inverse_square(double A) {
  Series f{};
  for (int j = 0; j <= kIbpTerms; ++j) f[j] = (j % 2 == 0 ? 1.0 : -1.0) * (j + 1) / (A * A);
  return f;
}

// Adds w A^alpha (1 + sigma)^alpha to s.
void add_power(Series& s, double w, double A, double alpha) {
  double b = w * std::pow(A, alpha);
  for (int j = 0; j <= kIbpTerms; ++j) {
    s[j] += b;
    b *= (alpha - j) / (j + 1);
  }
}

IbpTerms ibp_terms(const Phase& p, double A) {
  Series d{};
  for (std::size_t i = 0; i < p.size(); ++i) add_power(d, p.c[i] * p.a[i], A, p.a[i] - 1.0);
  return ibp_series(inverse_square(A), d, A, p.deriv(A, 0));
}

double last_term(const Phase& p, double R) { return ibp_terms(p, R).last; }

cplx ibp_boundary(const Phase& p, double R) { return ibp_terms(p, R).boundary; }

// Remainder bound on [A, B] (B may be infinite): |h_K| plus its variation, with
// h_K sampled because it need not be monotone when several terms compete.
double ibp_error(const Phase& p, double A, double B) {
  double hmax = std::abs(last_term(p, A));
  if (std::isfinite(B)) hmax = std::max(hmax, std::abs(last_term(p, B)));
  const double step = std::pow(2.0, 0.25);
  for (double r = A * step; r < B && r < 1e300; r *= step) {
    const double h = std::abs(last_term(p, r));
    hmax = std::max(hmax, h);
    if (!std::isfinite(B) && r > 8.0 * A && h < 1e-3 * hmax) break;
  }
  return 3.0 * hmax;
}

// Break points in u = ln r with at most kPanelPhase of phase change per panel.
std::vector<double> phase_breaks(const Phase& p, double a, double b) {
  std::vector<double> br{a};
  double u = a;
  while (u < b) {
    double h = std::min(b - u, 0.25);
    auto change = [&](double w) {
      const double p0 = p.at_u(u), p1 = p.at_u(u + 0.5 * w), p2 = p.at_u(u + w);
      return std::abs(p1 - p0) + std::abs(p2 - p1);
    };
    while (h > 1e-12 && change(h) > kPanelPhase) h *= 0.5;
    u = std::min(b, u + h);
    br.push_back(u);
    if (br.size() > kMaxPhaseBreaks) {
      throw QuadratureError("symbol: stationary-phase window too wide to resolve", 0.0,
                            std::numeric_limits<double>::infinity());
    }
  }
  return br;
}

struct StationaryTerm {
  cplx value;
  double error;
};

// Leading stationary-phase term of int e^{i phi} r^{-2} dr at a root r of phi',
// with the magnitude of the first correction as its error.
StationaryTerm stationary_term(const Phase& p, double r) {
  const double d2 = p.deriv(r, 2);
  const double d3 = p.deriv(r, 3);
  const double d4 = p.deriv(r, 4);
  const double a2 = std::abs(d2);
  const double lead = std::sqrt(2.0 * std::numbers::pi / a2) / (r * r);
  const double arg = p.deriv(r, 0) + std::copysign(0.25 * std::numbers::pi, d2);
  // g = r^{-2}: |g'/g| = 2 / r, |g''/g| = 6 / r^2.
  const double corr = 6.0 / (r * r * a2) + 2.0 * std::abs(d3) / (r * a2 * a2) +
                      std::abs(d4) / (a2 * a2) + d3 * d3 / (a2 * a2 * a2);
  return {std::polar(lead, arg), lead * corr};
}

struct Oscillatory {
  cplx value;  // int_R^inf e^{i phi} r^{-2} dr
  double error;
};

// Quadrature windows around R and around every stationary point of phi; the
// monotone segments between them are integrated by parts. A window side grows
// (its log-width doubles) while the remainder on the adjacent segment exceeds
// its share of abs_budget.
Oscillatory oscillatory_tail(const Phase& p, double R, double abs_budget, const QuadSpec& q) {
  struct Window {
    double center, lo, hi;
    int roots;
  };
  std::vector<Window> w{{R, R, R, 0}};
  for (double r : stationary_points(p, R)) {
    w.push_back({r, r / (1.0 + 1e-4), r * (1.0 + 1e-4), 1});
  }
  auto widen_hi = [](Window& x) {
    x.hi = x.hi == x.center ? 2.0 * x.center : x.center * std::pow(x.hi / x.center, 2.0);
  };
  auto widen_lo = [](Window& x) { x.lo = std::max(x.center * std::pow(x.lo / x.center, 2.0), 0.0); };

  for (int iter = 0; iter < 400; ++iter) {
    std::vector<Window> merged{w.front()};
    for (std::size_t i = 1; i < w.size(); ++i) {
      if (w[i].lo <= merged.back().hi) {
        merged.back().hi = std::max(merged.back().hi, w[i].hi);
        merged.back().roots += w[i].roots;
      } else {
        merged.push_back(w[i]);
      }
    }
    w = std::move(merged);
    if (w.back().hi >= kTailCap) break;
    const double share = abs_budget / static_cast<double>(w.size());
    bool settled = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double A = w[i].hi;
      const double B = i + 1 < w.size() ? w[i + 1].lo : std::numeric_limits<double>::infinity();
      if (ibp_error(p, A, B) <= share) continue;
      settled = false;
      if (std::isfinite(B) && std::abs(last_term(p, B)) > std::abs(last_term(p, A))) {
        widen_lo(w[i + 1]);
      } else {
        widen_hi(w[i]);
      }
    }
    if (settled) break;
  }

  Oscillatory out{};
  auto f = [&p](double u) { return std::polar(std::exp(-u), p.at_u(u)); };
  for (std::size_t i = 0; i < w.size(); ++i) {
    const StationaryTerm st = i > 0 && w[i].roots == 1 ? stationary_term(p, w[i].center)
                                                       : StationaryTerm{{}, std::numeric_limits<double>::infinity()};
    if (st.error <= abs_budget / static_cast<double>(w.size())) {
      // Isolated stationary point far out: the leading term plus the boundary
      // terms of the window edges, which cancel against the adjacent segments.
      out.value += st.value + ibp_boundary(p, w[i].lo) - ibp_boundary(p, w[i].hi);
      out.error += st.error;
    } else if (w[i].hi > w[i].lo) {
      const auto br = phase_breaks(p, std::log(w[i].lo), std::log(w[i].hi));
      const auto res = quad::integrate(f, std::span<const double>(br),
                                       abs_budget / static_cast<double>(w.size()), 0.0,
                                       q.max_subdivisions + static_cast<int>(br.size()));
      if (!res.converged) {
        throw QuadratureError("symbol: stationary-phase quadrature did not converge",
                              std::abs(res.value), res.error);
      }
      out.value += res.value;
      out.error += res.error;
    }
    const double A = w[i].hi;
    if (A >= kTailCap) {
      out.error += 2.0 / A;
      continue;
    }
    const double B = i + 1 < w.size() ? w[i + 1].lo : std::numeric_limits<double>::infinity();
    out.value += ibp_boundary(p, A) - (std::isfinite(B) ? ibp_boundary(p, B) : cplx{});
    out.error += ibp_error(p, A, B);
  }
  return out;
}

template <bool Complex>
using RadialValue = std::conditional_t<Complex, cplx, double>;

template <bool Complex>
struct RadialResult {
  RadialValue<Complex> value{};
  double error = 0.0;
};

// Radial part of the symbol along one direction:
//   int_0^inf (1 - cos phi) r^{-2} dr                     (Complex = false)
//   int_0^inf (1 - e^{i phi} + 1_{r<1} i phi) r^{-2} dr    (Complex = true)
template <bool Complex>
RadialResult<Complex> radial_symbol(const Phase& p, const QuadSpec& q) {
  using T = RadialValue<Complex>;
  RadialResult<Complex> out;
  if (p.empty()) return out;

  // Small-r region: Taylor expansion of the integrand to leading order.
  const double delta = std::sqrt(q.rel_tol);
  const auto n = static_cast<double>(p.size());
  double r_lo = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    r_lo = std::min(r_lo, std::pow(delta / (n * std::abs(p.c[i])), 1.0 / p.a[i]));
  }
  double small_re = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double s = p.a[i] + p.a[j] - 1.0;
      small_re += 0.5 * p.c[i] * p.c[j] * std::pow(r_lo, s) / s;
    }
  }
  T small{};
  double small_err = std::abs(small_re) * delta * delta / 12.0;
  if constexpr (Complex) {
    double small_im = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = 0; j < p.size(); ++j) {
        for (std::size_t k = 0; k < p.size(); ++k) {
          const double s = p.a[i] + p.a[j] + p.a[k] - 1.0;
          small_im += p.c[i] * p.c[j] * p.c[k] * std::pow(r_lo, s) / (6.0 * s);
        }
      }
    }
    small = cplx(small_re, small_im);
    small_err += std::abs(small_im) * delta * delta / 20.0;
  } else {
    small = small_re;
  }

  auto integrand = [&p](double u) -> T {
    const double phi = p.at_u(u);
    const double w = std::exp(-u);
    const double s = std::sin(0.5 * phi);
    const double re = 2.0 * s * s * w;
    if constexpr (Complex) {
      const double im = u < 0.0 ? phi_minus_sin(phi) : -std::sin(phi);
      return cplx(re, im * w);
    } else {
      return re;
    }
  };

  // The tail starts once the phase is large; beyond it the "1" part integrates
  // exactly and e^{i phi} is handled by oscillatory_tail.
  double R = r_lo;
  while (R < kTailCap && std::abs(p.deriv(R, 0)) < kTailPhase) R *= 2.0;
  const bool asymptotic = R < kTailCap;
  if (!asymptotic) R = std::max(q.R_max, r_lo * 2.0);

  std::vector<double> br{std::log(r_lo)};
  if (r_lo < 1.0 && R > 1.0) br.push_back(0.0);
  br.push_back(std::log(R));
  auto mid = quad::integrate(integrand, std::span<const double>(br), 0.0, 0.25 * q.rel_tol,
                             q.max_subdivisions);
  if (!mid.converged) {
    throw QuadratureError("symbol: radial quadrature did not converge", std::abs(mid.value),
                          mid.error);
  }
  T total = small + mid.value;
  double err = small_err + mid.error;

  if (!asymptotic) {
    // Brute-force cut: the constant part of the tail is exact, the oscillating
    // part is bounded by 1 / R.
    if constexpr (Complex) {
      total += cplx(1.0 / R, 0.0);
    } else {
      total += 1.0 / R;
    }
    out.value = total;
    out.error = err + 1.0 / R;
    return out;
  }

  const Oscillatory osc = oscillatory_tail(p, R, 0.05 * q.rel_tol * std::abs(total), q);
  if constexpr (Complex) {
    cplx tail = cplx(1.0 / R, 0.0) - osc.value;
    if (R < 1.0) {
      double comp = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) comp += p.c[i] * compensator_integral(p.a[i], R);
      tail += cplx(0.0, comp);
    }
    total += tail;
  } else {
    total += 1.0 / R - osc.value.real();
  }
  out.value = total;
  out.error = err + osc.error;
  return out;
}

// Uniform sigma on S^2: the sphere average of cos <theta, v> is sin|v| / |v|, so
//   q = m int_0^inf (1 - sinc rho(r)) r^{-2} dr,  rho(r)^2 = sum_i w_i r^{2 a_i},
// with rho increasing. The tail beyond R is 1 / R minus the imaginary part of
// int_R^inf e^{i rho} / (rho r^2) dr, integrated by parts.
Estimate symbol_uniform_sphere3(const EigenData& eig, const Vector& xi, double mass,
                                const QuadSpec& q) {
  const Vector z = eig.vectors.transpose() * xi;
  std::vector<double> a2;
  std::vector<double> w;
  for (int i = 0; i < eig.dim(); ++i) {
    if (z(i) != 0.0) {
      a2.push_back(2.0 * eig.values(i));
      w.push_back(z(i) * z(i));
    }
  }
  auto rho = [&](double r) {
    double s2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s2 += w[i] * std::pow(r, a2[i]);
    return std::sqrt(s2);
  };
  auto one_minus_sinc = [](double x) {
    if (x < 1e-2) {
      const double x2 = x * x;
      return x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
    }
    return 1.0 - std::sin(x) / x;
  };
  auto ibp = [&](double A) {
    // rho' needs one order more of rho.
    constexpr int M = kIbpTerms + 2;
    std::array<double, M> s2{};
    for (std::size_t i = 0; i < w.size(); ++i) {
      double b = w[i] * std::pow(A, a2[i]);
      for (int j = 0; j < M; ++j) {
        s2[j] += b;
        b *= (a2[i] - j) / (j + 1);
      }
    }
    std::array<double, M> y{};  // rho = sqrt(s2)
    y[0] = std::sqrt(s2[0]);
    for (int j = 1; j < M; ++j) {
      double v = s2[j];
      for (int m = 1; m < j; ++m) v -= y[m] * y[j - m];
      y[j] = v / (2.0 * y[0]);
    }
    Series d{};
    for (int j = 0; j <= kIbpTerms; ++j) d[j] = (j + 1) * y[j + 1] / A;
    const Series inv = inverse_square(A);
    Series f{};
    for (int j = 0; j <= kIbpTerms; ++j) {
      double v = inv[j];
      for (int m = 1; m <= j; ++m) v -= y[m] * f[j - m];
      f[j] = v / y[0];
    }
    return ibp_series(f, d, A, y[0]);
  };
  auto tail_error = [&](double A) {
    double hmax = 0.0;
    for (double r = A; r < 1e300; r *= std::pow(2.0, 0.25)) {
      const double h = ibp(r).last;
      hmax = std::max(hmax, h);
      if (r > 8.0 * A && h < 1e-3 * hmax) break;
    }
    return 3.0 * hmax;
  };

  // Below r_lo, 1 - sinc rho = rho^2 / 6 to relative accuracy rho^2 / 20.
  const double delta = std::sqrt(q.rel_tol);
  double r_lo = 1.0;
  while (rho(r_lo) > delta) r_lo *= 0.5;
  while (rho(2.0 * r_lo) <= delta) r_lo *= 2.0;
  double small = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    small += w[i] * std::pow(r_lo, a2[i] - 1.0) / (6.0 * (a2[i] - 1.0));
  }
  double err = small * q.rel_tol / 20.0;

  auto integrand = [&](double u) { return one_minus_sinc(rho(std::exp(u))) * std::exp(-u); };
  auto segment = [&](double lo, double hi) {
    std::vector<double> br{lo};
    if (lo < 0.0 && hi > 0.0) br.push_back(0.0);
    br.push_back(hi);
    const auto res = quad::integrate(integrand, std::span<const double>(br), 0.0,
                                     0.25 * q.rel_tol, q.max_subdivisions);
    if (!res.converged) {
      throw QuadratureError("symbol: radial quadrature did not converge", res.value, res.error);
    }
    return res;
  };
  double R = r_lo;
  while (rho(R) < kTailPhase) R *= 2.0;
  auto mid = segment(std::log(r_lo), std::log(R));
  double total = small + mid.value;
  err += mid.error;
  // Push R out until the integration-by-parts remainder fits the budget.
  double tail_err = tail_error(R);
  while (tail_err > 0.05 * q.rel_tol * total && R < kTailCap) {
    const auto more = segment(std::log(R), std::log(4.0 * R));
    total += more.value;
    err += more.error;
    R *= 4.0;
    tail_err = tail_error(R);
  }
  total += 1.0 / R - ibp(R).boundary.imag();
  return {mass * total, mass * (err + tail_err)};
}

bool uniform_sphere3(const SpectralMeasure& sigma) {
  return sigma.kind() == SpectralMeasure::Kind::uniform && sigma.dim() == 3;
}

double sphere_tol(const QuadSpec& q) { return q.angular_tol(); }

// Eigenbasis of E in which xi has a single nonzero coordinate inside every
// repeated eigenspace. The per-direction symbol is then smooth off the
// coordinate hyperplanes of this basis.
Matrix adapted_basis(const EigenData& eig, const Vector& xi) {
  Matrix basis = eig.vectors;
  const int d = eig.dim();
  int start = 0;
  while (start < d) {
    int end = start + 1;
    while (end < d && std::abs(eig.values(end) - eig.values(start)) <=
                          1e-14 * std::abs(eig.values(start))) {
      ++end;
    }
    const int k = end - start;
    if (k > 1) {
      const Matrix block = eig.vectors.middleCols(start, k);
      const Vector p = block.transpose() * xi;
      if (p.norm() > 0.0) {
        Eigen::HouseholderQR<Matrix> qr(p);
        const Matrix q = qr.householderQ();
        basis.middleCols(start, k) = block * q;
      }
    }
    start = end;
  }
  return basis;
}

// Per-direction symbol integrated over sigma with an angular rule aligned to
// the cusps of the integrand.
Estimate symbol_over_sphere(const SpectralMeasure& sigma, const EigenData& eig,
                            const Vector& xi,
                            const std::function<Estimate(const Vector&)>& per_direction,
                            const QuadSpec& q) {
  const SphereIntegral s = integrate_sphere_aligned(sigma, adapted_basis(eig, xi), per_direction,
                                                    sphere_tol(q), q.max_subdivisions);
  if (!s.converged) {
    throw QuadratureError("symbol: angular quadrature did not converge", s.value, s.error);
  }
  return {s.value, s.error};
}

// Adaptive u = ln r integral of g(r) r^{-2} dr on (0, R_max], with the region
// below r_lo bounded by K r_lo^{2a-1} / (2a-1).
Estimate radial_generic(const std::function<double(double)>& g, double a, double K,
                        const QuadSpec& q) {
  auto integrand = [&g](double u) { return g(std::exp(u)) * std::exp(-u); };
  auto run = [&](double lo, double hi, double abs_tol, double rel) {
    std::vector<double> br{lo};
    if (lo < 0.0 && hi > 0.0) br.push_back(0.0);
    br.push_back(hi);
    auto res = quad::integrate(integrand, std::span<const double>(br), abs_tol, rel,
                               q.max_subdivisions);
    if (!res.converged) {
      throw QuadratureError("levy_integrate: radial quadrature did not converge", res.value,
                            res.error);
    }
    return res;
  };
  const double s = 2.0 * a - 1.0;
  auto remainder = [&](double u_lo) { return K * std::exp(s * u_lo) / s; };
  // Rounding in a difference of two O(K) values, weighted by r^{-2} down to e^{u_lo}.
  auto noise = [&](double u_lo) {
    return 4.0 * std::numeric_limits<double>::epsilon() * K * std::exp(-u_lo);
  };

  // Below u_floor rounding exceeds the remainder bound; integrating further adds only noise.
  const double u_floor = std::log(4.0 * std::numeric_limits<double>::epsilon() * s) / (2.0 * a);
  double u_lo = std::log(1e-4);
  auto first = run(u_lo, std::log(q.R_max), noise(u_lo), 0.25 * q.rel_tol);
  double value = first.value;
  double err = first.error;
  while (remainder(u_lo) > std::max(0.1 * q.rel_tol * std::abs(value), noise(u_lo)) &&
         u_lo > std::max(u_floor, -690.0)) {
    const double next = std::max({u_lo - 20.0, u_floor, -700.0});
    auto piece =
        run(next, u_lo, std::max(0.05 * q.rel_tol * std::abs(value), noise(next)), 0.0);
    value += piece.value;
    err += piece.error;
    u_lo = next;
  }
  return {value, err + remainder(u_lo)};
}

// Sums a per-direction estimate over sigma.
Estimate over_sphere(const SpectralMeasure& sigma,
                     const std::function<Estimate(const Vector&)>& per_direction,
                     const QuadSpec& q) {
  const SphereIntegral s = integrate_sphere(sigma, per_direction, sphere_tol(q));
  return {s.value, s.error};
}

void check_point(const OslModel& model, const Vector& x, const char* who) {
  if (x.size() != model.dim()) {
    throw std::invalid_argument(std::string(who) + ": state has wrong dimension");
  }
}

}  // namespace

Estimate levy_integrate(const OslModel& model, const Vector& x,
                        const std::function<double(const Vector&)>& f, double K,
                        const QuadSpec& quad) {
  quad.validate();
  check_point(model, x, "levy_integrate");
  if (!(K >= 0.0)) throw std::invalid_argument("levy_integrate: K must be >= 0");
  const EigenData eig = model.field().eigen_at(x);
  Estimate e = over_sphere(
      model.sigma(),
      [&](const Vector& theta) {
        const Vector z = eig.vectors.transpose() * theta;
        Vector y(z.size());
        auto g = [&](double r) {
          for (int i = 0; i < z.size(); ++i) y(i) = std::pow(r, eig.values(i)) * z(i);
          return f(eig.vectors * y);
        };
        return radial_generic(g, eig.lambda_min(), K, quad);
      },
      quad);
  e.error += K * model.sigma().total_mass() / quad.R_max;
  return e;
}

Estimate symbol_symmetric(const OslModel& model, const Vector& x, const Vector& xi,
                          const QuadSpec& quad) {
  if (!model.symmetric()) {
    throw ContractError(
        "symbol_symmetric: spectral measure is not symmetric; use symbol_general");
  }
  quad.validate();
  check_point(model, x, "symbol_symmetric");
  if (xi.size() != model.dim()) throw std::invalid_argument("symbol_symmetric: bad xi");
  if (xi.isZero(0.0)) return {0.0, 0.0};
  const EigenData eig = model.field().eigen_at(x);
  if (uniform_sphere3(model.sigma())) {
    return symbol_uniform_sphere3(eig, xi, model.sigma().total_mass(), quad);
  }
  return symbol_over_sphere(
      model.sigma(), eig, xi,
      [&](const Vector& theta) {
        const auto r = radial_symbol<false>(make_phase(eig, theta, xi), quad);
        return Estimate{r.value, r.error};
      },
      quad);
}

ComplexEstimate symbol_general(const OslModel& model, const Vector& x, const Vector& xi,
                               const QuadSpec& quad) {
  quad.validate();
  check_point(model, x, "symbol_general");
  if (xi.size() != model.dim()) throw std::invalid_argument("symbol_general: bad xi");
  if (xi.isZero(0.0)) return {{0.0, 0.0}, 0.0};
  const EigenData eig = model.field().eigen_at(x);
  const SpectralMeasure& sigma = model.sigma();
  if (sigma.kind() == SpectralMeasure::Kind::discrete) {
    ComplexEstimate out;
    for (std::size_t i = 0; i < sigma.atoms().size(); ++i) {
      const auto r = radial_symbol<true>(make_phase(eig, sigma.atoms()[i], xi), quad);
      out.value += sigma.weights()[i] * r.value;
      out.error += sigma.weights()[i] * r.error;
    }
    return out;
  }
  // Uniform measures are reflection invariant, so the odd imaginary part vanishes.
  if (uniform_sphere3(sigma)) {
    const Estimate re = symbol_uniform_sphere3(eig, xi, sigma.total_mass(), quad);
    return {{re.value, 0.0}, re.error};
  }
  const Estimate re = symbol_over_sphere(
      sigma, eig, xi,
      [&](const Vector& theta) {
        const auto r = radial_symbol<true>(make_phase(eig, theta, xi), quad);
        return Estimate{r.value.real(), r.error};
      },
      quad);
  return {{re.value, 0.0}, re.error};
}

double scaling_residual(const OslModel& model, const Vector& x, const Vector& xi, double t,
                        const QuadSpec& quad) {
  if (!(t > 0.0)) throw std::domain_error("scaling_residual: t must be positive");
  if (t == 1.0) return 0.0;
  const EigenData eig = model.field().eigen_at(x);
  const double q1 = symbol_symmetric(model, x, xi, quad).value;
  const double qt = symbol_symmetric(model, x, apply_pow(eig, t, xi), quad).value;
  return std::abs(qt - t * q1) / (t * q1 + 1e-300);
}

SymbolShapes symbol_bounds(const OslModel& model, const Vector& x, const Vector& xi) {
  const double n = xi.norm();
  if (!(n > 0.0)) throw std::domain_error("symbol_bounds: xi must be nonzero");
  const EigenData eig = model.field().eigen_at(x);
  const double s1 = std::pow(n, 1.0 / eig.lambda_min());
  const double s2 = std::pow(n, 1.0 / eig.lambda_max());
  return {std::min(s1, s2), std::max(s1, s2)};
}

IndicesInfinity bg_indices_infinity(const OslModel& model, const Vector& x) {
  const EigenData eig = model.field().eigen_at(x);
  return {1.0 / eig.lambda_min(), 1.0 / eig.lambda_max()};
}

IndexAtZero bg_indices_zero(const OslModel& model, const Box& box, int grid_n) {
  if (!model.field().b()) {
    throw ContractError(
        "bg_indices_zero: the exponent field declares no upper bound b; indices at zero "
        "need bounded coefficients");
  }
  if (grid_n < 2) throw std::invalid_argument("bg_indices_zero: grid_n must be >= 2");
  const int d = model.dim();
  if (box.lo.size() != d || box.hi.size() != d) {
    throw std::invalid_argument("bg_indices_zero: box dimension mismatch");
  }
  IndexAtZero out{std::numeric_limits<double>::infinity(), Vector(d), false, {}};
  std::vector<int> idx(d, 0);
  std::vector<int> best_idx(d, 0);
  Vector x(d);
  bool done = false;
  while (!done) {
    for (int k = 0; k < d; ++k) {
      x(k) = box.lo(k) + (box.hi(k) - box.lo(k)) * idx[k] / double(grid_n - 1);
    }
    const double v = 1.0 / model.field().eigen_at(x).lambda_max();
    if (v < out.value) {
      out.value = v;
      out.argmin = x;
      best_idx = idx;
    }
    int k = 0;
    while (k < d && ++idx[k] == grid_n) idx[k++] = 0;
    done = k == d;
  }
  const double b = *model.field().b();
  const bool attains_bound = std::abs(out.value - 1.0 / b) <= 1e-12 * out.value;
  if (!attains_bound) {
    for (int k = 0; k < d; ++k) {
      if (best_idx[k] == 0 || best_idx[k] == grid_n - 1) out.boundary_warning = true;
    }
  }
  if (out.boundary_warning) {
    std::ostringstream os;
    os << "bg_indices_zero: infimum " << out.value << " found on the box boundary and above "
       << "1/b = " << 1.0 / b << "; the global infimum may lie outside the box";
    out.warning = os.str();
  }
  return out;
}

Estimate apply_generator(const OslModel& model, const TestFunction& u, const Vector& x,
                         const QuadSpec& quad) {
  quad.validate();
  check_point(model, x, "apply_generator");
  if (!u.value) throw std::invalid_argument("apply_generator: empty test function");
  const bool sym = model.symmetric();
  if (!sym && !u.gradient) {
    throw std::invalid_argument("apply_generator: non-symmetric model needs a gradient");
  }
  const EigenData eig = model.field().eigen_at(x);
  const double ux = u.value(x);
  const Vector grad = sym ? Vector() : u.gradient(x);
  const Matrix hess = u.hessian ? Matrix(eig.vectors.transpose() * u.hessian(x) * eig.vectors)
                                : Matrix();
  const double H = u.hessian_norm_bound;
  const double sup = u.sup_norm;
  const double lam = eig.lambda_min();
  const double delta = std::sqrt(quad.rel_tol);

  auto point = [&](const Vector& z, double r) {
    Vector y(z.size());
    for (int i = 0; i < z.size(); ++i) y(i) = std::pow(r, eig.values(i)) * z(i);
    return Vector(eig.vectors * y);
  };
  auto increment = [&](const Vector& z, double r) {
    const Vector y = point(z, r);
    if (sym) return 0.5 * (u.value(x + y) + u.value(x - y)) - ux;
    double v = u.value(x + y) - ux;
    if (r < 1.0) v -= y.dot(grad);
    return v;
  };
  auto integrand = [&](const Vector& z) {
    return [&, z](double uu) { return increment(z, std::exp(uu)) * std::exp(-uu); };
  };

  Estimate e = over_sphere(
      model.sigma(),
      [&](const Vector& theta) -> Estimate {
        const Vector z = eig.vectors.transpose() * theta;
        if (hess.size() == 0) {
          return radial_generic([&](double r) { return increment(z, r); }, lam,
                                0.5 * H + 2.0 * sup, quad);
        }
        // Below r_lo the increment is replaced by its quadratic Taylor term.
        const double scale = H > 0.0 ? std::sqrt(std::max(sup, 1e-300) / H) : 1.0;
        const double r_lo = std::min(1.0, std::pow(delta * scale, 1.0 / lam));
        double small = 0.0;
        for (int i = 0; i < z.size(); ++i) {
          for (int j = 0; j < z.size(); ++j) {
            const double p = eig.values(i) + eig.values(j) - 1.0;
            small += 0.5 * z(i) * z(j) * hess(i, j) * std::pow(r_lo, p) / p;
          }
        }
        const double small_err =
            std::abs(small) * (sym ? delta * delta / 12.0 : delta / 3.0);
        auto f = integrand(z);
        std::vector<double> br{std::log(r_lo)};
        if (r_lo < 1.0) br.push_back(0.0);
        if (quad.R_max > 1.0) br.push_back(std::log(quad.R_max));
        if (br.size() < 2) return {small, small_err};
        const double noise = 4.0 * std::numeric_limits<double>::epsilon() * sup / r_lo;
        auto res = quad::integrate(f, std::span<const double>(br), noise, 0.25 * quad.rel_tol,
                                   quad.max_subdivisions);
        if (res.converged && H > 0.0 && sup > 0.0) {
          // u cannot oscillate faster than sqrt(H / sup) along y. A panel spanning
          // many such oscillations can pass the Kronrod check by accident, so
          // redo the integral on panels with bounded oscillation wherever a
          // panel's size bound 2 sup e^{-u} h still matters.
          const double omega = std::sqrt(H / sup);
          const double tiny = 1e-3 * quad.rel_tol * std::max(std::abs(res.value), noise);
          auto span_of = [&](double a, double b) {
            return omega * (point(z, std::exp(b)) - point(z, std::exp(a))).norm();
          };
          std::vector<double> fine{br.front()};
          for (std::size_t k = 1; k < br.size(); ++k) {
            double a = br[k - 1];
            while (a < br[k]) {
              double h = br[k] - a;
              while (span_of(a, a + h) > kPanelPhase && 2.0 * sup * std::exp(-a) * h > tiny) {
                h *= 0.5;
              }
              a = h < br[k] - a ? a + h : br[k];
              fine.push_back(a);
              if (fine.size() > kMaxPhaseBreaks) break;
            }
          }
          if (fine.size() > br.size() && fine.size() <= kMaxPhaseBreaks) {
            res = quad::integrate(f, std::span<const double>(fine), noise, 0.25 * quad.rel_tol,
                                  quad.max_subdivisions + static_cast<int>(fine.size()));
          }
        }
        if (!res.converged) {
          throw QuadratureError("apply_generator: radial quadrature did not converge",
                                res.value + small, res.error);
        }
        return {res.value + small, res.error + small_err};
      },
      quad);
  // Beyond R_max: -u(x) integrates exactly; the remaining part is bounded by sup|u|.
  const double m = model.sigma().total_mass();
  e.value -= ux * m / quad.R_max;
  e.error += sup * m / quad.R_max;
  return e;
}

}  // namespace osl
