#pragma once

// Globally adaptive 21-point Gauss-Kronrod quadrature for scalar, complex and
// matrix valued integrands on finite intervals.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <span>
#include <vector>

namespace osl::quad {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  int panels = 0;
  bool converged = false;
};

namespace detail {

// Kronrod abscissae (descending, last one is the centre) and weights.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208938183500, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd-indexed Kronrod abscissae 1, 3, 5, 7, 9.
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class T>
struct Panel {
  double a;
  double b;
  T value;
  double error;
};

template <class T, class F>
Panel<T> gk21(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  T fc = f(centre);
  T kronrod = kWgk[10] * fc;
  T gauss = 0.0 * fc;
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    T sum = f(centre - dx) + f(centre + dx);
    kronrod = kronrod + kWgk[j] * sum;
    if (j % 2 == 1) gauss = gauss + kWg[j / 2] * sum;
  }
  T value = half * kronrod;
  T diff = half * (kronrod - gauss);
  return {a, b, value, magnitude(diff)};
}

}  // namespace detail

/// Integrates f over [breaks.front(), breaks.back()], honouring every interior
/// break point. Stops when the summed panel error is below
/// max(abs_tol, rel_tol * |integral|) or after max_panels panels.
template <class F>
auto integrate(F&& f, std::span<const double> breaks, double abs_tol, double rel_tol,
               int max_panels) -> Result<std::decay_t<decltype(f(0.0))>> {
  using T = std::decay_t<decltype(f(0.0))>;
  using detail::Panel;
  Result<T> out;
  if (breaks.size() < 2) return out;

  auto worse = [](const Panel<T>& l, const Panel<T>& r) { return l.error < r.error; };
  std::priority_queue<Panel<T>, std::vector<Panel<T>>, decltype(worse)> heap(worse);
  std::vector<Panel<T>> settled;

  T total{};
  double total_err = 0.0;
  bool first = true;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    auto p = detail::gk21<T>(f, breaks[i], breaks[i + 1]);
    total = first ? p.value : T(total + p.value);
    first = false;
    total_err += p.error;
    heap.push(std::move(p));
  }
  int panels = static_cast<int>(heap.size());
  if (first) return out;

  auto target = [&] { return std::max(abs_tol, rel_tol * magnitude(total)); };
  while (!heap.empty() && total_err > target() && panels < max_panels) {
    Panel<T> worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const double width = worst.b - worst.a;
    if (width <= 1e-14 * std::max({1.0, std::abs(worst.a), std::abs(worst.b)}) ||
        !(mid > worst.a && mid < worst.b)) {
      settled.push_back(std::move(worst));
      continue;
    }
    auto left = detail::gk21<T>(f, worst.a, mid);
    auto right = detail::gk21<T>(f, mid, worst.b);
    total = total + (left.value + right.value - worst.value);
    total_err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++panels;
  }

  // Re-sum from scratch to shed drift from the incremental updates.
  T sum{};
  double err = 0.0;
  bool init = true;
  auto absorb = [&](const Panel<T>& p) {
    sum = init ? p.value : T(sum + p.value);
    init = false;
    err += p.error;
  };
  for (const auto& p : settled) absorb(p);
  while (!heap.empty()) {
    absorb(heap.top());
    heap.pop();
  }
  out.value = sum;
  out.error = err;
  out.panels = panels;
  out.converged = err <= std::max(abs_tol, rel_tol * magnitude(sum));
  return out;
}

template <class F>
auto integrate(F&& f, double a, double b, double abs_tol, double rel_tol, int max_panels) {
  const std::array<double, 2> breaks{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(breaks), abs_tol, rel_tol,
                   max_panels);
}

}  // namespace osl::quad
