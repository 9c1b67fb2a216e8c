#include "oslsim/simulator.hpp"

#include "oslsim/quadrature.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace osl {

void SimConfig::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("SimConfig: horizon must be positive and finite");
  }
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("SimConfig: eps must lie in (0,1)");
  if (record_mode == RecordMode::grid && !(grid_dt > 0.0)) {
    throw std::invalid_argument("SimConfig: grid record mode needs grid_dt > 0");
  }
  if (stop_radius && !(*stop_radius > 0.0)) {
    throw std::invalid_argument("SimConfig: stop_radius must be positive");
  }
}

Vector PathSample::state_at(double t) const {
  if (t < 0.0 || t > horizon) throw std::domain_error("PathSample::state_at: t outside [0, T]");
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto k = static_cast<std::size_t>(it - times.begin());  // events at or before t
  if (stopped && k == size() && k > 0) return state(k - 1);
  Vector x = k == 0 ? x0 : Vector(state(k - 1));
  if (has_drift()) {
    const double t0 = k == 0 ? 0.0 : times[k - 1];
    x += (t - t0) * Eigen::Map<const Vector>(drifts.data() + k * dim, dim);
  }
  return x;
}

Vector PathSample::final_state() const {
  if (stopped && size() > 0) return state(size() - 1);
  return state_at(horizon);
}

double truncation_error_bound(const OslModel& model, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("truncation_error_bound: eps must lie in (0,1]");
  }
  const double s = 2.0 * model.field().a() - 1.0;
  return model.sigma().total_mass() * std::pow(eps, s) / s;
}

namespace {

// int_eps^1 r^{a-2} dr
double drift_weight(double a, double eps) {
  if (std::abs(a - 1.0) < 1e-12) return -std::log(eps);
  return (1.0 - std::pow(eps, a - 1.0)) / (a - 1.0);
}

// Eigendecomposition of E(x) without heap traffic for constant and 2x2 fields.
class EigenSource {
 public:
  explicit EigenSource(const ExponentField& field) : field_(field) {
    if (field.is_constant()) eig_ = field.eigen_at(Vector::Zero(field.dim()));
  }

  const EigenData& at(const Vector& x) {
    if (field_.is_constant()) return eig_;
    const int d = field_.dim();
    if (d == 1) {
      eig_.values.resize(1);
      eig_.vectors.setOnes(1, 1);
      eig_.values(0) = field_.at(x)(0, 0);
    } else if (d == 2) {
      const Matrix m = field_.at(x).matrix();
      Eigen::Matrix2d m2 = m;
      solver2_.computeDirect(m2);
      eig_.values = solver2_.eigenvalues();
      eig_.vectors = solver2_.eigenvectors();
    } else {
      eig_ = eigen_decompose(field_.at(x));
    }
    return eig_;
  }

 private:
  const ExponentField& field_;
  EigenData eig_;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver2_;
};

// out = r^{E} theta in the eigenbasis of E.
void power_apply(const EigenData& eig, double r, const Vector& theta, Vector& z, Vector& out) {
  z.noalias() = eig.vectors.transpose() * theta;
  const double lr = std::log(r);
  for (int i = 0; i < z.size(); ++i) z(i) *= std::exp(eig.values(i) * lr);
  out.noalias() = eig.vectors * z;
}

class DirectionSampler {
 public:
  explicit DirectionSampler(const SpectralMeasure& sigma) : sigma_(sigma) {
    if (sigma.kind() == SpectralMeasure::Kind::discrete) {
      double c = 0.0;
      for (double w : sigma.weights()) cum_.push_back(c += w);
    }
  }

  void draw(Rng& rng, Vector& theta) {
    if (sigma_.kind() == SpectralMeasure::Kind::uniform) {
      theta = sigma_.sample_direction(rng);
      return;
    }
    std::size_t i = 0;
    if (cum_.size() > 1) {
      const double u = rng.uniform() * cum_.back();
      i = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
      i = std::min(i, cum_.size() - 1);
    }
    theta = sigma_.atoms()[i];
  }

 private:
  const SpectralMeasure& sigma_;
  std::vector<double> cum_;
};

void append(std::vector<double>& dst, const Vector& v) {
  dst.insert(dst.end(), v.data(), v.data() + v.size());
}

void record_grid(PathSample& p, double dt) {
  const auto steps = static_cast<std::size_t>(std::floor(p.horizon / dt * (1.0 + 1e-12)));
  p.grid_times.reserve(steps + 1);
  p.grid_states.reserve((steps + 1) * p.dim);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = std::min(p.horizon, static_cast<double>(k) * dt);
    p.grid_times.push_back(t);
    append(p.grid_states, p.state_at(t));
  }
}

}  // namespace

Vector compensator_drift(const OslModel& model, const Vector& x, double eps) {
  const int d = model.dim();
  Vector b = Vector::Zero(d);
  const SpectralMeasure& sigma = model.sigma();
  if (sigma.symmetric() || sigma.kind() == SpectralMeasure::Kind::uniform) return b;
  const EigenData eig = model.field().eigen_at(x);
  Vector g(d);
  for (int i = 0; i < d; ++i) g(i) = drift_weight(eig.values(i), eps);
  for (std::size_t k = 0; k < sigma.atoms().size(); ++k) {
    const Vector z = eig.vectors.transpose() * sigma.atoms()[k];
    b -= sigma.weights()[k] * (eig.vectors * g.cwiseProduct(z));
  }
  return b;
}

DriftMode resolve_drift_mode(const OslModel& model, DriftMode requested, std::string* warning) {
  if (requested != DriftMode::automatic) return requested;
  if (model.symmetric()) return DriftMode::force_zero;
  if (warning) {
    *warning =
        "drift_mode auto with a non-symmetric spectral measure: using the numeric "
        "compensator drift (frozen between events, first-order accurate)";
  }
  return DriftMode::force_numeric;
}

PathSample simulate_path(const OslModel& model, const Vector& x0, const SimConfig& config,
                         Rng& rng, std::uint64_t seed_used) {
  config.validate();
  const int d = model.dim();
  if (x0.size() != d) throw std::invalid_argument("simulate_path: x0 has wrong dimension");
  const bool drift_on = resolve_drift_mode(model, config.drift_mode) == DriftMode::force_numeric;

  PathSample p;
  p.dim = d;
  p.x0 = x0;
  p.horizon = config.horizon;
  p.eps_used = config.eps;
  p.seed_used = seed_used;

  const double rate = model.sigma().total_mass() / config.eps;
  const auto expected = static_cast<std::size_t>(std::min(rate * config.horizon * 1.1 + 16.0, 1e7));
  p.times.reserve(expected);
  p.radii.reserve(expected);
  p.states.reserve(expected * d);
  p.thetas.reserve(expected * d);
  p.jumps.reserve(expected * d);

  EigenSource eigen(model.field());
  DirectionSampler directions(model.sigma());
  Vector x = x0;
  Vector pre(d);
  Vector theta(d);
  Vector z(d);
  Vector jump(d);
  Vector drift = Vector::Zero(d);
  if (drift_on) {
    drift = compensator_drift(model, x, config.eps);
    append(p.drifts, drift);
  }
  const double stop2 = config.stop_radius ? *config.stop_radius * *config.stop_radius
                                          : std::numeric_limits<double>::infinity();

  double t = 0.0;
  while (true) {
    const double t_next = t + rng.exponential(rate);
    if (t_next > config.horizon) break;
    pre = x;
    if (drift_on) pre += (t_next - t) * drift;
    t = t_next;
    directions.draw(rng, theta);
    const double r = config.eps / rng.uniform_open();
    power_apply(eigen.at(pre), r, theta, z, jump);
    x = pre + jump;

    p.times.push_back(t);
    p.radii.push_back(r);
    append(p.states, x);
    append(p.thetas, theta);
    append(p.jumps, jump);
    if (drift_on) {
      drift = compensator_drift(model, x, config.eps);
      append(p.drifts, drift);
    }
    if ((x - x0).squaredNorm() > stop2) {
      p.stopped = true;
      break;
    }
  }
  if (config.record_mode == RecordMode::grid) record_grid(p, config.grid_dt);
  return p;
}

PathSample simulate_indexed_path(const OslModel& model, const Vector& x0,
                                 const SimConfig& config, std::uint64_t index) {
  const std::uint64_t s = derive_seed(config.seed, index);
  Rng rng(s);
  return simulate_path(model, x0, config, rng, s);
}

int resolve_threads(std::optional<int> requested) {
  if (requested && *requested >= 1) return *requested;
  if (const char* env = std::getenv("OSLSIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return 1;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

Ensemble simulate_ensemble(const OslModel& model, const Vector& x0, const SimConfig& config,
                           std::size_t n_paths, int threads) {
  config.validate();
  if (n_paths < 1) throw std::invalid_argument("simulate_ensemble: n_paths must be >= 1");
  Ensemble e;
  e.config = config;
  e.x0 = x0;
  std::string warning;
  resolve_drift_mode(model, config.drift_mode, &warning);
  if (!warning.empty()) e.warnings.push_back(warning);
  e.paths = map_paths(
      model, x0, config, n_paths, [](const PathSample& p) { return p; }, threads);
  return e;
}

PathSample coarsen_path(const PathSample& path, const OslModel& model, double eps) {
  if (!(eps >= path.eps_used && eps < 1.0)) {
    throw std::invalid_argument("coarsen_path: eps must lie in [eps_used, 1)");
  }
  const int d = path.dim;
  const bool drift_on = path.has_drift();
  PathSample p;
  p.dim = d;
  p.x0 = path.x0;
  p.horizon = path.horizon;
  p.eps_used = eps;
  p.seed_used = path.seed_used;

  EigenSource eigen(model.field());
  Vector x = path.x0;
  Vector pre(d);
  Vector z(d);
  Vector jump(d);
  Vector drift = Vector::Zero(d);
  if (drift_on) {
    drift = compensator_drift(model, x, eps);
    append(p.drifts, drift);
  }
  double t = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (!(path.radii[k] > eps)) continue;
    pre = x;
    if (drift_on) pre += (path.times[k] - t) * drift;
    t = path.times[k];
    const Vector theta = path.theta(k);
    power_apply(eigen.at(pre), path.radii[k], theta, z, jump);
    x = pre + jump;
    p.times.push_back(t);
    p.radii.push_back(path.radii[k]);
    append(p.states, x);
    append(p.thetas, theta);
    append(p.jumps, jump);
    if (drift_on) {
      drift = compensator_drift(model, x, eps);
      append(p.drifts, drift);
    }
  }
  p.stopped = path.stopped;
  if (!path.grid_times.empty()) {
    record_grid(p, path.grid_times.size() > 1 ? path.grid_times[1] : path.horizon);
  }
  return p;
}

double replay_residual(const PathSample& path, const OslModel& model) {
  const int d = path.dim;
  EigenSource eigen(model.field());
  Vector x = path.x0;
  Vector pre(d);
  Vector z(d);
  Vector jump(d);
  double t = 0.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < path.size(); ++k) {
    pre = x;
    if (path.has_drift()) {
      pre += (path.times[k] - t) * Eigen::Map<const Vector>(path.drifts.data() + k * d, d);
    }
    t = path.times[k];
    const Vector theta = path.theta(k);
    power_apply(eigen.at(pre), path.radii[k], theta, z, jump);
    x = pre + jump;
    worst = std::max(worst, (x - path.state(k)).cwiseAbs().maxCoeff());
    // Continue from the stored state so one defect is not counted repeatedly.
    x = path.state(k);
  }
  return worst;
}

CoefficientChecks sde_coefficient_checks(const OslModel& model, const Vector& x,
                                         const Vector& y, const QuadSpec& quad) {
  quad.validate();
  const EigenData ex = model.field().eigen_at(x);
  const EigenData ey = model.field().eigen_at(y);
  const double tol = quad.angular_tol();

  auto growth = [&](const Vector& theta) {
    const Vector z = ex.vectors.transpose() * theta;
    double s = 0.0;
    for (int i = 0; i < z.size(); ++i) s += z(i) * z(i) / (2.0 * ex.values(i) - 1.0);
    return s;
  };

  const double a = std::min(ex.lambda_min(), ey.lambda_min());
  const double s = 2.0 * a - 1.0;
  auto lipschitz = [&](const Vector& theta) -> Estimate {
    const Vector zx = ex.vectors.transpose() * theta;
    const Vector zy = ey.vectors.transpose() * theta;
    auto integrand = [&](double u) {
      Vector px = zx;
      Vector py = zy;
      for (int i = 0; i < px.size(); ++i) {
        px(i) *= std::exp(ex.values(i) * u);
        py(i) *= std::exp(ey.values(i) * u);
      }
      return (ex.vectors * px - ey.vectors * py).squaredNorm() * std::exp(-u);
    };
    // Below r0 the integrand is at most 4 r^{2a-2}.
    double u0 = -20.0;
    auto res = quad::integrate(integrand, u0, 0.0, 0.0, 0.25 * quad.rel_tol,
                               quad.max_subdivisions);
    double value = res.value;
    double err = res.error;
    while (4.0 * std::exp(s * u0) / s > 0.1 * quad.rel_tol * value && u0 > -700.0) {
      const double next = u0 - 40.0;
      auto piece = quad::integrate(integrand, next, u0, 0.05 * quad.rel_tol * value, 0.0,
                                   quad.max_subdivisions);
      value += piece.value;
      err += piece.error;
      u0 = next;
    }
    return {value, err + 4.0 * std::exp(s * u0) / s};
  };

  CoefficientChecks c{};
  c.growth_lhs = integrate_sphere(model.sigma(), std::function<double(const Vector&)>(growth), tol).value;
  c.lipschitz_lhs =
      x == y ? 0.0
             : integrate_sphere(model.sigma(), std::function<Estimate(const Vector&)>(lipschitz), tol)
                   .value;
  c.lipschitz_rhs_shape = (x - y).squaredNorm();
  return c;
}

}  // namespace osl
