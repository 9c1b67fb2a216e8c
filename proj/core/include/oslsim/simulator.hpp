#pragma once

// Event-driven simulation of the jump SDE
//   dX_t = int r^{E(X_{t-})} theta N~(dt, dtheta, dr)
// with jumps of radius r <= eps discarded and larger jumps interlaced exactly.

#include "oslsim/common.hpp"
#include "oslsim/rng.hpp"
#include "oslsim/symbol.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace osl {

enum class RecordMode { events_only, grid };
enum class DriftMode { automatic, force_zero, force_numeric };

struct SimConfig {
  double horizon = 1.0;
  double eps = 1e-3;
  std::uint64_t seed = 0;
  RecordMode record_mode = RecordMode::events_only;
  /// Grid spacing for RecordMode::grid.
  double grid_dt = 0.0;
  DriftMode drift_mode = DriftMode::automatic;
  /// Stop a path at the first event leaving the ball of this radius around x0.
  std::optional<double> stop_radius;

  void validate() const;
};

/// One trajectory. The path is right-continuous: state(k) holds from times[k]
/// until the next event, moving with drift(k) when a compensator drift is active.
/// Index -1 denotes the start (time 0, state x0).
struct PathSample {
  int dim = 0;
  Vector x0;
  double horizon = 0.0;
  double eps_used = 0.0;
  std::uint64_t seed_used = 0;
  bool stopped = false;  // ended early at stop_radius

  std::vector<double> times;
  std::vector<double> states;  // size() * dim, post-event states
  std::vector<double> radii;
  std::vector<double> thetas;  // size() * dim
  std::vector<double> jumps;   // size() * dim, r^{E(X_{t-})} theta
  /// (size() + 1) * dim when a drift is active: drift on [times[k], times[k+1])
  /// is stored at slot k + 1, slot 0 covers [0, times[0]). Empty otherwise.
  std::vector<double> drifts;
  /// RecordMode::grid: X at k * grid_dt for k = 0, 1, ... up to the horizon.
  std::vector<double> grid_times;
  std::vector<double> grid_states;  // grid_times.size() * dim

  std::size_t size() const { return times.size(); }
  bool has_drift() const { return !drifts.empty(); }

  Eigen::Map<const Vector> state(std::size_t k) const {
    return Eigen::Map<const Vector>(states.data() + k * dim, dim);
  }
  Eigen::Map<const Vector> theta(std::size_t k) const {
    return Eigen::Map<const Vector>(thetas.data() + k * dim, dim);
  }
  Eigen::Map<const Vector> jump(std::size_t k) const {
    return Eigen::Map<const Vector>(jumps.data() + k * dim, dim);
  }
  /// X_t for t in [0, horizon].
  Vector state_at(double t) const;
  /// X_T at the horizon (or at the stop event).
  Vector final_state() const;
};

struct Ensemble {
  SimConfig config;
  Vector x0;
  std::vector<PathSample> paths;
  std::vector<std::string> warnings;
};

/// sigma-mass * eps^{2a-1} / (2a-1): second-moment rate of the discarded jumps.
double truncation_error_bound(const OslModel& model, double eps);

/// Compensator drift -int_S int_eps^1 r^{E(x)} theta r^{-2} dr sigma(dtheta),
/// evaluated in closed form in the eigenbasis of E(x). Zero for symmetric sigma.
Vector compensator_drift(const OslModel& model, const Vector& x, double eps);

/// Drift mode actually used for the model; sets *warning when an automatic
/// choice is escalated.
DriftMode resolve_drift_mode(const OslModel& model, DriftMode requested,
                             std::string* warning = nullptr);

/// Simulates one path with the caller's random stream; seed_used is recorded.
PathSample simulate_path(const OslModel& model, const Vector& x0, const SimConfig& config,
                         Rng& rng, std::uint64_t seed_used);

/// Path i of an ensemble, drawn from the stream derive_seed(config.seed, i).
PathSample simulate_indexed_path(const OslModel& model, const Vector& x0,
                                 const SimConfig& config, std::uint64_t index);

/// Worker count from an explicit request, else OSLSIM_THREADS, else 1.
int resolve_threads(std::optional<int> requested);

/// Runs body(i) for i in [0, n) on up to `threads` workers. The first exception
/// thrown by any worker is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

Ensemble simulate_ensemble(const OslModel& model, const Vector& x0, const SimConfig& config,
                           std::size_t n_paths, int threads = 1);

/// Streams n_paths paths through fn without retaining them; results are
/// returned in path order regardless of scheduling.
template <class Fn>
auto map_paths(const OslModel& model, const Vector& x0, const SimConfig& config,
               std::size_t n_paths, Fn&& fn, int threads = 1)
    -> std::vector<decltype(fn(std::declval<const PathSample&>()))> {
  using R = decltype(fn(std::declval<const PathSample&>()));
  config.validate();
  std::vector<R> out(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t i) {
    out[i] = fn(simulate_indexed_path(model, x0, config, i));
  });
  return out;
}

/// The same path observed at a coarser truncation level: events with r <= eps
/// are removed and the states replayed. Thinning preserves the law, so this
/// couples simulations across truncation levels.
PathSample coarsen_path(const PathSample& path, const OslModel& model, double eps);

/// Largest deviation between stored states and a replay from (x0, marks, drift).
double replay_residual(const PathSample& path, const OslModel& model);

struct CoefficientChecks {
  double growth_lhs;           // int_S int_0^1 ||r^{E(x)} theta||^2 r^{-2} dr sigma(dtheta)
  double lipschitz_lhs;        // same with (r^{E(x)} - r^{E(y)}) theta
  double lipschitz_rhs_shape;  // ||x - y||^2
};

CoefficientChecks sde_coefficient_checks(const OslModel& model, const Vector& x,
                                         const Vector& y, const QuadSpec& quad = {});

}  // namespace osl
