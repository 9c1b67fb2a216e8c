#pragma once

// Finite measures on the unit sphere S^{d-1}: the angular half of an
// operator-stable-like Levy measure.

#include "oslsim/common.hpp"
#include "oslsim/rng.hpp"

#include <functional>
#include <vector>

namespace osl {

class SpectralMeasure {
 public:
  enum class Kind { discrete, uniform };

  /// Weighted atoms on the sphere. Atoms must have unit norm within 1e-12 and
  /// weights must be positive. The symmetric flag is set when every atom has a
  /// reflected partner of equal weight.
  static SpectralMeasure discrete(std::vector<Vector> atoms, std::vector<double> weights);
  /// Uniform (rotation invariant) measure of the given total mass.
  static SpectralMeasure uniform(int dim, double mass);

  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  bool symmetric() const { return symmetric_; }
  double total_mass() const { return mass_; }

  const std::vector<Vector>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  Vector sample_direction(Rng& rng) const;

 private:
  SpectralMeasure() = default;

  int dim_ = 0;
  Kind kind_ = Kind::discrete;
  bool symmetric_ = false;
  double mass_ = 0.0;
  std::vector<Vector> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

inline double total_mass(const SpectralMeasure& sigma) { return sigma.total_mass(); }

struct SphereNode {
  Vector theta;
  double weight;
};

/// Quadrature nodes for the measure. Discrete measures return their atoms for
/// every level; uniform measures return the level-th member of a refining family
/// whose weights sum to the mass.
std::vector<SphereNode> sphere_rule(const SpectralMeasure& sigma, int level);

struct SphereIntegral {
  double value = 0.0;
  double error = 0.0;
  std::size_t nodes = 0;
  bool converged = true;
};

/// Maximum number of nodes a uniform sphere rule may use.
inline constexpr std::size_t kMaxSphereNodes = std::size_t{1} << 16;

/// Integrates g against sigma. Discrete measures are summed exactly; uniform
/// measures refine the rule until successive levels agree within
/// tol * mass * sup|g|, or the node cap is reached (converged = false).
SphereIntegral integrate_sphere(const SpectralMeasure& sigma,
                                const std::function<double(const Vector&)>& g, double tol);

/// As above for integrands that are themselves numerical estimates; the inner
/// errors are propagated into the result.
SphereIntegral integrate_sphere(const SpectralMeasure& sigma,
                                const std::function<Estimate(const Vector&)>& g, double tol);

/// Integrates g against sigma when g is smooth except on the hyperplanes
/// {theta : (basis^T theta)_i = 0} for an orthogonal basis. Uniform measures use
/// rules whose panels end on those hyperplanes (adaptive Gauss-Kronrod per
/// quadrant for d = 2, a split Gauss product rule for d >= 3), converging to
/// relative tolerance tol. Discrete measures are summed exactly.
SphereIntegral integrate_sphere_aligned(const SpectralMeasure& sigma, const Matrix& basis,
                                        const std::function<Estimate(const Vector&)>& g,
                                        double tol, int max_panels = 2000);

inline Vector sample_direction(const SpectralMeasure& sigma, Rng& rng) {
  return sigma.sample_direction(rng);
}

/// Reflection-symmetrised copy: each atom splits its weight with its mirror image.
SpectralMeasure symmetrize(const SpectralMeasure& sigma);

}  // namespace osl
