#pragma once

// Admissible exponent fields x -> E(x): symmetric (E1), Lipschitz (E2), spectrum
// bounded below by a > 1/2 (E3) and optionally above by b (E4). The declared
// constants are authoritative; validate_admissible() probes them.

#include "oslsim/common.hpp"
#include "oslsim/matexp.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace osl {

/// Real-valued field on R^d with a declared range and Lipschitz constant.
struct ScalarField {
  std::function<double(const Vector&)> fn;
  double min = 0.0;
  double max = 0.0;
  double lipschitz = 0.0;
};

class ExponentField {
 public:
  using Evaluator = std::function<Matrix(const Vector&)>;

  /// Strictness margin for (E3): a must exceed 1/2 + kStrictness.
  static constexpr double kStrictness = 1e-12;

  ExponentField(int dim, Evaluator evaluator, double a, std::optional<double> b, double lip,
                std::string kind);

  int dim() const { return dim_; }
  double a() const { return a_; }
  const std::optional<double>& b() const { return b_; }
  double lip() const { return lip_; }
  const std::string& kind() const { return kind_; }

  /// Raw evaluator output (may be asymmetric for a broken field).
  Matrix raw(const Vector& x) const { return evaluator_(x); }
  /// E(x); throws std::invalid_argument if the evaluator breaks (E1).
  SymMatrix at(const Vector& x) const;
  /// Eigendecomposition of E(x), served from a cache for constant fields.
  EigenData eigen_at(const Vector& x) const;

  bool is_constant() const { return constant_eigen_ != nullptr; }

  /// Replace the declared constants without checks; used to build deliberately
  /// mis-declared fields for validation fixtures.
  ExponentField with_declared(double a, std::optional<double> b, double lip) const;

 private:
  friend ExponentField make_constant(const SymMatrix& e0);

  int dim_;
  Evaluator evaluator_;
  double a_;
  std::optional<double> b_;
  double lip_;
  std::string kind_;
  std::shared_ptr<const EigenData> constant_eigen_;
};

/// Constant exponent E0 (Levy case): a = lambda(E0), b = Lambda(E0), lip = 0.
ExponentField make_constant(const SymMatrix& e0);

/// E(x) = Id / alpha(x) with alpha ranging in [min, max] inside (0, 2).
ExponentField make_stable_like(int dim, ScalarField alpha);

/// E(x) = (1 - s(x)) E_low + s(x) E_high with blend s valued in [0, 1].
ExponentField make_interpolated(const SymMatrix& e_low, const SymMatrix& e_high,
                                ScalarField blend);

/// alpha(x) = center + amplitude sin(x_coord); range center -+ |amplitude|.
ScalarField sin_alpha(double center, double amplitude, int coord = 0);

/// s(x) = clamp((x_coord - lo) / (hi - lo), 0, 1).
ScalarField clamp_blend(int coord, double lo, double hi);

/// s(x) = (1 + sin(k x_coord)) / 2.
ScalarField sin_blend(int coord, double k);

struct Box {
  Vector lo;
  Vector hi;
};

struct ValidationReport {
  double max_symmetry_defect = 0.0;
  double min_lambda = 0.0;
  double max_Lambda = 0.0;
  double max_lipschitz_ratio = 0.0;
  std::size_t grid_points = 0;
  std::size_t pairs = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Probes (E1)-(E4) on a grid_n^d lattice over the box and the Lipschitz bound on
/// pair_m random pairs. Violations are reported, never thrown.
ValidationReport validate_admissible(const ExponentField& field, const Box& box, int grid_n,
                                     int pair_m, std::uint64_t seed);

}  // namespace osl
