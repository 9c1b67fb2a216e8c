#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace osl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A numerical result paired with an absolute error estimate.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Raised when an exponent field violates (E1)-(E4) or a measure is malformed.
class AdmissibilityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation is called outside its contract (e.g. a symmetric-only
/// routine on a non-symmetric model).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Quadrature did not reach its target; carries the best estimate so far.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double best, double achieved)
      : std::runtime_error(what + " (best estimate " + std::to_string(best) +
                           ", achieved error " + std::to_string(achieved) + ")"),
        best_(best),
        achieved_(achieved) {}

  double best_estimate() const noexcept { return best_; }
  double achieved_error() const noexcept { return achieved_; }

 private:
  double best_;
  double achieved_;
};

}  // namespace osl
