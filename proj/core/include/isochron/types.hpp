#pragma once
/**
 * @file types.hpp
 * @brief Shared vector/matrix aliases, constants and error types.
 */

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace isochron {

/// Largest state dimension among the supported systems.
inline constexpr int kMaxDim = 6;

/// State vector with inline storage (no heap allocation in the hot loops).
using State = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Raised when the adaptive integrator cannot make progress.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time_reached)
      : std::runtime_error(what + " (t = " + std::to_string(time_reached) + ")"),
        time_reached_(time_reached) {}
  [[nodiscard]] double time_reached() const noexcept { return time_reached_; }

 private:
  double time_reached_;
};

/// Raised when a map iteration produces a non-finite state.
class IterationError : public std::runtime_error {
 public:
  IterationError(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  [[nodiscard]] long step() const noexcept { return step_; }

 private:
  long step_;
};

/// No periodic structure found along a settled orbit.
class NotPeriodicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A regression could not be carried out (too few usable samples).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reduce an angle to [0, 2*pi).
[[nodiscard]] inline double wrap_two_pi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Reduce an angle to (-pi, pi].
[[nodiscard]] inline double wrap_pi(double a) {
  double r = wrap_two_pi(a);
  if (r > kPi) r -= kTwoPi;
  return r;
}

}  // namespace isochron
