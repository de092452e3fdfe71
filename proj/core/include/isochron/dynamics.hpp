#pragma once
/**
 * @file dynamics.hpp
 * @brief System definitions, trajectory integration for flows and maps,
 *        variational equations, and period / rotation-number estimation.
 */

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "isochron/dopri5.hpp"
#include "isochron/types.hpp"

namespace isochron {

enum class SystemKind { continuous, discrete };

/// Scalar observable g: either a state component or an arbitrary function.
struct Observable {
  int component = 0;
  std::function<double(const State&)> fn;

  [[nodiscard]] double operator()(const State& x) const { return fn ? fn(x) : x[component]; }
  [[nodiscard]] bool is_component() const { return !fn; }
};

/**
 * A continuous-time vector field (x' = F(x)) or a discrete map (x <- F(x)),
 * with its analytic Jacobian and metadata.
 */
struct SystemDef {
  std::string name;
  SystemKind kind = SystemKind::continuous;
  int dim = 1;
  std::function<void(const State&, State&)> vector_field;
  std::function<void(const State&, Matrix&)> jacobian;
  std::vector<std::pair<std::string, double>> params;
  std::vector<std::string> state_names;
  Observable observable_default;
  /// rad per unit time; 0 when unknown.
  double omega0_default = 0.0;
  /// Maps on a cylinder: unreduced increment of the angle coordinate (the lift).
  std::function<double(const State&)> angle_increment;

  [[nodiscard]] State eval(const State& x) const {
    State out(dim);
    vector_field(x, out);
    return out;
  }
  [[nodiscard]] Matrix jac(const State& x) const {
    Matrix out(dim, dim);
    jacobian(x, out);
    return out;
  }
  [[nodiscard]] double param(std::string_view key) const;
  /// Index of a named state variable, or -1.
  [[nodiscard]] int state_index(std::string_view key) const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  bool escaped = false;
};

struct FundamentalMatrix {
  double horizon = 0.0;
  Matrix matrix;
  /// phi(T, x0), returned alongside so propagators can be chained.
  State end_state;
};

/// Requested output times; empty means "final time only".
struct SampleSpec {
  std::vector<double> times;

  static SampleSpec uniform(double t0, double t1, int n);
};

/// Right-hand side adaptor used by the stepper.
struct SystemRhs {
  const SystemDef* sys;
  void operator()(const State& x, State& dx) const { sys->vector_field(x, dx); }
};

using FlowStepper = Dopri5<State, SystemRhs>;

struct FlowStatus {
  bool escaped = false;
  double t_reached = 0.0;
  State final_state;
};

/**
 * Integrate from x0 over [0, t_final], calling `on_step(const FlowStepper&)`
 * after every accepted step. The callback may return false to stop early.
 * Escapes (infinity norm above the divergence bound) stop the walk.
 */
template <class OnStep>
FlowStatus walk_flow(const SystemDef& sys, const State& x0, double t_final,
                     const IntegratorOptions& opts, OnStep&& on_step) {
  FlowStepper stepper(SystemRhs{&sys}, opts);
  stepper.reset(0.0, x0, t_final);
  FlowStatus status;
  while (!stepper.done()) {
    stepper.step();
    const bool keep_going = on_step(stepper);
    if (stepper.y().cwiseAbs().maxCoeff() > opts.divergence_bound) {
      status.escaped = true;
      break;
    }
    if (!keep_going) break;
  }
  status.t_reached = stepper.t();
  status.final_state = stepper.y();
  return status;
}

/// Sample a continuous flow at the requested times.
Trajectory integrate_flow(const SystemDef& sys, const State& x0, double t_final,
                          const IntegratorOptions& opts, const SampleSpec& samples = {});

/// Convenience: state at time t (throws IntegrationError; escaped states returned as reached).
State flow_to(const SystemDef& sys, const State& x0, double t, const IntegratorOptions& opts);

/// Exact iteration; states[k] = F^k(x0), k = 0..n.
Trajectory iterate_map(const SystemDef& sys, const State& x0, long n,
                       double divergence_bound = 1e7);

/// M(T): joint state/tangent integration for flows, Jacobian product for maps.
FundamentalMatrix integrate_variational(const SystemDef& sys, const State& x0, double horizon,
                                        const IntegratorOptions& opts = {});

struct PeriodOptions {
  double rel_tol = 1e-10;
  /// Observation window after the transient; <= 0 uses 12 nominal periods.
  double window = 0.0;
  int max_group = 64;
  double correlation_threshold = 0.99;
};

struct PeriodEstimate {
  double period = 0.0;
  double omega0 = 0.0;
  int maxima_per_cycle = 1;
  double correlation = 0.0;
};

PeriodEstimate estimate_period(const SystemDef& sys, const State& x_seed, double transient,
                               const PeriodOptions& opts = {});

/// Mean lifted angle advance per iterate (in turns) over n iterates after `transient`.
double estimate_rotation_number(const SystemDef& sys, const State& x0, long n,
                                long transient = 0);

}  // namespace isochron
