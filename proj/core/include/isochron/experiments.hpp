#pragma once
/**
 * @file experiments.hpp
 * @brief Phase errors of uncoupled neurons under a common impulsive input with noisy copies.
 */

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "isochron/phase.hpp"

namespace isochron {

struct ExperimentConfig {
  std::string model;
  int n_neurons = 100;
  std::vector<double> pulse_fractions{0.01, 0.05, 0.1, 0.15, 0.2, 0.5};
  double noise_sigma_fraction = 1e-6;
  std::uint64_t seed = 1;
  /// Range of the first state variable over one cycle; <= 0 computes it.
  double v_range = 0.0;
  int workers = 1;
};

struct PulseStats {
  double pulse_fraction = 0.0;
  double pulse_size = 0.0;
  double mean_error = 0.0;
  double max_error = 0.0;
  double frac_gt_1e5 = 0.0;
  double frac_gt_1e4 = 0.0;
  double frac_gt_1e3 = 0.0;
  int n_valid = 0;
  int n_excluded = 0;
};

struct ExperimentReport {
  std::string model;
  double v_range = 0.0;
  std::vector<PulseStats> per_pulse;
  double overall_mean = 0.0;  ///< mean of the per-pulse means
  double overall_max = 0.0;   ///< max of the per-pulse maxima
  std::vector<std::string> warnings;
};

/// Portable random streams: mt19937_64 with explicit uniform and Box-Muller transforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform();  ///< [0, 1), 53 random bits
  double normal();   ///< standard normal
 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Length of the interval spanned by the first state variable over one cycle.
double cycle_range(const ModelEntry& entry, int component = 0);

ExperimentReport run_network_experiment(const PhaseEvaluator& eval, const ExperimentConfig& config);
ExperimentReport run_network_experiment(const ExperimentConfig& config);

void write_report_csv(std::ostream& os, const ExperimentReport& report);

}  // namespace isochron
