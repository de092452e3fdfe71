#include "isochron/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "isochron/parallel.hpp"
#include "isochron/sensitivity.hpp"

namespace isochron {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

double cycle_range(const ModelEntry& entry, int component) {
  if (!entry.has_reference()) throw std::logic_error("no reference point for " + entry.name());
  double lo = entry.reference_point[component], hi = lo;
  const double sub = entry.period() / 2000.0;
  walk_flow(entry.system, entry.reference_point, entry.period(), entry.integrator(),
            [&](const FlowStepper& s) {
              const int m = std::max(4, static_cast<int>(std::ceil((s.t() - s.t_prev()) / sub)));
              for (int k = 1; k <= m; ++k) {
                const double t = s.t_prev() + (s.t() - s.t_prev()) * k / m;
                const double v = k == m ? s.y()[component] : s.dense(t)[component];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
              }
              return true;
            });
  return hi - lo;
}

ExperimentReport run_network_experiment(const PhaseEvaluator& eval, const ExperimentConfig& cfg) {
  const ModelEntry& entry = eval.entry();
  if (cfg.n_neurons < 1) throw std::invalid_argument("n_neurons must be at least 1");
  for (double p : cfg.pulse_fractions) {
    if (!(p > 0.0)) throw std::invalid_argument("pulse fractions must be positive");
  }
  ExperimentReport rep;
  rep.model = entry.name();
  rep.v_range = cfg.v_range > 0.0 ? cfg.v_range : cycle_range(entry, 0);

  // Draws happen up front, one stream per role, so every pulse size sees the same neurons.
  const auto n = static_cast<std::size_t>(cfg.n_neurons);
  Rng theta_rng(cfg.seed);
  Rng noise_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<double> thetas(n), xi(n);
  for (auto& t : thetas) t = kTwoPi * theta_rng.uniform();
  const double sigma = cfg.noise_sigma_fraction * rep.v_range;
  for (auto& x : xi) x = sigma * noise_rng.normal();
  const auto states = eval_on_cycle(entry, thetas);

  State dir = State::Zero(entry.system.dim);
  dir[0] = 1.0;
  const auto n_pulse = cfg.pulse_fractions.size();
  std::vector<double> err(n_pulse * n, std::numeric_limits<double>::quiet_NaN());
  parallel_for(n_pulse * n, cfg.workers, [&](std::size_t task) {
    const std::size_t p = task / n, k = task % n;
    const double size = cfg.pulse_fractions[p] * rep.v_range;
    const State e = size * dir;
    const PhaseValue a = eval(states[k] + e);
    const PhaseValue b = eval(states[k] + e * (1.0 + xi[k] / size));
    if (a.converged && b.converged) err[task] = geodesic_distance(a.theta, b.theta);
  });

  double sum_means = 0.0;
  for (std::size_t p = 0; p < n_pulse; ++p) {
    PulseStats s;
    s.pulse_fraction = cfg.pulse_fractions[p];
    s.pulse_size = s.pulse_fraction * rep.v_range;
    double sum = 0.0;
    int c5 = 0, c4 = 0, c3 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = err[p * n + k];
      if (std::isnan(d)) {
        ++s.n_excluded;
        continue;
      }
      ++s.n_valid;
      sum += d;
      s.max_error = std::max(s.max_error, d);
      c5 += d > 1e-5;
      c4 += d > 1e-4;
      c3 += d > 1e-3;
    }
    if (s.n_valid > 0) {
      s.mean_error = sum / s.n_valid;
      s.frac_gt_1e5 = static_cast<double>(c5) / s.n_valid;
      s.frac_gt_1e4 = static_cast<double>(c4) / s.n_valid;
      s.frac_gt_1e3 = static_cast<double>(c3) / s.n_valid;
    }
    if (s.n_excluded > 0.2 * cfg.n_neurons) {
      std::ostringstream w;
      w << "pulse " << s.pulse_fraction << ": " << s.n_excluded << " of " << cfg.n_neurons
        << " neurons excluded (non-converged phase)";
      rep.warnings.push_back(w.str());
    }
    sum_means += s.mean_error;
    rep.overall_max = std::max(rep.overall_max, s.max_error);
    rep.per_pulse.push_back(s);
  }
  rep.overall_mean = n_pulse > 0 ? sum_means / static_cast<double>(n_pulse) : 0.0;
  return rep;
}

ExperimentReport run_network_experiment(const ExperimentConfig& config) {
  const ModelEntry& entry = lookup(config.model);
  if (!entry.bursting) throw std::invalid_argument(config.model + " is not a bursting model");
  return run_network_experiment(default_evaluator(entry), config);
}

void write_report_csv(std::ostream& os, const ExperimentReport& report) {
  os << "# model: " << report.model << '\n'
     << std::setprecision(9) << "# v_range: " << report.v_range << '\n';
  for (const auto& w : report.warnings) os << "# warning: " << w << '\n';
  os << "pulse_fraction,pulse_size,mean_error,max_error,frac_gt_1e-5,frac_gt_1e-4,frac_gt_1e-3,"
        "n_valid,n_excluded\n";
  for (const auto& s : report.per_pulse) {
    os << s.pulse_fraction << ',' << s.pulse_size << ',' << s.mean_error << ',' << s.max_error << ','
       << s.frac_gt_1e5 << ',' << s.frac_gt_1e4 << ',' << s.frac_gt_1e3 << ',' << s.n_valid << ','
       << s.n_excluded << '\n';
  }
  os << "overall,," << report.overall_mean << ',' << report.overall_max << ",,,,,\n";
}

}  // namespace isochron
