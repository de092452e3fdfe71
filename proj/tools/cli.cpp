#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "isochron/experiments.hpp"
#include "isochron/lyapunov.hpp"
#include "isochron/models.hpp"
#include "isochron/phase.hpp"
#include "isochron/prc.hpp"
#include "isochron/sensitivity.hpp"

namespace isochron::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string catalog_listing() {
  std::ostringstream os;
  os << "available models:";
  for (const auto& n : model_names()) os << ' ' << n;
  return os.str();
}

const ModelEntry& find_model(const std::string& name) {
  try {
    return lookup(name);
  } catch (const std::out_of_range&) {
    throw UsageError("unknown model '" + name + "'; " + catalog_listing());
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw UsageError("not a number: '" + s + "'");
  return v;
}

int state_axis(const ModelEntry& e, const std::string& key) {
  const int idx = e.system.state_index(key);
  if (idx >= 0) return idx;
  try {
    const int i = std::stoi(key) - 1;
    if (i >= 0 && i < e.system.dim) return i;
  } catch (const std::exception&) {
  }
  throw UsageError("unknown state variable '" + key + "' for " + e.name());
}

/// `name=value,name=value` or `none`.
void apply_section(const ModelEntry& e, const std::string& spec, State& base) {
  if (spec.empty() || spec == "none") return;
  for (const auto& item : split(spec, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("section entries look like name=value: " + item);
    const std::string value = item.substr(eq + 1);
    if (value == "none") continue;
    base[state_axis(e, item.substr(0, eq))] = to_double(value);
  }
}

/// `x:lo:hi,y:lo:hi`.
void apply_axes(const ModelEntry& e, const std::string& spec, GridSpec& g) {
  if (spec.empty()) return;
  const auto items = split(spec, ',');
  if (items.size() != 2) throw UsageError("--axes needs two entries name:lo:hi");
  GridAxis* axes[2] = {&g.axis1, &g.axis2};
  for (int k = 0; k < 2; ++k) {
    const auto p = split(items[static_cast<std::size_t>(k)], ':');
    if (p.size() != 3) throw UsageError("axis entries look like name:lo:hi");
    axes[k]->index = state_axis(e, p[0]);
    axes[k]->lo = to_double(p[1]);
    axes[k]->hi = to_double(p[2]);
  }
}

void apply_grid(const std::string& spec, GridSpec& g) {
  if (spec.empty()) return;
  const auto x = spec.find('x');
  if (x == std::string::npos) throw UsageError("--grid looks like 201x201");
  g.axis1.n = static_cast<int>(to_double(spec.substr(0, x)));
  g.axis2.n = static_cast<int>(to_double(spec.substr(x + 1)));
  if (g.axis1.n < 1 || g.axis2.n < 1) throw UsageError("grid sizes must be positive");
}

/// `a:b:n` gives n log-spaced values from a down to b.
std::vector<double> parse_eps(const std::string& spec) {
  const auto p = split(spec, ':');
  if (p.size() != 3) throw UsageError("--eps looks like 1e-2:1e-7:12");
  const double a = to_double(p[0]), b = to_double(p[1]);
  const int n = static_cast<int>(to_double(p[2]));
  if (!(a > b && b > 0.0) || n < 2) throw UsageError("--eps needs a > b > 0 and n >= 2");
  std::vector<double> eps;
  for (int i = 0; i < n; ++i) eps.push_back(a * std::pow(b / a, static_cast<double>(i) / (n - 1)));
  return eps;
}

std::string describe_segment(const ModelEntry& e) {
  const auto& a = e.sensitivity_set;
  std::ostringstream os;
  os << std::setprecision(6);
  for (int i = 0; i < e.system.dim; ++i) {
    if (i) os << 'x';
    if (i == a.axis) {
      os << '[' << a.lo << ',' << a.hi << ']';
    } else {
      os << '{' << a.base[i] << '}';
    }
  }
  return os.str();
}

std::string observable_name(const ModelEntry& e) {
  const int c = e.system.observable_default.component;
  return e.system.state_names[static_cast<std::size_t>(c)];
}

std::string defaults_table() {
  std::ostringstream os;
  os << "Per-model defaults (omega0, horizon T, rel_tol, observable g, set A, n_pt, e):\n";
  for (const auto& e : catalog()) {
    os << "  " << std::left << std::setw(16) << e.name() << std::setprecision(10)
       << " omega0=" << e.omega0 << " T=" << e.horizon_T;
    if (e.continuous()) os << " rtol=" << e.rel_tol;
    int dir = 0;
    for (int i = 0; i < e.system.dim; ++i) {
      if (e.sensitivity_direction[i] != 0.0) dir = i;
    }
    os << " g=" << observable_name(e) << " A=" << describe_segment(e) << " n_pt=" << e.n_pt_default
       << " e=" << e.system.state_names[static_cast<std::size_t>(dir)] << '\n';
  }
  return os.str();
}

/// Output sink: the --output file if given, else `out`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot open output file " + path);
      os_ = file_.get();
    }
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

/// Reference point from the embedded data, or built on the spot.
ModelEntry with_reference(const ModelEntry& e, std::ostream& err) {
  ModelEntry out = e;
  if (!out.has_reference()) {
    err << "note: no stored reference point for " << e.name() << "; building one\n";
    out.reference_point = build_reference(e);
  }
  return out;
}

struct Common {
  int workers = 0;
  std::string output;
};

/// Fill options of the chosen subcommand that were not given on the command line.
void apply_config_file(CLI::App& sub) {
  const auto* opt = sub.get_config_ptr();
  if (opt == nullptr || opt->count() == 0) return;
  const auto path = opt->as<std::string>();
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub.get_name()}) continue;
    auto* target = sub.get_option_no_throw("--" + item.name);
    if (target == nullptr) throw CLI::ConfigError::Extras(item.fullname());
    if (target->count() > 0) continue;
    if (target->get_items_expected_max() == 1) {
      std::string joined;
      for (const auto& v : item.inputs) joined += (joined.empty() ? "" : ",") + v;
      target->add_result(joined);
    } else {
      for (const auto& v : item.inputs) target->add_result(v);
    }
    target->run_callback();
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Asymptotic phase, phase sensitivity and fractal isochron diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--workers", common.workers, "Worker threads (0 = hardware concurrency)")
      ->default_val(0)
      ->check(CLI::NonNegativeNumber);
  app.add_option("-o,--output", common.output, "Output file (default: standard output)");
  const std::string footer = defaults_table();

  auto add_cmd = [&](const char* name, const char* desc) {
    auto* sub = app.add_subcommand(name, desc);
    sub->set_config("--config", "", "key = value file supplying option values");
    sub->footer(footer);
    return sub;
  };

  std::string model;
  auto* list_cmd = app.add_subcommand("list-models", "List the model catalog");
  list_cmd->footer(footer);

  auto* period_cmd = add_cmd("period", "Estimate the frequency (rotation number for maps)");
  double transient = -1.0, window = 0.0;
  long iterations = 1000000;
  period_cmd->add_option("model", model, "Model name")->required();
  period_cmd->add_option("--transient", transient, "Discarded transient (default: model settle time)");
  period_cmd->add_option("--window", window, "Observation window (default: 12 periods)");
  period_cmd->add_option("--iterations", iterations, "Map iterates averaged")->default_val(1000000);

  std::string section, axes, grid;
  double horizon = 0.0;
  auto* field_cmd = add_cmd("phase-field", "Phase on a planar cross-section");
  field_cmd->add_option("model", model, "Model name")->required();
  field_cmd->add_option("--section", section, "Fixed coordinates, e.g. z=319 (or none)");
  field_cmd->add_option("--axes", axes, "Varying axes, e.g. x:-60:60,y:-150:150");
  field_cmd->add_option("--grid", grid, "Resolution, e.g. 201x201");
  field_cmd->add_option("-T,--horizon", horizon, "Averaging horizon (default from the catalog)");

  std::string method = "two-point", eps_spec;
  double delta_theta = 0.5;
  int n_pt = 0, fit_window = 5;
  auto* sens_cmd = add_cmd("sensitivity", "Averaged two-point phase sensitivity and its slope");
  sens_cmd->add_option("model", model, "Model name")->required();
  sens_cmd->add_option("--method", method, "two-point or mdtheta")
      ->check(CLI::IsMember({"two-point", "mdtheta"}))
      ->default_val("two-point");
  sens_cmd->add_option("--delta-theta", delta_theta, "Threshold for mdtheta")->default_val(0.5);
  sens_cmd->add_option("--eps", eps_spec, "a:b:n log-spaced epsilons (default 1e-2 L:1e-7 L:12)");
  sens_cmd->add_option("--n-pt", n_pt, "Sample points on A (default from the catalog)");
  sens_cmd->add_option("--fit-window", fit_window, "Smallest usable epsilons in the fit")
      ->default_val(5);

  double ftle_T = 0.0;
  auto* ftle_cmd = add_cmd("ftle", "Largest finite-time Lyapunov exponent on a cross-section");
  ftle_cmd->add_option("model", model, "Model name")->required();
  ftle_cmd->add_option("--section", section, "Fixed coordinates, e.g. z=319 (or none)");
  ftle_cmd->add_option("--axes", axes, "Varying axes, e.g. x:-60:60,y:-150:150");
  ftle_cmd->add_option("--grid", grid, "Resolution, e.g. 201x201");
  ftle_cmd->add_option("-T,--horizon", ftle_T, "Horizon (default 10 for flows, 35 for maps)");

  std::string e_dir = "V", exclude;
  double e_mag = 1.0;
  int n_theta = 1024;
  bool boxdim = false;
  auto* prc_cmd = add_cmd("prc", "Finite phase response curve");
  prc_cmd->add_option("model", model, "Model name")->required();
  prc_cmd->add_option("--e-dir", e_dir, "Perturbed state variable")->default_val("V");
  prc_cmd->add_option("--e-mag", e_mag, "Perturbation size")->default_val(1.0);
  prc_cmd->add_option("--n-theta", n_theta, "Phase samples")->default_val(1024)->check(CLI::Range(64, 1 << 22));
  prc_cmd->add_flag("--boxdim", boxdim, "Append the box-counting report");
  prc_cmd->add_option("--exclude", exclude, "lo:hi phase range left out of box counting");

  ExperimentConfig net;
  auto* net_cmd = add_cmd("network", "Phase errors of a noisy common-input experiment");
  net_cmd->add_option("model", model, "Model name")->required();
  net_cmd->add_option("--seed", net.seed, "Random seed")->default_val(1);
  net_cmd->add_option("--n-neurons", net.n_neurons, "Neurons")->default_val(100);
  net_cmd->add_option("--noise", net.noise_sigma_fraction, "Noise std as a fraction of V_range")
      ->default_val(1e-6);
  net_cmd->add_option("--pulses", net.pulse_fractions, "Pulse sizes as fractions of V_range")
      ->delimiter(',')
      ->default_str("0.01,0.05,0.1,0.15,0.2,0.5");

  std::vector<std::string> ref_models;
  auto* refs_cmd = add_cmd("build-refs", "Recompute reference points and write the data file");
  refs_cmd->add_option("--models", ref_models, "Subset of models")->delimiter(',');

  try {
    app.parse(argc, argv);
    for (auto* sub : app.get_subcommands()) apply_config_file(*sub);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, out);
      return 0;
    }
    app.exit(e, err, err);
    return 2;
  }

  try {
    if (list_cmd->parsed()) {
      Sink sink(common.output, out);
      auto& os = *sink;
      os << "name,kind,dim,omega0,horizon_T,rel_tol,observable,n_pt,bursting,reference\n"
         << std::setprecision(10);
      for (const auto& e : catalog()) {
        os << e.name() << ',' << (e.continuous() ? "continuous" : "discrete") << ','
           << e.system.dim << ',' << e.omega0 << ',' << e.horizon_T << ',' << e.rel_tol << ','
           << observable_name(e) << ',' << e.n_pt_default << ',' << (e.bursting ? 1 : 0) << ','
           << (e.has_reference() ? 1 : 0) << '\n';
      }
      return 0;
    }

    if (period_cmd->parsed()) {
      const auto& e = find_model(model);
      Sink sink(common.output, out);
      auto& os = *sink;
      os << std::setprecision(10);
      if (e.continuous()) {
        PeriodOptions po;
        po.window = window;
        const auto p = estimate_period(e.system, e.basin_seed,
                                       transient >= 0.0 ? transient : e.settle_time, po);
        os << "model,omega0,T0,maxima_per_cycle,correlation,catalog_omega0\n"
           << e.name() << ',' << p.omega0 << ',' << p.period << ',' << p.maxima_per_cycle << ','
           << p.correlation << ',' << e.omega0 << '\n';
      } else {
        const long tr = transient >= 0.0 ? std::lround(transient) : std::lround(e.settle_time);
        const double nu = estimate_rotation_number(e.system, e.basin_seed, iterations, tr);
        os << "model,nu0,omega0,catalog_omega0\n"
           << e.name() << ',' << nu << ',' << kTwoPi * nu << ',' << e.omega0 << '\n';
      }
      return 0;
    }

    auto make_grid = [&](const ModelEntry& e) {
      GridSpec g = e.default_section;
      apply_section(e, section, g.base);
      apply_axes(e, axes, g);
      apply_grid(grid, g);
      return g;
    };

    if (field_cmd->parsed()) {
      const auto& e = find_model(model);
      const GridSpec g = make_grid(e);
      const PhaseSettings ps =
          horizon > 0.0 ? default_phase_settings(e, horizon) : default_phase_settings(e);
      const PhaseEvaluator ev(e, ps);
      const auto field = phase_field(ev, g, common.workers);
      Sink sink(common.output, out);
      write_phase_field_csv(*sink, e.name(), e.system.state_names, field);
      return 0;
    }

    if (sens_cmd->parsed()) {
      const auto& e = find_model(model);
      SensitivityOptions so;
      so.n_pt = n_pt > 0 ? n_pt : e.n_pt_default;
      if (!eps_spec.empty()) so.eps = parse_eps(eps_spec);
      so.fit.window = fit_window;
      so.workers = common.workers;
      const auto curve = method == "mdtheta" ? mdtheta_curve(e, e.sensitivity_set, so, delta_theta)
                                             : sensitivity_curve(e, e.sensitivity_set, so);
      Sink sink(common.output, out);
      write_curve_csv(*sink, curve);
      return 0;
    }

    if (ftle_cmd->parsed()) {
      const auto& e = find_model(model);
      const GridSpec g = make_grid(e);
      const double T = ftle_T > 0.0 ? ftle_T : (e.continuous() ? 10.0 : 35.0);
      const auto field = ftle_field(e, g, T, common.workers);
      Sink sink(common.output, out);
      write_ftle_field_csv(*sink, e.name(), e.system.state_names, field);
      return 0;
    }

    if (prc_cmd->parsed()) {
      const auto& base = find_model(model);
      if (!base.continuous()) throw UsageError("prc needs a continuous model");
      const ModelEntry e = with_reference(base, err);
      State dir = State::Zero(e.system.dim);
      dir[state_axis(e, e_dir)] = e_mag;
      const PhaseEvaluator ev(e);
      const auto curve = prc_curve(ev, dir, n_theta, common.workers);
      Sink sink(common.output, out);
      write_prc_csv(*sink, curve);
      if (boxdim) {
        BoxCountOptions bo;
        if (!exclude.empty()) {
          const auto p = split(exclude, ':');
          if (p.size() != 2) throw UsageError("--exclude looks like lo:hi");
          bo.exclude_lo = to_double(p[0]);
          bo.exclude_hi = to_double(p[1]);
        }
        write_box_count_csv(*sink, box_counting_dimension(curve, bo));
      }
      return 0;
    }

    if (net_cmd->parsed()) {
      const auto& base = find_model(model);
      if (!base.bursting) throw UsageError(model + " is not a bursting model");
      const ModelEntry e = with_reference(base, err);
      net.model = e.name();
      net.workers = common.workers;
      const PhaseEvaluator ev(e);
      const auto report = run_network_experiment(ev, net);
      for (const auto& w : report.warnings) err << "warning: " << w << '\n';
      Sink sink(common.output, out);
      write_report_csv(*sink, report);
      return 0;
    }

    if (refs_cmd->parsed()) {
      std::vector<ReferenceRecord> records;
      const auto names = ref_models.empty() ? model_names() : ref_models;
      for (const auto& name : names) {
        const auto& e = find_model(name);
        double residual = 0.0;
        ReferenceRecord r;
        r.name = e.name();
        r.omega0 = e.omega0;
        r.period = e.period();
        r.point = build_reference(e, &residual);
        err << e.name() << ": phase residual " << residual << '\n';
        records.push_back(std::move(r));
      }
      Sink sink(common.output, out);
      write_reference_file(*sink, records);
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace isochron::cli
