#include "isochron/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>

#include "isochron/parallel.hpp"

namespace isochron {

namespace {

/**
 * One QR sweep through P = A_m ... A_1: A_j Q_{j-1} = Q_j R_j, so P = Q_m R_m ... R_1.
 * Replaces the factors with the transposed triangular factors in reverse order, which
 * represent P^T up to an orthogonal factor. Returns sum_j log |diag R_j|.
 */
Eigen::VectorXd qr_sweep(std::vector<Matrix>& factors) {
  const auto n = factors.front().rows();
  Matrix q = Matrix::Identity(n, n);
  Eigen::VectorXd logs = Eigen::VectorXd::Zero(n);
  std::vector<Matrix> next(factors.size());
  for (std::size_t j = 0; j < factors.size(); ++j) {
    Eigen::HouseholderQR<Matrix> qr(factors[j] * q);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    q = qr.householderQ();
    // Make the diagonal positive so the sweep is deterministic.
    for (Eigen::Index i = 0; i < n; ++i) {
      if (r(i, i) < 0.0) {
        r.row(i) *= -1.0;
        q.col(i) *= -1.0;
      }
      logs[i] += std::log(std::abs(r(i, i)));
    }
    next[factors.size() - 1 - j] = r.transpose();
  }
  factors = std::move(next);
  return logs;
}

}  // namespace

std::vector<double> log_singular_values(const std::vector<Matrix>& factors_in) {
  if (factors_in.empty()) throw std::invalid_argument("empty factor list");
  auto factors = factors_in;
  Eigen::VectorXd logs = qr_sweep(factors);
  // Each sweep is one step of unshifted QR iteration on P^T P; graded products converge fast.
  for (int sweep = 0; sweep < 200; ++sweep) {
    const Eigen::VectorXd next = qr_sweep(factors);
    const double change = (next - logs).cwiseAbs().maxCoeff();
    logs = next;
    if (change < 1e-13 * std::max(1.0, logs.cwiseAbs().maxCoeff())) break;
  }
  std::vector<double> out(logs.data(), logs.data() + logs.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

FTLEResult ftle(const ModelEntry& entry, const State& x, double T, const FTLEOptions& opts) {
  if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
  std::vector<Matrix> factors;
  State cur = x;
  if (entry.continuous()) {
    IntegratorOptions io = entry.integrator();
    if (opts.rel_tol > 0.0) io.rel_tol = opts.rel_tol;
    const double dt = opts.interval > 0.0 ? opts.interval : 0.25 * entry.period();
    const auto m = static_cast<long>(std::ceil(T / dt - 1e-9));
    for (long k = 0; k < m; ++k) {
      const double len = std::min(dt, T - k * dt);
      auto fm = integrate_variational(entry.system, cur, len, io);
      factors.push_back(std::move(fm.matrix));
      cur = fm.end_state;
    }
  } else {
    const long steps = std::lround(T);
    if (steps < 1) throw std::invalid_argument("map horizon must be at least 1");
    const long every = opts.interval > 0.0 ? std::max(1L, std::lround(opts.interval)) : 5L;
    for (long done = 0; done < steps; done += every) {
      const long len = std::min(every, steps - done);
      auto fm = integrate_variational(entry.system, cur, static_cast<double>(len));
      factors.push_back(std::move(fm.matrix));
      cur = fm.end_state;
    }
  }
  FTLEResult res;
  res.horizon = T;
  res.exponents = log_singular_values(factors);
  for (double& e : res.exponents) e /= T;
  return res;
}

ScalarField ftle_field(const ModelEntry& entry, const GridSpec& grid, double T, int workers,
                       const FTLEOptions& opts) {
  ScalarField field;
  field.grid = grid;
  field.values.assign(static_cast<std::size_t>(grid.size()), std::numeric_limits<double>::quiet_NaN());
  const int n2 = grid.axis2.n;
  parallel_for(field.values.size(), workers, [&](std::size_t k) {
    const int i = static_cast<int>(k / n2), j = static_cast<int>(k % n2);
    try {
      field.values[k] = ftle(entry, grid.node(i, j), T, opts).exponents.front();
    } catch (const IntegrationError&) {
    } catch (const IterationError&) {
    }
  });
  return field;
}

void write_ftle_field_csv(std::ostream& os, const std::string& model,
                          const std::vector<std::string>& state_names, const ScalarField& field) {
  write_section_header(os, model, state_names, field.grid);
  os << "i,j,x1,x2,ftle,converged\n" << std::setprecision(9);
  const auto& g = field.grid;
  for (int i = 0; i < g.axis1.n; ++i) {
    for (int j = 0; j < g.axis2.n; ++j) {
      const double v = field.at(i, j);
      const bool ok = std::isfinite(v);
      os << i << ',' << j << ',' << g.axis1.at(i) << ',' << g.axis2.at(j) << ',' << (ok ? v : 0.0)
         << ',' << (ok ? 1 : 0) << '\n';
    }
  }
}

}  // namespace isochron
