#include <benchmark/benchmark.h>

#include <cmath>

#include "isochron/lyapunov.hpp"
#include "isochron/phase.hpp"
#include "isochron/prc.hpp"

using namespace isochron;

namespace {

State point(std::initializer_list<double> xs) {
  State s(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) s[i++] = x;
  return s;
}

void BM_FlowOnePeriod(benchmark::State& state) {
  const auto& e = lookup(state.range(0) == 0 ? "van_der_pol" : "lorenz_r320");
  for (auto _ : state) benchmark::DoNotOptimize(flow_to(e.system, e.reference_point, e.period(), e.integrator()));
}
BENCHMARK(BM_FlowOnePeriod)->Arg(0)->Arg(1);

void BM_PhaseVanDerPol(benchmark::State& state) {
  const auto& e = lookup("van_der_pol");
  const auto& ev = default_evaluator(e);
  const State x = point({1.0, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(ev(x));
}
BENCHMARK(BM_PhaseVanDerPol)->Unit(benchmark::kMillisecond);

void BM_PhaseLorenz(benchmark::State& state) {
  const auto& e = lookup("lorenz_r320");
  const auto& ev = default_evaluator(e);
  const State x = point({30.0, 60.0, 319.0});
  for (auto _ : state) benchmark::DoNotOptimize(ev(x));
}
BENCHMARK(BM_PhaseLorenz)->Unit(benchmark::kMillisecond);

void BM_PhaseMap(benchmark::State& state) {
  const auto& e = lookup("map_eq5");
  const auto& ev = default_evaluator(e);
  const State x = point({2.0, 0.3});
  for (auto _ : state) benchmark::DoNotOptimize(ev(x));
}
BENCHMARK(BM_PhaseMap)->Unit(benchmark::kMillisecond);

void BM_FTLELorenz(benchmark::State& state) {
  const auto& e = lookup("lorenz_r320");
  const State x = point({10.0, 20.0, 319.0});
  for (auto _ : state) benchmark::DoNotOptimize(ftle(e, x, static_cast<double>(state.range(0))));
}
BENCHMARK(BM_FTLELorenz)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_LogSingularValues(benchmark::State& state) {
  std::vector<Matrix> factors;
  for (int k = 0; k < state.range(0); ++k) {
    Matrix m(3, 3);
    m << 1.1, 0.2 * std::sin(k), 0.0, 0.1, 0.9, 0.3, 0.0, 0.05 * std::cos(k), 0.5;
    factors.push_back(m);
  }
  for (auto _ : state) benchmark::DoNotOptimize(log_singular_values(factors));
}
BENCHMARK(BM_LogSingularValues)->Arg(100)->Arg(10000);

void BM_BoxCounting(benchmark::State& state) {
  PRCCurve c;
  const int n = static_cast<int>(state.range(0));
  for (int k = 0; k < n; ++k) {
    const double t = kTwoPi * k / n;
    double z = 0.0;
    for (int m = 0; m < 20; ++m) z += std::pow(2.0, -0.5 * m) * std::cos(std::ldexp(1.0, m) * t);
    c.thetas.push_back(t);
    c.responses.push_back(0.5 * z);
    c.converged.push_back(1);
  }
  for (auto _ : state) benchmark::DoNotOptimize(box_counting_dimension(c));
}
BENCHMARK(BM_BoxCounting)->Arg(4096)->Arg(65536)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
