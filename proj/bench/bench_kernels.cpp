// Timing harness for the OpenMP kernels against their serial references.
// Each section prints serial ms, parallel ms, the speedup, and whether the
// two results agree (they must be bit-identical by construction).

#include <chrono>
#include <cstdio>
#include <vector>

#include "bellstat/inequality.hpp"
#include "bellstat/simulator.hpp"
#include "bellstat/stat_bounds.hpp"
#include "bellstat/witness.hpp"

namespace {

using namespace bellstat;
using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& body) {
  const auto start = Clock::now();
  body();
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

void report(const char* name, double serial_ms, double parallel_ms,
            bool identical) {
  std::printf("%-24s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "results identical" : "RESULTS DIFFER");
}

void bench_brute_force() {
  const BellScenario scenario{30, 3};  // 10,295,472 strategy multisets
  BruteForceOptions options;
  options.state_cap = 20'000'000;

  BruteForceResult serial, parallel;
  const double serial_ms =
      time_ms([&] { serial = brute_force_minimum_serial(scenario, options); });
  const double parallel_ms =
      time_ms([&] { parallel = brute_force_minimum(scenario, options); });

  bool identical = serial.min_value == parallel.min_value &&
                   serial.n_states == parallel.n_states &&
                   serial.minimizers.size() == parallel.minimizers.size();
  for (std::size_t i = 0; identical && i < serial.minimizers.size(); ++i)
    identical = serial.minimizers[i].counts == parallel.minimizers[i].counts;
  report("brute_force_minimum", serial_ms, parallel_ms, identical);
  std::printf("%-24s min %lld over %llu states\n", "", serial.min_value,
              static_cast<unsigned long long>(serial.n_states));
}

void bench_critical_curve() {
  std::vector<double> grid;
  for (int i = 0; i < 64; ++i) grid.push_back(0.01 + 0.97 * i / 63.0);

  std::vector<double> serial, parallel;
  const double serial_ms =
      time_ms([&] { serial = critical_curve_serial(4, grid); });
  const double parallel_ms =
      time_ms([&] { parallel = critical_curve(4, grid); });
  report("critical_curve m=4", serial_ms, parallel_ms, serial == parallel);
}

void bench_run_batch() {
  const WitnessPoint point{0.98, 0.272};
  const EstimatorConfig config = estimator_config(violation_nu(point), 100);
  const SourceModel model = SourceModel::gaussian(point, 0.1, 0.4);
  const long long m_runs = 200, trials = 20000;

  std::vector<double> serial, parallel;
  const double serial_ms = time_ms(
      [&] { serial = run_batch(model, config, m_runs, trials, 7, 1); });
  const double parallel_ms = time_ms(
      [&] { parallel = run_batch(model, config, m_runs, trials, 7, 0); });
  report("run_batch", serial_ms, parallel_ms, serial == parallel);
}

}  // namespace

int main() {
  bench_brute_force();
  bench_critical_curve();
  bench_run_batch();
  return 0;
}
