#include "bellstat/figures.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "bellstat/parallel.hpp"
#include "bellstat/squeezing.hpp"
#include "bellstat/stat_bounds.hpp"
#include "bellstat/witness.hpp"

namespace bellstat {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kRefCb = 0.98;
constexpr double kRefZeta2 = 0.272;

std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points));
  if (points == 1) {
    out.push_back(lo);
    return out;
  }
  for (int i = 0; i < points; ++i)
    out.push_back(lo + (hi - lo) * i / (points - 1));
  return out;
}

// Geometric integer grid with duplicates (from rounding) removed.
std::vector<long long> geometric_grid(long long lo, long long hi, int points) {
  std::vector<long long> out;
  const double log_lo = std::log10(static_cast<double>(lo));
  const double log_hi = std::log10(static_cast<double>(hi));
  for (int i = 0; i < points; ++i) {
    const double exponent =
        points == 1 ? log_lo : log_lo + (log_hi - log_lo) * i / (points - 1);
    const auto n = static_cast<long long>(std::llround(std::pow(10.0, exponent)));
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

int pick(int resolution, int fallback) {
  if (resolution < 0) fail(errc::domain, "resolution must be nonnegative");
  return resolution == 0 ? fallback : resolution;
}

}  // namespace

DataTable critical_lines_table(int points, int threads) {
  if (points < 1) fail(errc::domain, "points must be positive");
  DataTable table;
  table.columns = {"cb", "zeta2"};
  table.has_series = true;
  const std::vector<double> grid = linspace(0.005, 0.995, points);
  const struct {
    const char* label;
    int m;
  } curves[] = {{"z2", 2}, {"z4", 4}, {"zinf", settings_inf}};
  for (const auto& curve : curves) {
    const std::vector<double> values = critical_curve(curve.m, grid, threads);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      table.series.push_back(curve.label);
      table.rows.push_back({grid[i], values[i]});
    }
  }
  table.series.push_back("point");
  table.rows.push_back({kRefCb, kRefZeta2});
  return table;
}

DataTable squeezing_limit_table(int points) {
  if (points < 1) fail(errc::domain, "points must be positive");
  DataTable table;
  table.columns = {"n", "zeta2_star"};
  for (long long n : geometric_grid(10, 1000000, points)) {
    const SqueezingBound bound = max_violation_point(n);
    table.rows.push_back({static_cast<double>(n), bound.zeta2_star});
  }
  return table;
}

DataTable runs_per_spin_grid(int grid, int threads) {
  if (grid < 1) fail(errc::domain, "grid must be positive");
  constexpr long long kSpins = 100000;
  constexpr double kEpsilon = 0.01;
  const double scale =
      static_cast<double>(kSpins) * std::log(1.0 / kEpsilon);
  const std::vector<double> cbs = linspace(0.5, 0.995, grid);
  const std::vector<double> zetas = linspace(0.0, 0.6, grid);

  DataTable table;
  table.columns = {"cb", "zeta2", "runs_per_spin_scaled"};
  table.rows.resize(static_cast<std::size_t>(grid) * grid);
  std::exception_ptr pending = nullptr;
  const long long cells = static_cast<long long>(grid) * grid;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(resolve_threads(threads))
#endif
  for (long long cell = 0; cell < cells; ++cell) {
    const double cb = cbs[static_cast<std::size_t>(cell / grid)];
    const double zeta2 = zetas[static_cast<std::size_t>(cell % grid)];
    double value = kNan;
    try {
      value = static_cast<double>(
                  optimize_nu({cb, zeta2}, kSpins, kEpsilon).m_star) /
              scale;
    } catch (const error& e) {
      if (e.code() != errc::no_violation) {
#ifdef _OPENMP
#pragma omp critical(bellstat_fig3_error)
#endif
        if (!pending) pending = std::current_exception();
      }
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(bellstat_fig3_error)
#endif
      if (!pending) pending = std::current_exception();
    }
    table.rows[static_cast<std::size_t>(cell)] = {cb, zeta2, value};
  }
  if (pending) std::rethrow_exception(pending);
  return table;
}

DataTable nu_choice_table(int points) {
  if (points < 1) fail(errc::domain, "points must be positive");
  constexpr double kEpsilon = 0.01;
  const WitnessPoint point{kRefCb, kRefZeta2};
  DataTable table;
  table.columns = {"n", "m_violation", "m_optimized", "ratio"};
  for (long long n : geometric_grid(100, 1000000, points)) {
    const double nu_v = violation_nu(point);
    const long long m_v =
        runs_required(BoundKind::bernstein, w_stat(nu_v, point),
                      estimator_config(nu_v, n), kEpsilon);
    const NuOptimum opt = optimize_nu(point, n, kEpsilon);
    table.rows.push_back({static_cast<double>(n), static_cast<double>(m_v),
                          static_cast<double>(opt.m_star),
                          static_cast<double>(opt.m_star) /
                              static_cast<double>(m_v)});
  }
  return table;
}

DataTable finite_budget_table(int points) {
  if (points < 1) fail(errc::domain, "points must be positive");
  constexpr double kEpsilon = 0.1;
  constexpr long long kBudgets[] = {10000, 100000, 1000000};
  DataTable table;
  table.columns = {"n", "zeta2_budget_1e4", "zeta2_budget_1e5",
                   "zeta2_budget_1e6"};
  for (long long n : geometric_grid(10, 1000000, points)) {
    std::vector<double> row{static_cast<double>(n)};
    for (long long budget : kBudgets) {
      try {
        row.push_back(min_zeta_finite_runs(n, kRefCb, kEpsilon, budget));
      } catch (const error& e) {
        if (e.code() != errc::infeasible) throw;
        row.push_back(kNan);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

DataTable figure_table(const std::string& name, int resolution, int threads) {
  if (name == "fig1") return critical_lines_table(pick(resolution, 199), threads);
  if (name == "fig2") return squeezing_limit_table(pick(resolution, 41));
  if (name == "fig3") return runs_per_spin_grid(pick(resolution, 100), threads);
  if (name == "fig4") return nu_choice_table(pick(resolution, 17));
  if (name == "fig5") return finite_budget_table(pick(resolution, 25));
  fail(errc::domain, "unknown figure '" + name + "'");
}

}  // namespace bellstat
