#pragma once

#include <string>
#include <vector>

#include "bellstat/errors.hpp"

namespace bellstat {

// Rectangular numeric dataset with optional leading string column; the CSV
// and JSON emitters in the CLI render it verbatim.  Infeasible cells hold
// quiet NaN.
struct DataTable {
  std::vector<std::string> columns;  // names of the numeric columns
  bool has_series = false;
  std::vector<std::string> series;   // per-row label when has_series
  std::vector<std::vector<double>> rows;
};

// Critical curves zeta2(c_b) for m = 2, 4, infinity plus the reference point
// (0.98, 0.272); long format with a series label per row.
DataTable critical_lines_table(int points = 199, int threads = 0);

// Largest violating second moment against spin count: (n, zeta2_star) on a
// geometric grid n in [10, 10^6].
DataTable squeezing_limit_table(int points = 41);

// nu-optimized Bernstein run count scaled to N ln(1/epsilon) over a
// (c_b, zeta2) grid at N = 10^5, epsilon = 0.01; NaN where no violation.
DataTable runs_per_spin_grid(int grid = 100, int threads = 0);

// Run counts at the witness-optimal and statistics-optimal settings scale
// over n in [10^2, 10^6] at (0.98, 0.272), epsilon = 0.01.
DataTable nu_choice_table(int points = 17);

// Largest second moment certifiable within run budgets {10^4, 10^5, 10^6}
// at c_b = 0.98, epsilon = 0.1, against spin count; NaN where infeasible.
DataTable finite_budget_table(int points = 25);

// Dispatch by figure name fig1..fig5; resolution 0 selects each figure's
// default (points, or grid side for fig3).
DataTable figure_table(const std::string& name, int resolution = 0,
                       int threads = 0);

}  // namespace bellstat
