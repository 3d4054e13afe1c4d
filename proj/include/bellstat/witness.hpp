#pragma once

#include <vector>

#include "bellstat/errors.hpp"

namespace bellstat {

// Measured pair: scaled collective spin along b and scaled second moment
// along a.  The witness family is symmetric under (c_b, thetas) ->
// (-c_b, -thetas), so curves are reported for c_b >= 0 only.
struct WitnessPoint {
  double c_b = 0.0;   // in [-1, 1]
  double zeta2 = 0.0; // >= 0
};

// Coplanar measurement directions for even m, parametrized by the first m/2
// angles (the remaining half follows from theta_{m-k-1} = -theta_k).  The
// optimizer produces theta_k = -arctan(lambda * (m - 2k - 1)) in (-pi/2, 0].
struct AngleSet {
  std::vector<double> thetas;  // length m/2
  double lambda = 0.0;         // > 0 when produced by solve_lambda
};

// Large-m limit constants
//   Lambda_nu = arsinh(nu) / (2 nu),
//   Delta_nu  = sqrt(1 + nu^2) / (4 nu) - arsinh(nu) / (4 nu^2),
// evaluated by series below nu = 1e-4 where the closed form cancels.
struct LimitConstants {
  double nu = 0.0;
  double lambda_nu = 0.0;
  double delta_nu = 0.0;
};

// Marker for the m -> infinity member of the witness family.
inline constexpr int settings_inf = -1;

// W_m = c_b sum_k alpha_k sin(theta_k)
//       - (1 - zeta2) [sum_k cos(theta_k)]^2 + m^2/4,   k < m/2.
double witness_value(int m, const AngleSet& angles, const WitnessPoint& point);

// Solves the self-consistency equation
//   c_b / (2 lambda (1 - zeta2)) = sum_k 1 / sqrt(1 + lambda^2 (m-2k-1)^2)
// by a logarithmic scan (64 points per decade over [1e-6, 1e6]) with
// bisection refinement of every sign change; among multiple roots the one
// minimizing witness_value wins.  Requires 0 < c_b < 1 and 0 <= zeta2 < 1.
AngleSet solve_lambda(int m, const WitnessPoint& point);

// Lambda_m(lambda) = sum_{k=1}^{m/2} 1 / sqrt(1 + lambda^2 (2k-1)^2),
// Delta_m(lambda)  = sum_{k=1}^{m/2} lambda (2k-1)^2 / sqrt(same).
struct FiniteConstants {
  double lambda_m = 0.0;
  double delta_m = 0.0;
};
FiniteConstants finite_constants(int m, double lambda);

LimitConstants limit_constants(double nu);

// W_stat = -c_b Delta_nu - (1 - zeta2) Lambda_nu^2 + 1/4.
double w_stat(double nu, const WitnessPoint& point);

// The stationary nu of W_stat: sinh(c_b / (1 - zeta2)).
double violation_nu(const WitnessPoint& point);

// Critical curve Z_m(c_b): the scaled second moment at which the
// angle-minimized witness vanishes.  Closed forms for m = 2 and
// m = settings_inf; a nested numeric solve (inner angle optimization,
// outer zeta bisection, inner tolerance 100x tighter) otherwise.
double critical_zeta(int m, double c_b);

// Numeric-only routes, used to cross-validate the closed forms.
double critical_zeta_numeric(int m, double c_b);      // any even m >= 2
double critical_zeta_inf_numeric(double c_b);         // nu-based solver

// Order-preserving curve sweep; the OpenMP kernel and the serial reference
// produce identical vectors.
std::vector<double> critical_curve(int m, const std::vector<double>& c_bs,
                                   int threads = 0);
std::vector<double> critical_curve_serial(int m,
                                          const std::vector<double>& c_bs);

}  // namespace bellstat
