#pragma once

#include "bellstat/errors.hpp"

namespace bellstat {

// Joint bound on (c_b, zeta2) for an N-spin state together with the critical
// curve; zeta2_star = Z_inf(c_b_star) at the intersection.
struct SqueezingBound {
  long long n_spins = 0;
  double c_b_star = 0.0;   // largest first moment admitting violation
  double zeta2_star = 0.0; // largest second moment admitting violation
};

// Least scaled second moment any N-spin state can reach at first moment c_b:
// 1 - (N/2) [ sqrt((1 - c_b^2)((1 + 2/N)^2 - c_b^2)) + c_b^2 - 1 ].
double min_zeta_spin_constraint(long long n, double c_b);

// Intersection of the spin constraint with the m -> infinity critical curve;
// the returned point maximizes the violating region reachable with N spins.
double z_star_asymptotic(long long n);
SqueezingBound max_violation_point(long long n);

// Lower branch W_{-1} of the Lambert W function on (-1/e, 0): the solution
// w <= -1 of w e^w = x, accurate to relative residual 1e-12.
double lambert_w_lower(double x);

// Largest zeta2 at which the nu-optimized Bernstein run count for witnessing
// (c_b, zeta2) with confidence 1 - epsilon stays within m_budget runs.
double min_zeta_finite_runs(long long n, double c_b, double epsilon,
                            long long m_budget);

}  // namespace bellstat
