#include "bellstat/squeezing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bellstat/stat_bounds.hpp"
#include "bellstat/witness.hpp"

namespace bellstat {

namespace {

constexpr double kE = 2.718281828459045235360287471352662498;

// W_{-1} branch expansion about the branch point x = -1/e, in the variable
// p = -sqrt(2 (e x + 1)) (negative root selects the lower branch).
double lambert_branch_series(double p) {
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 +
                                p * (11.0 / 72.0 + p * (-43.0 / 540.0))));
}

}  // namespace

double min_zeta_spin_constraint(long long n, double c_b) {
  if (n < 1) fail(errc::domain, "n must be positive, got " + std::to_string(n));
  if (!(c_b >= 0.0 && c_b <= 1.0))
    fail(errc::domain, "c_b must lie in [0, 1], got " + std::to_string(c_b));
  const double nd = static_cast<double>(n);
  const double edge = 1.0 + 2.0 / nd;
  const double c2 = c_b * c_b;
  const double radicand = std::max(0.0, (1.0 - c2) * (edge * edge - c2));
  return 1.0 - 0.5 * nd * (std::sqrt(radicand) + c2 - 1.0);
}

SqueezingBound max_violation_point(long long n) {
  if (n < 2) fail(errc::domain, "n must be at least 2, got " + std::to_string(n));
  // Spin constraint minus critical curve: ~ c^2 (1/(N+2) - 1/3) < 0 near 0,
  // positive near 1 where the constraint outruns Z_inf.
  const auto gap = [&](double c) {
    return min_zeta_spin_constraint(n, c) - critical_zeta(settings_inf, c);
  };
  double lo = 1e-6, hi = 1.0 - 1e-12;
  double g_lo = gap(lo);
  // Near zero the true gap scales like c^2 while rounding noise in the spin
  // constraint scales like N*eps, so at large N the sign at a tiny endpoint
  // is unreliable; walk the endpoint inward until the analytic sign emerges.
  // The root exceeds 0.8 for every n >= 2, so anything below 0.5 is still a
  // valid left bracket.
  while (!(g_lo < 0.0) && lo < 0.5) {
    lo *= 4.0;
    g_lo = gap(lo);
  }
  const double g_hi = gap(hi);
  if ((g_lo < 0.0) == (g_hi < 0.0))
    fail(errc::infeasible,
         "constraint and critical curve do not cross for n = " +
             std::to_string(n));
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = gap(mid);
    if (g_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  SqueezingBound out;
  out.n_spins = n;
  out.c_b_star = 0.5 * (lo + hi);
  out.zeta2_star = critical_zeta(settings_inf, out.c_b_star);
  return out;
}

double lambert_w_lower(double x) {
  if (!(x < 0.0))
    fail(errc::domain,
         "lambert_w_lower needs x in (-1/e, 0), got " + std::to_string(x));
  const double u = 1.0 + kE * x;  // distance to the branch point, scaled
  if (u < -1e-12)
    fail(errc::domain,
         "lambert_w_lower needs x in (-1/e, 0), got " + std::to_string(x));
  if (u <= 0.0) return -1.0;  // branch point, accepted with closed tolerance

  const double p = -std::sqrt(2.0 * u);
  if (-p < 1e-4) return lambert_branch_series(p);

  // Seed from the branch series near the branch point (where the asymptotic
  // seed degenerates), otherwise from the standard two-log asymptotic.
  double w;
  if (-p < 0.5) {
    w = lambert_branch_series(p);
  } else {
    const double l1 = std::log(-x);
    w = l1 - std::log(-l1);
  }

  // Halley iteration on f(w) = w e^w - x.
  for (int it = 0; it < 60; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= 1e-13 * std::abs(x)) break;
    const double fp = ew * (w + 1.0);
    const double step = f / (fp - f * (w + 2.0) / (2.0 * (w + 1.0)));
    w -= step;
    if (std::abs(step) <= 1e-16 * std::abs(w)) break;
  }
  if (!(w <= -1.0 + 1e-9) ||
      std::abs(w * std::exp(w) - x) > 1e-12 * std::abs(x))
    fail(errc::convergence,
         "lambert_w_lower failed to converge at x = " + std::to_string(x));
  return std::min(w, -1.0);
}

double z_star_asymptotic(long long n) {
  if (n < 1) fail(errc::domain, "n must be positive, got " + std::to_string(n));
  const double x = -0.5 / std::sqrt(static_cast<double>(n) + 1.0);
  // The expansion is written in the magnitude of the lower-branch value.
  const double w = std::abs(lambert_w_lower(x));
  const double w2 = w * w;
  return 1.0 - 1.0 / w - 0.5 / (w * w2) - 0.75 / (w2 * w2);
}

double min_zeta_finite_runs(long long n, double c_b, double epsilon,
                            long long m_budget) {
  if (n < 1) fail(errc::domain, "n must be positive, got " + std::to_string(n));
  if (!(c_b > 0.0 && c_b < 1.0))
    fail(errc::domain, "c_b must lie in (0, 1), got " + std::to_string(c_b));
  if (!(epsilon > 0.0 && epsilon < 1.0))
    fail(errc::domain,
         "epsilon must lie in (0, 1), got " + std::to_string(epsilon));
  if (m_budget < 1)
    fail(errc::domain,
         "m_budget must be positive, got " + std::to_string(m_budget));

  // The run count grows monotonically in zeta2 and diverges at the critical
  // curve, so the feasible set is an interval [0, z*] inside [0, Z_inf(c_b)).
  const double z_cap = critical_zeta(settings_inf, c_b);
  const auto fits_budget = [&](double z) {
    try {
      return optimize_nu({c_b, z}, n, epsilon).m_star <= m_budget;
    } catch (const error& e) {
      if (e.code() == errc::no_violation) return false;
      throw;
    }
  };

  if (!fits_budget(0.0))
    fail(errc::infeasible,
         "budget of " + std::to_string(m_budget) +
             " runs is insufficient even at zeta2 = 0 for c_b = " +
             std::to_string(c_b));

  double lo = 0.0, hi = z_cap;
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fits_budget(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace bellstat
