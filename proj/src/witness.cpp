#include "bellstat/witness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <utility>

#include "bellstat/parallel.hpp"

namespace bellstat {

namespace {

void require_even_settings(int m) {
  if (m < 2 || m % 2 != 0)
    fail(errc::unsupported,
         "witness family is defined for even m >= 2, got " +
             std::to_string(m));
}

void require_point_domain(const WitnessPoint& point) {
  if (!(point.c_b > 0.0 && point.c_b < 1.0))
    fail(errc::domain,
         "c_b must lie in (0, 1), got " + std::to_string(point.c_b));
  if (!(point.zeta2 >= 0.0 && point.zeta2 < 1.0))
    fail(errc::domain,
         "zeta2 must lie in [0, 1), got " + std::to_string(point.zeta2));
}

// lambda * Lambda_m(lambda): strictly increasing from 0 to the odd harmonic
// sum 1 + 1/3 + ... + 1/(m-1); the self-consistency equation has a root iff
// c_b / (2 (1 - zeta2)) stays below that limit.
double lambda_times_lambda_m(int m, double lambda) {
  double sum = 0.0;
  for (int k = 1; k <= m / 2; ++k) {
    const double odd = 2.0 * k - 1.0;
    sum += lambda / std::sqrt(1.0 + lambda * lambda * odd * odd);
  }
  return sum;
}

long long alpha_coefficient_local(int m, int k) { return m - 2LL * k - 1; }

AngleSet angles_for_lambda(int m, double lambda) {
  AngleSet angles;
  angles.lambda = lambda;
  angles.thetas.resize(static_cast<std::size_t>(m / 2));
  for (int k = 0; k < m / 2; ++k)
    angles.thetas[static_cast<std::size_t>(k)] =
        -std::atan(lambda * static_cast<double>(alpha_coefficient_local(m, k)));
  return angles;
}

// Bisection for a bracketed root of f (f(lo) and f(hi) of opposite sign),
// refined to relative tolerance `rel` on the root location.
template <typename F>
double bisect(F&& f, double lo, double hi, double f_lo, double rel) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel * std::max(1.0, std::abs(mid))) return mid;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double witness_value(int m, const AngleSet& angles, const WitnessPoint& point) {
  require_even_settings(m);
  if (angles.thetas.size() != static_cast<std::size_t>(m / 2))
    fail(errc::domain, "angle set must have m/2 entries");
  double sin_term = 0.0;
  double cos_sum = 0.0;
  for (int k = 0; k < m / 2; ++k) {
    const double theta = angles.thetas[static_cast<std::size_t>(k)];
    sin_term +=
        static_cast<double>(alpha_coefficient_local(m, k)) * std::sin(theta);
    cos_sum += std::cos(theta);
  }
  const double m2 = static_cast<double>(m) * m;
  return point.c_b * sin_term - (1.0 - point.zeta2) * cos_sum * cos_sum +
         m2 / 4.0;
}

FiniteConstants finite_constants(int m, double lambda) {
  require_even_settings(m);
  if (!(lambda > 0.0))
    fail(errc::domain, "lambda must be positive, got " + std::to_string(lambda));
  FiniteConstants out;
  for (int k = 1; k <= m / 2; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double root = std::sqrt(1.0 + lambda * lambda * odd * odd);
    out.lambda_m += 1.0 / root;
    out.delta_m += lambda * odd * odd / root;
  }
  return out;
}

AngleSet solve_lambda(int m, const WitnessPoint& point) {
  require_even_settings(m);
  require_point_domain(point);

  const double target = point.c_b / (2.0 * (1.0 - point.zeta2));
  const auto g = [&](double lambda) {
    return target - lambda_times_lambda_m(m, lambda);
  };

  // Scan lambda on a log grid (64 points per decade over [1e-6, 1e6]) and
  // refine every sign change; g is monotone in exact arithmetic, but the
  // scan keeps the solver honest about multiple numerical roots.
  constexpr double kLo = 1e-6, kHi = 1e6;
  constexpr int kPerDecade = 64;
  const int decades = 12;
  const int n_points = decades * kPerDecade + 1;

  std::vector<double> roots;
  double prev_lambda = kLo;
  double prev_g = g(prev_lambda);
  for (int i = 1; i < n_points; ++i) {
    const double lambda =
        kLo * std::pow(10.0, static_cast<double>(i) / kPerDecade);
    const double cur_g = g(lambda);
    if (prev_g == 0.0) {
      roots.push_back(prev_lambda);
    } else if ((prev_g < 0.0) != (cur_g < 0.0)) {
      roots.push_back(bisect(g, prev_lambda, lambda, prev_g, 1e-12));
    }
    prev_lambda = lambda;
    prev_g = cur_g;
  }
  if (prev_g == 0.0) roots.push_back(prev_lambda);

  if (roots.empty())
    fail(errc::convergence,
         "self-consistency equation has no root in [1e-6, 1e6]: g(1e-6) = " +
             std::to_string(g(kLo)) + ", g(1e6) = " + std::to_string(g(kHi)) +
             " (target " + std::to_string(target) + ")");

  AngleSet best = angles_for_lambda(m, roots.front());
  double best_value = witness_value(m, best, point);
  for (std::size_t i = 1; i < roots.size(); ++i) {
    AngleSet candidate = angles_for_lambda(m, roots[i]);
    const double value = witness_value(m, candidate, point);
    if (value < best_value) {
      best = std::move(candidate);
      best_value = value;
    }
  }
  return best;
}

LimitConstants limit_constants(double nu) {
  if (!(nu > 0.0))
    fail(errc::domain, "nu must be positive, got " + std::to_string(nu));
  LimitConstants out;
  out.nu = nu;
  if (nu <= 1e-4) {
    // Up to 1e-4 the closed form for Delta loses ~8 digits to cancellation;
    // the series is exact to well past double precision there.
    const double nu2 = nu * nu;
    out.lambda_nu = 0.5 - nu2 / 12.0 + 3.0 * nu2 * nu2 / 80.0;
    out.delta_nu = nu / 6.0 - nu * nu2 / 20.0;
    return out;
  }
  const double root = std::sqrt(1.0 + nu * nu);
  const double as = std::asinh(nu);
  out.lambda_nu = as / (2.0 * nu);
  out.delta_nu = root / (4.0 * nu) - as / (4.0 * nu * nu);
  return out;
}

double w_stat(double nu, const WitnessPoint& point) {
  const LimitConstants c = limit_constants(nu);
  return -point.c_b * c.delta_nu -
         (1.0 - point.zeta2) * c.lambda_nu * c.lambda_nu + 0.25;
}

double violation_nu(const WitnessPoint& point) {
  require_point_domain(point);
  return std::sinh(point.c_b / (1.0 - point.zeta2));
}

namespace {

// Witness minimum over angles at fixed (m, c_b, zeta2); positive whenever the
// self-consistency equation has no root (the minimum then sits on the domain
// boundary, where W >= m^2/4 (1 - c_b) > 0 for c_b < 1).
double min_witness_over_angles(int m, const WitnessPoint& point) {
  try {
    const AngleSet angles = solve_lambda(m, point);
    return witness_value(m, angles, point);
  } catch (const error& e) {
    if (e.code() == errc::convergence)
      return static_cast<double>(m) * m / 4.0 * (1.0 - point.c_b);
    throw;
  }
}

// Shared outer bisection: finds the zero of `min_w` (negative at zeta = 0,
// positive toward zeta = 1) with bracket expansion by doubling toward 1.
template <typename MinW>
double outer_zeta_root(MinW&& min_w, double c_b) {
  if (c_b == 0.0) return 0.0;  // continuity limit of the whole family
  double w0 = min_w(0.0);
  if (w0 >= 0.0) return 0.0;

  double lo = 0.0, hi = 0.5;
  double w_hi = min_w(hi);
  int guard = 0;
  while (w_hi < 0.0) {
    lo = hi;
    w0 = w_hi;
    hi = 0.5 * (1.0 + hi);  // halve the gap to 1
    w_hi = min_w(hi);
    if (++guard > 200)
      fail(errc::convergence, "no sign change in zeta below 1 for c_b = " +
                                  std::to_string(c_b));
  }
  return bisect(min_w, lo, hi, w0, 1e-10);
}

}  // namespace

double critical_zeta_numeric(int m, double c_b) {
  require_even_settings(m);
  if (!(c_b >= 0.0 && c_b < 1.0))
    fail(errc::domain, "c_b must lie in [0, 1), got " + std::to_string(c_b));
  return outer_zeta_root(
      [&](double z) { return min_witness_over_angles(m, {c_b, z}); }, c_b);
}

double critical_zeta_inf_numeric(double c_b) {
  if (!(c_b >= 0.0 && c_b < 1.0))
    fail(errc::domain, "c_b must lie in [0, 1), got " + std::to_string(c_b));
  return outer_zeta_root(
      [&](double z) {
        const WitnessPoint p{c_b, z};
        return w_stat(violation_nu(p), p);
      },
      c_b);
}

double critical_zeta(int m, double c_b) {
  if (!(c_b >= 0.0 && c_b < 1.0))
    fail(errc::domain, "c_b must lie in [0, 1), got " + std::to_string(c_b));
  if (m == settings_inf) {
    if (c_b == 0.0) return 0.0;
    return 1.0 - c_b / std::atanh(c_b);
  }
  require_even_settings(m);
  if (m == 2) return 0.5 * (1.0 - std::sqrt(1.0 - c_b * c_b));
  return critical_zeta_numeric(m, c_b);
}

std::vector<double> critical_curve_serial(int m,
                                          const std::vector<double>& c_bs) {
  std::vector<double> out(c_bs.size());
  for (std::size_t i = 0; i < c_bs.size(); ++i)
    out[i] = critical_zeta(m, c_bs[i]);
  return out;
}

std::vector<double> critical_curve(int m, const std::vector<double>& c_bs,
                                   int threads) {
  std::vector<double> out(c_bs.size());
  const auto n = static_cast<long long>(c_bs.size());
  // Exceptions must not escape the parallel region; capture the first one
  // and rethrow after the loop completes.
  std::exception_ptr pending = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(resolve_threads(threads))
#endif
  for (long long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] =
          critical_zeta(m, c_bs[static_cast<std::size_t>(i)]);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(bellstat_curve_error)
#endif
      if (!pending) pending = std::current_exception();
    }
  }
  if (pending) std::rethrow_exception(pending);
  return out;
}

}  // namespace bellstat
