#include "bellstat/stat_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bellstat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_runs(long long m_runs) {
  if (m_runs < 1)
    fail(errc::domain,
         "run count must be positive, got " + std::to_string(m_runs));
}

void require_violation(double t0) {
  if (!(t0 < 0.0))
    fail(errc::no_violation,
         "observed average must be negative, got " + std::to_string(t0));
}

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    fail(errc::domain,
         "epsilon must lie in (0, 1), got " + std::to_string(epsilon));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Real-valued Bernstein run bound at the worst case (mean 0, variance
// -t_l t_u); infinite when the observed mean cannot be negative.
double bernstein_runs_real(double t0, const EstimatorConfig& config,
                           double epsilon) {
  const double sigma2 = -config.t_l * config.t_u;
  if (!(t0 < 0.0) || !(sigma2 > 0.0)) return kInf;
  const double denom =
      2.0 * sigma2 - (2.0 / 3.0) * (config.t_u - config.t_l) * t0;
  return denom / (t0 * t0) * std::log(1.0 / epsilon);
}

}  // namespace

EstimatorConfig estimator_config(double nu, long long n, SupportMode mode) {
  if (n < 1) fail(errc::domain, "n must be positive, got " + std::to_string(n));
  const LimitConstants c = limit_constants(nu);
  const double l2 = c.lambda_nu * c.lambda_nu;
  EstimatorConfig out;
  out.nu = nu;
  out.n_spins = n;
  out.mode = mode;
  out.q = 1.0 / (1.0 + l2 * static_cast<double>(n) / (2.0 * c.delta_nu));
  out.t_l = 0.25 - c.delta_nu - l2;
  const double shift = mode == SupportMode::printed ? 1.0 : -1.0;
  out.t_u = 0.25 + c.delta_nu + l2 * (static_cast<double>(n) + shift);
  return out;
}

double worst_case_variance(double t_l, double t_u, double mu) {
  if (!(t_l <= mu && mu <= t_u))
    fail(errc::domain, "mean " + std::to_string(mu) +
                           " lies outside the support [" + std::to_string(t_l) +
                           ", " + std::to_string(t_u) + "]");
  return (t_u - mu) * (mu - t_l);
}

double chernoff_tail(double mu, double sigma2, double x0, long long m_runs) {
  require_runs(m_runs);
  if (!(sigma2 > 0.0))
    fail(errc::domain, "variance must be positive, got " +
                           std::to_string(sigma2));
  const double d = mu - x0;
  return std::exp(-d * d * static_cast<double>(m_runs) / (4.0 * sigma2));
}

double bernstein_tail(double mu, double sigma2, double a, double b, double x0,
                      long long m_runs) {
  require_runs(m_runs);
  if (!(sigma2 > 0.0))
    fail(errc::domain, "variance must be positive, got " +
                           std::to_string(sigma2));
  if (!(b > a)) fail(errc::domain, "support must satisfy b > a");
  const double d = mu - x0;
  const double denom = 2.0 * sigma2 + (2.0 / 3.0) * (b - a) * d;
  if (!(denom > 0.0))
    fail(errc::domain, "bound undefined: nonpositive denominator for x0 = " +
                           std::to_string(x0));
  return std::exp(-d * d * static_cast<double>(m_runs) / denom);
}

double uspensky_tail(double mu, double sigma2, double x0, long long m_runs) {
  require_runs(m_runs);
  if (!(sigma2 > 0.0))
    fail(errc::domain, "variance must be positive, got " +
                           std::to_string(sigma2));
  const double d = x0 - mu;
  return sigma2 / (sigma2 + d * d * static_cast<double>(m_runs));
}

double berry_esseen_tail(double mu, double sigma2, double rho, double x0,
                         long long m_runs) {
  require_runs(m_runs);
  if (!(sigma2 > 0.0))
    fail(errc::domain, "variance must be positive, got " +
                           std::to_string(sigma2));
  if (!(rho >= 0.0))
    fail(errc::domain, "third absolute moment must be nonnegative, got " +
                           std::to_string(rho));
  const double sigma = std::sqrt(sigma2);
  const double sigma3 = sigma * sigma2;
  const double root_m = std::sqrt(static_cast<double>(m_runs));
  const double phi = normal_cdf(root_m * (x0 - mu) / sigma);
  const double gap = 0.33554 * (rho + 0.415 * sigma3) / (sigma3 * root_m);
  return std::clamp(phi + gap, 0.0, 1.0);
}

BoundReport p_value(BoundKind kind, double t0, long long m_runs,
                    const EstimatorConfig& config) {
  require_runs(m_runs);
  require_violation(t0);
  BoundReport out;
  out.kind = kind;
  if (kind == BoundKind::berry_esseen) {
    // A mean-zero three-peak source drives the skewness correction past any
    // bound, so the worst case over admissible sources is trivial.
    out.p_value = 1.0;
    return out;
  }
  const double sigma2 = -config.t_l * config.t_u;
  if (!(sigma2 > 0.0)) {
    out.p_value = 0.0;  // degenerate support: no mass can reach t0 < 0
    return out;
  }
  switch (kind) {
    case BoundKind::chernoff:
      out.p_value = chernoff_tail(0.0, sigma2, t0, m_runs);
      break;
    case BoundKind::bernstein:
      out.p_value =
          bernstein_tail(0.0, sigma2, config.t_l, config.t_u, t0, m_runs);
      break;
    case BoundKind::uspensky:
      out.p_value = uspensky_tail(0.0, sigma2, t0, m_runs);
      break;
    default:
      fail(errc::domain, "unknown bound kind");
  }
  out.p_value = std::clamp(out.p_value, 0.0, 1.0);
  return out;
}

double three_peak_ratio(double x_l, double x_u, double p_u) {
  if (!(x_l < 0.0) || !(x_u > 0.0))
    fail(errc::domain, "three-peak support needs x_l < 0 < x_u");
  if (!(p_u > 0.0 && p_u < 1.0))
    fail(errc::domain,
         "upper mass must lie in (0, 1), got " + std::to_string(p_u));
  const double p_l = p_u * x_u / (-x_l);
  if (!(p_l < 1.0) || p_l + p_u > 1.0)
    fail(errc::domain, "mean-zero weights infeasible: p_l = " +
                           std::to_string(p_l) + ", p_u = " +
                           std::to_string(p_u));
  return (x_u * x_u + x_l * x_l) /
         std::sqrt(p_u * x_u * std::pow(x_u - x_l, 3.0));
}

long long runs_required(BoundKind kind, double t0,
                        const EstimatorConfig& config, double epsilon) {
  require_violation(t0);
  require_epsilon(epsilon);
  if (kind == BoundKind::berry_esseen)
    fail(errc::unbounded,
         "the Berry-Esseen worst case never drops below 1; no finite run "
         "count suffices");

  const double sigma2 = -config.t_l * config.t_u;
  if (!(sigma2 > 0.0)) return 1;  // degenerate support, any run certifies
  const double log_term = std::log(1.0 / epsilon);
  double real = 0.0;
  switch (kind) {
    case BoundKind::chernoff:
      real = 4.0 * sigma2 * log_term / (t0 * t0);
      break;
    case BoundKind::bernstein:
      real = bernstein_runs_real(t0, config, epsilon);
      break;
    case BoundKind::uspensky:
      real = sigma2 * (1.0 - epsilon) / (epsilon * t0 * t0);
      break;
    default:
      fail(errc::domain, "unknown bound kind");
  }
  if (!(real < 9.0e18))
    fail(errc::unbounded, "required run count exceeds representable range");

  long long m = std::max(1LL, static_cast<long long>(std::ceil(real)));
  // Float rounding can land the ceiling one off the true threshold; resolve
  // against the actual p-value so the inversion is exact.
  int guard = 0;
  while (p_value(kind, t0, m, config).p_value > epsilon && guard++ < 1000) ++m;
  while (m > 1 && p_value(kind, t0, m - 1, config).p_value <= epsilon &&
         guard++ < 2000)
    --m;
  return m;
}

NuOptimum optimize_nu(const WitnessPoint& point, long long n, double epsilon) {
  if (n < 1) fail(errc::domain, "n must be positive, got " + std::to_string(n));
  require_epsilon(epsilon);
  const double nu_v = violation_nu(point);
  if (!(w_stat(nu_v, point) < 0.0))
    fail(errc::no_violation,
         "the witness is nonnegative for every nu at this point");

  const auto objective = [&](double u) {
    const double nu = std::exp(u);
    const double t0 = w_stat(nu, point);
    if (!(t0 < 0.0)) return kInf;
    return bernstein_runs_real(t0, estimator_config(nu, n), epsilon);
  };

  // Coarse scan localizes the basin (the objective is smooth and unimodal on
  // the violating window), then golden-section refines to relative width
  // 1e-6 in nu.  Ties resolve toward smaller nu.
  const double u_min = std::log(1e-3), u_max = std::log(1e3);
  const int n_scan = 512;
  double u_best = std::clamp(std::log(nu_v), u_min, u_max);
  double f_best = objective(u_best);
  for (int i = 0; i <= n_scan; ++i) {
    const double u = u_min + (u_max - u_min) * i / n_scan;
    const double f = objective(u);
    if (f < f_best) {
      u_best = u;
      f_best = f;
    }
  }
  if (!std::isfinite(f_best))
    fail(errc::no_violation, "no nu in [1e-3, 1e3] yields a violation");

  const double spacing = (u_max - u_min) / n_scan;
  double lo = std::max(u_min, u_best - spacing);
  double hi = std::min(u_max, u_best + spacing);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - ratio * (hi - lo);
  double d = lo + ratio * (hi - lo);
  double f_c = objective(c), f_d = objective(d);
  while (hi - lo > 1e-6) {
    if (f_c <= f_d) {
      hi = d;
      d = c;
      f_d = f_c;
      c = hi - ratio * (hi - lo);
      f_c = objective(c);
    } else {
      lo = c;
      c = d;
      f_c = f_d;
      d = lo + ratio * (hi - lo);
      f_d = objective(d);
    }
  }
  const double u_star = f_c <= f_d ? c : d;
  if (!std::isfinite(objective(u_star)))
    fail(errc::no_violation, "no nu in [1e-3, 1e3] yields a violation");

  NuOptimum out;
  out.nu_star = std::exp(u_star);
  out.m_star = runs_required(BoundKind::bernstein, w_stat(out.nu_star, point),
                             estimator_config(out.nu_star, n), epsilon);
  return out;
}

double crossover_epsilon(double t_l, double t_u, double t0) {
  if (!(t_l < 0.0) || !(t_u > 0.0))
    fail(errc::domain, "support must satisfy t_l < 0 < t_u");
  require_violation(t0);
  const double sigma2 = -t_l * t_u;
  const double rhs = 2.0 + (2.0 / 3.0) * (t_u - t_l) * (-t0) / sigma2;
  // The left side (1 - eps) / (eps ln(1/eps)) decreases from +inf to 1 on
  // (0, 1), so a root exists exactly when rhs exceeds 1.
  if (!(rhs > 1.0))
    fail(errc::no_crossover,
         "ratio " + std::to_string(rhs) + " is below the attainable range");
  const auto gap = [&](double eps) {
    return (1.0 - eps) / (eps * std::log(1.0 / eps)) - rhs;
  };
  double lo = 1e-16, hi = 1.0 - 1e-16;
  double g_lo = gap(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = gap(mid);
    if (g_mid == 0.0) return mid;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace bellstat
