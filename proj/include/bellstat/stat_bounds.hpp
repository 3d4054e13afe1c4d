#pragma once

#include "bellstat/errors.hpp"
#include "bellstat/witness.hpp"

namespace bellstat {

enum class BoundKind { chernoff, bernstein, uspensky, berry_esseen };

// Upper end of the single-round estimator support. `printed` keeps the
// conventional value t_u = 1/4 + Delta + Lambda^2 (N + 1); `derived` uses
// the tighter 1/4 + Delta + Lambda^2 (N - 1) implied by the equal-magnitude
// condition on the two measurement branches. Analytic reports default to
// `printed`.
enum class SupportMode { printed, derived };

// Parameters of the single-round estimator T at settings scale nu and N
// spins: q is the probability of the first-moment measurement, [t_l, t_u]
// the support of T.
struct EstimatorConfig {
  double nu = 0.0;
  long long n_spins = 0;
  double q = 0.0;
  double t_l = 0.0;
  double t_u = 0.0;
  SupportMode mode = SupportMode::printed;
};

struct BoundReport {
  BoundKind kind = BoundKind::bernstein;
  double p_value = 1.0;
};

struct NuOptimum {
  double nu_star = 0.0;
  long long m_star = 0;
};

EstimatorConfig estimator_config(double nu, long long n,
                                 SupportMode mode = SupportMode::printed);

// Maximal variance of any distribution supported on [t_l, t_u] with mean mu:
// (t_u - mu)(mu - t_l), attained by the two-point distribution on the ends.
double worst_case_variance(double t_l, double t_u, double mu);

// Worst-case p-value over all sources with nonnegative mean on the estimator
// support (mean 0, variance -t_l t_u), given an observed average t0 < 0 after
// m_runs rounds.  berry_esseen always reports 1: a three-peak distribution
// makes its skewness correction arbitrarily large.
BoundReport p_value(BoundKind kind, double t0, long long m_runs,
                    const EstimatorConfig& config);

// Skewness-to-sigma^3 ratio of the mean-zero three-peak distribution with
// atoms {x_l, 0, x_u} and upper mass p_u; grows without bound as p_u -> 0.
double three_peak_ratio(double x_l, double x_u, double p_u);

// Smallest integer M with p_value(kind, t0, M, config) <= epsilon.
long long runs_required(BoundKind kind, double t0,
                        const EstimatorConfig& config, double epsilon);

// Minimizes the Bernstein run count over the settings scale nu > 0.
NuOptimum optimize_nu(const WitnessPoint& point, long long n, double epsilon);

// Confidence level at which the Bernstein and Uspensky run counts coincide:
// solves (1 - eps) / (eps ln(1/eps)) = 2 + (2/3)(t_u - t_l)(-t0) / sigma^2.
double crossover_epsilon(double t_l, double t_u, double t0);

// Raw one-sided tail bounds on P[sample mean <= x0] for M iid rounds with
// mean mu, per-round variance sigma2 and support [a, b], evaluated exactly as
// stated (validity windows are the caller's responsibility):
//   chernoff:  exp(-(mu - x0)^2 M / (4 sigma2)), valid for
//              mu >= x0 >= mu - sigma2 / (b - a);
//   bernstein: exp(-(mu - x0)^2 M / (2 sigma2 + (2/3)(b - a)(mu - x0)));
//   uspensky:  sigma2 / (sigma2 + (x0 - mu)^2 M), requires b >= |a|;
//   berry-esseen (refined-constant gap form with third absolute moment rho):
//              Phi(sqrt(M) (x0 - mu) / sigma) + 0.33554 (rho + 0.415 sigma^3)
//              / (sigma^3 sqrt(M)), clipped to [0, 1].
double chernoff_tail(double mu, double sigma2, double x0, long long m_runs);
double bernstein_tail(double mu, double sigma2, double a, double b, double x0,
                      long long m_runs);
double uspensky_tail(double mu, double sigma2, double x0, long long m_runs);
double berry_esseen_tail(double mu, double sigma2, double rho, double x0,
                         long long m_runs);

}  // namespace bellstat
