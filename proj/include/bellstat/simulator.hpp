#pragma once

#include <cstdint>
#include <vector>

#include "bellstat/errors.hpp"
#include "bellstat/rng.hpp"
#include "bellstat/stat_bounds.hpp"
#include "bellstat/witness.hpp"

namespace bellstat {

enum class ModelKind {
  binomial_edge,            // two-point distribution on {t_l, t_u}
  three_peak,               // mean-zero atoms {t_l, 0, t_u}
  gaussian_point,           // clamped normal draws around a witness point
  mixture_counterexample,   // bell component mixed with a product component
};

// Single-round source model for the estimator T.  Only the fields of the
// active variant are read:
//   binomial_edge          -> mu (round mean, in [0, t_u])
//   three_peak             -> p_u (mass on the upper atom)
//   gaussian_point         -> point, sd_c, sd_z
//   mixture_counterexample -> q_mix, point (bell component), sd_c, sd_z; the
//                             product component is deterministic with the
//                             second moment at its maximum N
struct SourceModel {
  ModelKind kind = ModelKind::binomial_edge;
  double mu = 0.0;
  double p_u = 0.0;
  WitnessPoint point{0.0, 0.0};
  double sd_c = 0.0;
  double sd_z = 0.0;
  double q_mix = 0.0;

  static SourceModel binomial(double mu);
  static SourceModel peaks(double p_u);
  static SourceModel gaussian(const WitnessPoint& point, double sd_c,
                              double sd_z);
  static SourceModel mixture(double q_mix, const WitnessPoint& bell_point,
                             double sd_c, double sd_z);
};

struct TrialRecord {
  double t_estimate = 0.0;  // mean of m_runs single-round values
  long long m_runs = 0;
  std::uint64_t seed = 0;
  EstimatorConfig config;
};

struct CounterexampleResult {
  double mean_t = 0.0;                // average estimate across trials
  double false_violation_rate = 0.0;  // fraction of trials with estimate < 0
};

// Mean of a normal(mu, sd) draw clamped to [lo, hi] (censored mean).
double clamped_normal_mean(double mu, double sd, double lo, double hi);

void validate_model(const SourceModel& model, const EstimatorConfig& config);

// One round of the estimator.  Consumes at most 4 counter slots; calls for
// distinct rounds must be separated by rng.seek(4 * round_index).
double sample_round(const SourceModel& model, const EstimatorConfig& config,
                    SplitRng& rng);

// Exact mean of sample_round (clamping bias included for gaussian models).
double analytic_mean(const SourceModel& model, const EstimatorConfig& config);

// Largest value sample_round can return for this model.
double support_max(const SourceModel& model, const EstimatorConfig& config);

// Average of m_runs rounds on RNG stream 0 of the given seed; equals trial 0
// of run_batch with the same parameters.
TrialRecord run_experiment(const SourceModel& model,
                           const EstimatorConfig& config, long long m_runs,
                           std::uint64_t seed);

// n_trials independent experiments; trial i draws from RNG stream i, so the
// result is identical for every worker count.
std::vector<double> run_batch(const SourceModel& model,
                              const EstimatorConfig& config, long long m_runs,
                              long long n_trials, std::uint64_t seed,
                              int threads = 0);

// Fraction of trials whose estimate falls at or below t0.
double empirical_pvalue(const SourceModel& model, const EstimatorConfig& config,
                        double t0, long long m_runs, long long n_trials,
                        std::uint64_t seed, int threads = 0);

// False-violation study for a mixture whose bell component sits at a strongly
// violating reference point (0.98, 0.272): a q_mix chosen so the overall mean
// is nonnegative still produces negative estimates at small m_runs.  Mixtures
// with negative mean are rejected unless allow_violating is set (they are
// genuinely violating sources, not counterexamples).
CounterexampleResult counterexample_demo(long long n, double q_mix,
                                         long long m_runs, long long n_trials,
                                         std::uint64_t seed,
                                         bool allow_violating = false);

}  // namespace bellstat
