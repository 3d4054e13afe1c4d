#include "bellstat/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "bellstat/parallel.hpp"

namespace bellstat {

namespace {

constexpr double kRefCb = 0.98;
constexpr double kRefZeta2 = 0.272;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(8.0 * std::atan(1.0));
}

// Branch geometry of the estimator: per-round contributions and the derived
// constants shared by the gaussian and mixture samplers.
struct BranchTerms {
  double delta = 0.0;    // Delta_nu
  double l2 = 0.0;       // Lambda_nu^2
  double c_scale = 0.0;  // Delta_nu / q
  double z_scale = 0.0;  // Lambda_nu^2 / (1 - q)
};

BranchTerms branch_terms(const EstimatorConfig& config) {
  const LimitConstants c = limit_constants(config.nu);
  BranchTerms out;
  out.delta = c.delta_nu;
  out.l2 = c.lambda_nu * c.lambda_nu;
  out.c_scale = c.delta_nu / config.q;
  out.z_scale = out.l2 / (1.0 - config.q);
  return out;
}

double gaussian_round(const SourceModel& model, const EstimatorConfig& config,
                      const BranchTerms& terms, SplitRng& rng) {
  if (rng.uniform() < config.q) {
    double c = model.point.c_b;
    if (model.sd_c > 0.0)
      c = std::clamp(c + model.sd_c * rng.normal(), -1.0, 1.0);
    return config.t_l + terms.c_scale * (1.0 - c);
  }
  double z = model.point.zeta2;
  if (model.sd_z > 0.0)
    z = std::clamp(z + model.sd_z * rng.normal(), 0.0,
                   static_cast<double>(config.n_spins));
  return config.t_l + terms.z_scale * z;
}

double sample_round_unchecked(const SourceModel& model,
                              const EstimatorConfig& config, SplitRng& rng) {
  switch (model.kind) {
    case ModelKind::binomial_edge: {
      const double p_up = (model.mu - config.t_l) / (config.t_u - config.t_l);
      return rng.uniform() < p_up ? config.t_u : config.t_l;
    }
    case ModelKind::three_peak: {
      const double p_l = model.p_u * config.t_u / (-config.t_l);
      const double u = rng.uniform();
      if (u < model.p_u) return config.t_u;
      if (u < model.p_u + p_l) return config.t_l;
      return 0.0;
    }
    case ModelKind::gaussian_point:
      return gaussian_round(model, config, branch_terms(config), rng);
    case ModelKind::mixture_counterexample: {
      const BranchTerms terms = branch_terms(config);
      if (rng.uniform() < model.q_mix) {
        // Product component: deterministic branch values with the second
        // moment pinned at its maximum N and a vanishing first moment.
        if (rng.uniform() < config.q) return config.t_l + terms.c_scale;
        return config.t_l + terms.z_scale * static_cast<double>(config.n_spins);
      }
      return gaussian_round(model, config, terms, rng);
    }
  }
  fail(errc::invalid_model, "unknown model kind");
}

double gaussian_mean(const SourceModel& model, const EstimatorConfig& config,
                     const BranchTerms& terms) {
  const double mean_c =
      clamped_normal_mean(model.point.c_b, model.sd_c, -1.0, 1.0);
  const double mean_z = clamped_normal_mean(
      model.point.zeta2, model.sd_z, 0.0, static_cast<double>(config.n_spins));
  return config.t_l + terms.delta * (1.0 - mean_c) + terms.l2 * mean_z;
}

double run_one(const SourceModel& model, const EstimatorConfig& config,
               long long m_runs, SplitRng& rng) {
  double sum = 0.0;
  for (long long i = 0; i < m_runs; ++i) {
    rng.seek(4 * static_cast<std::uint64_t>(i));
    sum += sample_round_unchecked(model, config, rng);
  }
  return sum / static_cast<double>(m_runs);
}

}  // namespace

SourceModel SourceModel::binomial(double mu) {
  SourceModel out;
  out.kind = ModelKind::binomial_edge;
  out.mu = mu;
  return out;
}

SourceModel SourceModel::peaks(double p_u) {
  SourceModel out;
  out.kind = ModelKind::three_peak;
  out.p_u = p_u;
  return out;
}

SourceModel SourceModel::gaussian(const WitnessPoint& point, double sd_c,
                                  double sd_z) {
  SourceModel out;
  out.kind = ModelKind::gaussian_point;
  out.point = point;
  out.sd_c = sd_c;
  out.sd_z = sd_z;
  return out;
}

SourceModel SourceModel::mixture(double q_mix, const WitnessPoint& bell_point,
                                 double sd_c, double sd_z) {
  SourceModel out;
  out.kind = ModelKind::mixture_counterexample;
  out.q_mix = q_mix;
  out.point = bell_point;
  out.sd_c = sd_c;
  out.sd_z = sd_z;
  return out;
}

double clamped_normal_mean(double mu, double sd, double lo, double hi) {
  if (!(hi > lo)) fail(errc::domain, "clamp interval must satisfy lo < hi");
  if (!(sd >= 0.0))
    fail(errc::domain, "spread must be nonnegative, got " + std::to_string(sd));
  if (sd == 0.0) return std::clamp(mu, lo, hi);
  const double alpha = (lo - mu) / sd;
  const double beta = (hi - mu) / sd;
  return lo * normal_cdf(alpha) + hi * (1.0 - normal_cdf(beta)) +
         mu * (normal_cdf(beta) - normal_cdf(alpha)) -
         sd * (normal_pdf(beta) - normal_pdf(alpha));
}

void validate_model(const SourceModel& model, const EstimatorConfig& config) {
  if (!(config.t_l < 0.0 && config.t_u > 0.0))
    fail(errc::invalid_model, "estimator support must straddle zero");
  switch (model.kind) {
    case ModelKind::binomial_edge:
      if (!(model.mu >= 0.0 && model.mu <= config.t_u))
        fail(errc::invalid_model, "binomial mean must lie in [0, t_u], got " +
                                      std::to_string(model.mu));
      return;
    case ModelKind::three_peak: {
      if (!(model.p_u > 0.0 && model.p_u < 1.0))
        fail(errc::invalid_model, "upper mass must lie in (0, 1), got " +
                                      std::to_string(model.p_u));
      const double p_l = model.p_u * config.t_u / (-config.t_l);
      if (model.p_u + p_l > 1.0)
        fail(errc::invalid_model,
             "mean-zero weights infeasible: p_l = " + std::to_string(p_l));
      return;
    }
    case ModelKind::gaussian_point:
    case ModelKind::mixture_counterexample:
      if (!(model.point.c_b >= -1.0 && model.point.c_b <= 1.0))
        fail(errc::invalid_model, "c_b must lie in [-1, 1], got " +
                                      std::to_string(model.point.c_b));
      if (!(model.point.zeta2 >= 0.0 &&
            model.point.zeta2 <= static_cast<double>(config.n_spins)))
        fail(errc::invalid_model, "zeta2 must lie in [0, N], got " +
                                      std::to_string(model.point.zeta2));
      if (!(model.sd_c >= 0.0 && model.sd_z >= 0.0))
        fail(errc::invalid_model, "spreads must be nonnegative");
      if (model.kind == ModelKind::mixture_counterexample &&
          !(model.q_mix >= 0.0 && model.q_mix <= 1.0))
        fail(errc::invalid_model, "q_mix must lie in [0, 1], got " +
                                      std::to_string(model.q_mix));
      return;
  }
  fail(errc::invalid_model, "unknown model kind");
}

double sample_round(const SourceModel& model, const EstimatorConfig& config,
                    SplitRng& rng) {
  validate_model(model, config);
  return sample_round_unchecked(model, config, rng);
}

double analytic_mean(const SourceModel& model, const EstimatorConfig& config) {
  validate_model(model, config);
  switch (model.kind) {
    case ModelKind::binomial_edge:
      return model.mu;
    case ModelKind::three_peak:
      return 0.0;
    case ModelKind::gaussian_point:
      return gaussian_mean(model, config, branch_terms(config));
    case ModelKind::mixture_counterexample: {
      const BranchTerms terms = branch_terms(config);
      const double product_mean =
          config.t_l + terms.delta +
          terms.l2 * static_cast<double>(config.n_spins);
      return model.q_mix * product_mean +
             (1.0 - model.q_mix) * gaussian_mean(model, config, terms);
    }
  }
  fail(errc::invalid_model, "unknown model kind");
}

double support_max(const SourceModel& model, const EstimatorConfig& config) {
  validate_model(model, config);
  switch (model.kind) {
    case ModelKind::binomial_edge:
    case ModelKind::three_peak:
      return config.t_u;
    case ModelKind::gaussian_point:
    case ModelKind::mixture_counterexample: {
      const BranchTerms terms = branch_terms(config);
      const double c_min =
          model.sd_c > 0.0 ? -1.0 : std::clamp(model.point.c_b, -1.0, 1.0);
      const double nd = static_cast<double>(config.n_spins);
      double z_max =
          model.sd_z > 0.0 ? nd : std::clamp(model.point.zeta2, 0.0, nd);
      if (model.kind == ModelKind::mixture_counterexample &&
          model.q_mix > 0.0)
        z_max = nd;  // the product component pins the second moment at N
      return config.t_l + std::max(terms.c_scale * (1.0 - c_min),
                                   terms.z_scale * z_max);
    }
  }
  fail(errc::invalid_model, "unknown model kind");
}

TrialRecord run_experiment(const SourceModel& model,
                           const EstimatorConfig& config, long long m_runs,
                           std::uint64_t seed) {
  if (m_runs < 1)
    fail(errc::domain,
         "m_runs must be positive, got " + std::to_string(m_runs));
  validate_model(model, config);
  SplitRng rng(seed, 0);
  TrialRecord out;
  out.t_estimate = run_one(model, config, m_runs, rng);
  out.m_runs = m_runs;
  out.seed = seed;
  out.config = config;
  return out;
}

std::vector<double> run_batch(const SourceModel& model,
                              const EstimatorConfig& config, long long m_runs,
                              long long n_trials, std::uint64_t seed,
                              int threads) {
  if (m_runs < 1)
    fail(errc::domain,
         "m_runs must be positive, got " + std::to_string(m_runs));
  if (n_trials < 1)
    fail(errc::domain,
         "n_trials must be positive, got " + std::to_string(n_trials));
  validate_model(model, config);
  std::vector<double> out(static_cast<std::size_t>(n_trials));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
#endif
  for (long long trial = 0; trial < n_trials; ++trial) {
    SplitRng rng(seed, static_cast<std::uint64_t>(trial));
    out[static_cast<std::size_t>(trial)] = run_one(model, config, m_runs, rng);
  }
  return out;
}

double empirical_pvalue(const SourceModel& model, const EstimatorConfig& config,
                        double t0, long long m_runs, long long n_trials,
                        std::uint64_t seed, int threads) {
  const std::vector<double> estimates =
      run_batch(model, config, m_runs, n_trials, seed, threads);
  long long hits = 0;
  for (double t : estimates)
    if (t <= t0) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n_trials);
}

CounterexampleResult counterexample_demo(long long n, double q_mix,
                                         long long m_runs, long long n_trials,
                                         std::uint64_t seed,
                                         bool allow_violating) {
  const WitnessPoint bell{kRefCb, kRefZeta2};
  const EstimatorConfig config = estimator_config(violation_nu(bell), n);
  const SourceModel model = SourceModel::mixture(q_mix, bell, 0.0, 0.0);
  const double mean = analytic_mean(model, config);
  if (mean < 0.0 && !allow_violating)
    fail(errc::precondition,
         "mixture mean " + std::to_string(mean) +
             " is negative: a genuinely violating source, not a "
             "counterexample");
  const std::vector<double> estimates =
      run_batch(model, config, m_runs, n_trials, seed);
  CounterexampleResult out;
  long long below = 0;
  for (double t : estimates) {
    out.mean_t += t;
    if (t < 0.0) ++below;
  }
  out.mean_t /= static_cast<double>(n_trials);
  out.false_violation_rate =
      static_cast<double>(below) / static_cast<double>(n_trials);
  return out;
}

}  // namespace bellstat
