#include "bellstat/inequality.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <string>

#include "bellstat/parallel.hpp"

namespace bellstat {

namespace {

// Enumeration keeps three per-pattern weights so the objective is an O(1)
// update along the multiset walk:
//   w1(s) = sum_k alpha_k x_k(s)   (one-body part),
//   r(s)  = sum_k x_k(s)           (per-party outcome sum),
//   r2(s) = r(s)^2,
// giving 2*I = 2*sum_s c_s w1(s) + (sum_s c_s r(s))^2 - sum_s c_s r2(s).
struct PatternTables {
  std::vector<long long> w1;
  std::vector<long long> r;
  std::vector<long long> r2;
};

PatternTables make_tables(int m) {
  const std::uint32_t n_patterns = 1u << m;
  PatternTables t;
  t.w1.resize(n_patterns);
  t.r.resize(n_patterns);
  t.r2.resize(n_patterns);
  for (std::uint32_t s = 0; s < n_patterns; ++s) {
    long long w1 = 0;
    for (int k = 0; k < m; ++k) {
      const long long x = (s >> k) & 1u ? -1 : 1;
      w1 += alpha_coefficient(m, k) * x;
    }
    const long long r = m - 2 * std::popcount(s);
    t.w1[s] = w1;
    t.r[s] = r;
    t.r2[s] = r * r;
  }
  return t;
}

void validate_counts(const BellScenario& scenario,
                     const StrategyCounts& counts) {
  const std::size_t expected = std::size_t{1} << scenario.n_settings;
  if (counts.counts.size() != expected)
    fail(errc::invalid_counts,
         "expected " + std::to_string(expected) + " strategy classes, got " +
             std::to_string(counts.counts.size()));
  long long total = 0;
  for (long long c : counts.counts) {
    if (c < 0) fail(errc::invalid_counts, "negative strategy multiplicity");
    total += c;
  }
  if (total != scenario.n_parties)
    fail(errc::invalid_counts,
         "multiplicities sum to " + std::to_string(total) + ", expected N = " +
             std::to_string(scenario.n_parties));
}

// Walks every weak composition of `total` over bins [first, K) of `counts`
// in lexicographic order starting from (total, 0, ..., 0), maintaining the
// three running sums.  Bins below `first` are frozen (already folded into
// the sums by the caller).
class CompositionWalker {
 public:
  CompositionWalker(const PatternTables& tables, std::vector<long long>& counts,
                    int first, long long total)
      : tables_(tables), counts_(counts), first_(first), total_(total) {
    const int last = static_cast<int>(counts_.size()) - 1;
    for (int i = first_; i <= last; ++i) counts_[i] = 0;
    counts_[first_] = total_;
    sum_w1_ = total_ * tables_.w1[first_];
    sum_r_ = total_ * tables_.r[first_];
    sum_r2_ = total_ * tables_.r2[first_];
  }

  // Objective for the current state, exact in integers.
  long long value_times_two() const {
    return 2 * base_w1_ + 2 * sum_w1_ + (base_r_ + sum_r_) * (base_r_ + sum_r_) -
           (base_r2_ + sum_r2_);
  }

  // Folds the frozen prefix contribution in once.
  void set_base(long long w1, long long r, long long r2) {
    base_w1_ = w1;
    base_r_ = r;
    base_r2_ = r2;
  }

  bool advance() {
    const int last = static_cast<int>(counts_.size()) - 1;
    if (counts_[last] == total_) return false;
    int j = last - 1;
    while (counts_[j] == 0) --j;  // exists: counts_[last] < total_
    const long long tail = counts_[last];
    apply_delta(j, -1);
    if (j + 1 == last) {
      apply_delta(last, 1);  // net effect of zeroing the tail and adding it back
    } else {
      apply_delta(j + 1, tail + 1);
      apply_delta(last, -tail);
    }
    return true;
  }

 private:
  void apply_delta(int bin, long long delta) {
    counts_[bin] += delta;
    sum_w1_ += delta * tables_.w1[bin];
    sum_r_ += delta * tables_.r[bin];
    sum_r2_ += delta * tables_.r2[bin];
  }

  const PatternTables& tables_;
  std::vector<long long>& counts_;
  int first_;
  long long total_;
  long long sum_w1_ = 0, sum_r_ = 0, sum_r2_ = 0;
  long long base_w1_ = 0, base_r_ = 0, base_r2_ = 0;
};

struct BlockResult {
  long long min_value = std::numeric_limits<long long>::max();
  std::vector<StrategyCounts> minimizers;
  std::uint64_t n_states = 0;
};

// Enumerates the block with counts[0] fixed to `head` (the whole space when
// K == 1 bins remain is handled by the same walker with first = 1).
BlockResult enumerate_block(const BellScenario& scenario,
                            const PatternTables& tables, long long head) {
  const int n_patterns = 1 << scenario.n_settings;
  std::vector<long long> counts(static_cast<std::size_t>(n_patterns), 0);
  counts[0] = head;

  BlockResult result;
  CompositionWalker walker(tables, counts, 1, scenario.n_parties - head);
  walker.set_base(head * tables.w1[0], head * tables.r[0],
                  head * tables.r2[0]);
  do {
    ++result.n_states;
    const long long value2 = walker.value_times_two();
    if (value2 < result.min_value) {
      result.min_value = value2;
      result.minimizers.clear();
      result.minimizers.push_back(StrategyCounts{counts});
    } else if (value2 == result.min_value) {
      result.minimizers.push_back(StrategyCounts{counts});
    }
  } while (walker.advance());
  return result;
}

void merge_block(BruteForceResult& into, BlockResult&& block) {
  into.n_states += block.n_states;
  const long long value = block.min_value / 2;
  if (value < into.min_value || into.minimizers.empty()) {
    if (value < into.min_value) into.minimizers.clear();
    into.min_value = value;
    for (auto& m : block.minimizers) into.minimizers.push_back(std::move(m));
  } else if (value == into.min_value) {
    for (auto& m : block.minimizers) into.minimizers.push_back(std::move(m));
  }
}

void check_enumerable(const BellScenario& scenario,
                      const BruteForceOptions& options) {
  validate(scenario);
  if (scenario.n_settings > 20)
    fail(errc::domain,
         "brute force supports at most 20 settings, got " +
             std::to_string(scenario.n_settings));
  const std::uint64_t states = multiset_count(scenario);
  if (states > options.state_cap)
    fail(errc::too_large,
         "enumeration needs " + std::to_string(states) +
             " states, cap is " + std::to_string(options.state_cap));
}

}  // namespace

void validate(const BellScenario& scenario) {
  if (scenario.n_parties < 1)
    fail(errc::domain,
         "n_parties must be >= 1, got " + std::to_string(scenario.n_parties));
  if (scenario.n_settings < 2 || scenario.n_settings > 30)
    fail(errc::domain, "n_settings must be in [2, 30], got " +
                           std::to_string(scenario.n_settings));
}

std::vector<int> strategy_outcomes(int n_settings, std::uint32_t pattern) {
  if (n_settings < 1 || n_settings > 30)
    fail(errc::domain, "n_settings out of range");
  if (pattern >> n_settings)
    fail(errc::domain, "pattern has bits beyond the setting count");
  std::vector<int> outcomes(static_cast<std::size_t>(n_settings));
  for (int k = 0; k < n_settings; ++k)
    outcomes[static_cast<std::size_t>(k)] = (pattern >> k) & 1u ? -1 : 1;
  return outcomes;
}

long long classical_bound(const BellScenario& scenario) {
  validate(scenario);
  const long long m = scenario.n_settings;
  return m * m * scenario.n_parties / 2;
}

long long alpha_coefficient(int n_settings, int k) {
  return static_cast<long long>(n_settings) - 2 * k - 1;
}

CorrelatorSet correlators_of_strategy(const BellScenario& scenario,
                                      const StrategyCounts& counts) {
  validate(scenario);
  validate_counts(scenario, counts);
  const int m = scenario.n_settings;
  const std::uint32_t n_patterns = 1u << m;

  std::vector<long long> one(static_cast<std::size_t>(m), 0);
  std::vector<long long> pair(static_cast<std::size_t>(m) * m, 0);
  for (std::uint32_t s = 0; s < n_patterns; ++s) {
    const long long c = counts.counts[s];
    if (c == 0) continue;
    for (int k = 0; k < m; ++k) {
      const long long xk = (s >> k) & 1u ? -1 : 1;
      one[static_cast<std::size_t>(k)] += c * xk;
      for (int l = 0; l < m; ++l) {
        const long long xl = (s >> l) & 1u ? -1 : 1;
        pair[static_cast<std::size_t>(k) * m + l] += c * xk * xl;
      }
    }
  }

  CorrelatorSet corr;
  corr.one_body.resize(static_cast<std::size_t>(m));
  corr.two_body.resize(static_cast<std::size_t>(m) * m);
  for (int k = 0; k < m; ++k) {
    corr.one_body[static_cast<std::size_t>(k)] =
        static_cast<double>(one[static_cast<std::size_t>(k)]);
    for (int l = 0; l < m; ++l) {
      const long long skl = one[static_cast<std::size_t>(k)] *
                                one[static_cast<std::size_t>(l)] -
                            pair[static_cast<std::size_t>(k) * m + l];
      corr.two_body[static_cast<std::size_t>(k) * m + l] =
          static_cast<double>(skl);
    }
  }
  return corr;
}

double inequality_value(const BellScenario& scenario,
                        const CorrelatorSet& corr) {
  validate(scenario);
  const int m = scenario.n_settings;
  if (corr.one_body.size() != static_cast<std::size_t>(m) ||
      corr.two_body.size() != static_cast<std::size_t>(m) * m)
    fail(errc::domain, "correlator dimensions do not match the scenario");
  double value = 0.0;
  for (int k = 0; k < m; ++k)
    value += static_cast<double>(alpha_coefficient(m, k)) *
             corr.one_body[static_cast<std::size_t>(k)];
  double pair_sum = 0.0;
  for (double skl : corr.two_body) pair_sum += skl;
  return value + 0.5 * pair_sum;
}

long long inequality_value_exact(const BellScenario& scenario,
                                 const StrategyCounts& counts) {
  validate(scenario);
  validate_counts(scenario, counts);
  const PatternTables tables = make_tables(scenario.n_settings);
  long long sum_w1 = 0, sum_r = 0, sum_r2 = 0;
  for (std::size_t s = 0; s < counts.counts.size(); ++s) {
    const long long c = counts.counts[s];
    sum_w1 += c * tables.w1[s];
    sum_r += c * tables.r[s];
    sum_r2 += c * tables.r2[s];
  }
  return (2 * sum_w1 + sum_r * sum_r - sum_r2) / 2;
}

Decomposition decomposition_terms(const BellScenario& scenario,
                                  const StrategyCounts& counts) {
  validate(scenario);
  validate_counts(scenario, counts);
  const int m = scenario.n_settings;

  std::vector<long long> one(static_cast<std::size_t>(m), 0);
  Decomposition d;
  for (std::size_t s = 0; s < counts.counts.size(); ++s) {
    const long long c = counts.counts[s];
    if (c == 0) continue;
    long long r = 0;
    for (int k = 0; k < m; ++k) {
      const long long xk = (s >> k) & 1u ? -1 : 1;
      one[static_cast<std::size_t>(k)] += c * xk;
      r += xk;
    }
    d.c += c * r * r;
  }
  for (int k = 0; k < m / 2; ++k)
    d.a += alpha_coefficient(m, k) *
           (one[static_cast<std::size_t>(k)] -
            one[static_cast<std::size_t>(m - k - 1)]);
  for (int k = 0; k < m; ++k) d.b += one[static_cast<std::size_t>(k)];
  return d;
}

std::uint64_t multiset_count(const BellScenario& scenario) {
  validate(scenario);
  const std::uint64_t k = (std::uint64_t{1} << scenario.n_settings) - 1;
  // C(N + k, k) with saturation.
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (static_cast<std::uint64_t>(scenario.n_parties) + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max())
      return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(result);
}

BruteForceResult brute_force_minimum_serial(const BellScenario& scenario,
                                            const BruteForceOptions& options) {
  check_enumerable(scenario, options);
  const PatternTables tables = make_tables(scenario.n_settings);

  BruteForceResult result;
  result.min_value = std::numeric_limits<long long>::max();
  for (long long head = scenario.n_parties; head >= 0; --head)
    merge_block(result, enumerate_block(scenario, tables, head));
  return result;
}

BruteForceResult brute_force_minimum(const BellScenario& scenario,
                                     const BruteForceOptions& options) {
  check_enumerable(scenario, options);
  const PatternTables tables = make_tables(scenario.n_settings);
  const long long n = scenario.n_parties;

  std::vector<BlockResult> blocks(static_cast<std::size_t>(n) + 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) \
    num_threads(resolve_threads(options.threads))
#endif
  for (long long head = 0; head <= n; ++head)
    blocks[static_cast<std::size_t>(head)] =
        enumerate_block(scenario, tables, head);

  // Deterministic merge in enumeration order (head descending), so the
  // minimizer list matches the serial reference exactly.
  BruteForceResult result;
  result.min_value = std::numeric_limits<long long>::max();
  for (long long head = n; head >= 0; --head)
    merge_block(result, std::move(blocks[static_cast<std::size_t>(head)]));
  return result;
}

}  // namespace bellstat
