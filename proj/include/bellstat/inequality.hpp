#pragma once

#include <cstdint>
#include <vector>

#include "bellstat/errors.hpp"

namespace bellstat {

// N parties each choose one of m two-outcome measurements.  The symmetric
// inequality studied here is
//
//   I = sum_k alpha_k S_k + (1/2) sum_{k,l} S_kl  >=  -beta_c,
//
// with alpha_k = m - 2k - 1, the unrestricted double sum including the
// diagonal, and beta_c = floor(m^2 N / 2).
struct BellScenario {
  long long n_parties = 1;  // N >= 1
  int n_settings = 2;       // m >= 2
};

// Throws errc::domain when the scenario is out of range.
void validate(const BellScenario& scenario);

// Deterministic strategies are encoded as bit patterns over the m settings:
// bit k set means outcome x_k = -1, clear means x_k = +1 (pattern 0 is the
// all-(+1) strategy).
std::vector<int> strategy_outcomes(int n_settings, std::uint32_t pattern);

// Multiplicity of each deterministic strategy among the N parties, indexed
// by pattern; entries must be non-negative and sum to N.
struct StrategyCounts {
  std::vector<long long> counts;  // length 2^m
};

// Symmetrized correlators.  two_body is row-major m*m with the i != j pair
// sum S_kl = S_k S_l - sum_i x_k^i x_l^i; the diagonal S_kk is included.
struct CorrelatorSet {
  std::vector<double> one_body;
  std::vector<double> two_body;
};

// Terms of the exact identity I = A + B^2/2 - C/2 with
//   A = sum_{k < floor(m/2)} alpha_k (S_k - S_{m-k-1}),
//   B = sum_k S_k,
//   C = sum_i (sum_k x_k^i)^2.
struct Decomposition {
  long long a = 0;
  long long b = 0;
  long long c = 0;
};

long long classical_bound(const BellScenario& scenario);
long long alpha_coefficient(int n_settings, int k);  // m - 2k - 1

CorrelatorSet correlators_of_strategy(const BellScenario& scenario,
                                      const StrategyCounts& counts);
double inequality_value(const BellScenario& scenario,
                        const CorrelatorSet& corr);
// Exact integer evaluation straight from the counts (no correlator round
// trip); used by the enumeration kernels.
long long inequality_value_exact(const BellScenario& scenario,
                                 const StrategyCounts& counts);
Decomposition decomposition_terms(const BellScenario& scenario,
                                  const StrategyCounts& counts);

struct BruteForceOptions {
  std::uint64_t state_cap = 100'000'000;  // abort above this many multisets
  int threads = 0;                        // 0 = library default
};

struct BruteForceResult {
  long long min_value = 0;
  std::vector<StrategyCounts> minimizers;  // in enumeration order
  std::uint64_t n_states = 0;              // multisets visited
};

// Exact minimum of I over all multisets of N deterministic strategies
// (stars and bars over the 2^m strategy classes).  The OpenMP kernel
// partitions on the count of the first strategy class and merges blocks in
// enumeration order, so its output is bit-identical to the serial reference.
BruteForceResult brute_force_minimum(const BellScenario& scenario,
                                     const BruteForceOptions& options = {});
BruteForceResult brute_force_minimum_serial(
    const BellScenario& scenario, const BruteForceOptions& options = {});

// C(N + 2^m - 1, 2^m - 1), saturating at UINT64_MAX.
std::uint64_t multiset_count(const BellScenario& scenario);

}  // namespace bellstat
