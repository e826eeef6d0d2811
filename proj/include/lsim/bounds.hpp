#pragma once

// Closed-form capacity and read-rate bounds for distributed storage under
// random node failures. Everything here is a pure function of its inputs.

#include <cstdint>
#include <optional>
#include <vector>

#include "lsim/wide.hpp"

namespace lsim {

struct SystemParams {
  std::uint64_t nodes = 0;  // N
  std::uint64_t clen = 0;   // node capacity, bits
  u128 xlen = 0;            // source data size, bits
  std::uint64_t vlen = 0;   // repairer global memory, bits
  double lambda = 0.0;      // per-node failure rate, 1/time

  u128 total_capacity() const { return static_cast<u128>(nodes) * clen; }
  // Storage overhead 1 - xlen/(N*clen).
  double beta() const;
  // Capacity erasure rate lambda*N*clen.
  double erasure_rate() const;
  void validate() const;

  // xlen = N*clen - round(beta*N*clen), computed exactly when beta has a
  // short decimal expansion (0.1, 0.05, ...).
  static SystemParams from_beta(std::uint64_t nodes, std::uint64_t clen, double beta,
                                std::uint64_t vlen, double lambda);
};

struct PhaseParams {
  std::uint64_t nodes = 0;
  u128 olen = 0;            // N*clen - xlen + vlen + 1
  std::uint64_t F = 0;      // ceil(olen/clen)
  double beta_prime = 0.0;  // F/N
  std::uint64_t M = 0;      // 2F failures per phase
  double F_prime = 0.0;     // lni(2*beta')*N
};

struct EpsilonSet {
  double eps_c = 0.1;  // core lemma slack
  double eps_d = 0.1;  // distinct failures slack
  double eps = 0.1;    // Poisson concentration slack
  void validate() const;
  bool operator==(const EpsilonSet&) const = default;
};

// A probability bound. Values above 1 are kept as-is and flagged vacuous.
struct ProbabilityBound {
  double value = 0.0;
  bool vacuous = false;
};
ProbabilityBound make_probability(double value);

struct CoreBounds {
  std::vector<double> gamma;  // gamma[i-1] = Gamma_i, i = 1..2F-1
  ProbabilityBound delta_core;
  double rate_per_failure = 0.0;  // (1-eps_c)(1-beta')clen/(2beta')
};

struct BoundReport {
  PhaseParams phase;
  EpsilonSet eps;
  std::vector<double> gamma;
  ProbabilityBound delta_core;
  ProbabilityBound delta_distinct;
  ProbabilityBound delta_uniform;
  ProbabilityBound delta_poisson;
  double core_rate_per_failure = 0.0;     // bits per failure
  double uniform_rate_per_failure = 0.0;  // bits per failure
  double poisson_rate = 0.0;              // bits per time
  double delta_window = 0.0;              // time; +inf when lambda == 0
  double asymptotic_ratio = 0.0;          // (1-beta')/lni(2beta'), lower bound on R/E
  double erasure_rate = 0.0;              // E = lambda*N*clen
  double read_rate_for_capacity = 0.0;    // the R plugged into the capacity formula
  double capacity = 0.0;                  // (1 - E/(2R))*N*clen, bits
};

// ln(1/(1-zeta)) for 0 <= zeta < 1.
double lni(double zeta);
// zeta - ln(1+zeta) for zeta > -1.
double lnd(double zeta);

PhaseParams derive_phase_params(const SystemParams& sys);

CoreBounds core_bounds(const PhaseParams& phase, std::uint64_t clen, const EpsilonSet& eps);

// 2^(-clen), evaluated in log space; returns 0 below 1e-300.
double two_pow_neg(std::uint64_t clen);

// Full lower-bound report. `read_rate` is the R used in the capacity formula;
// when absent the Poisson lower-bound rate is used.
BoundReport poisson_bounds(const SystemParams& sys, const PhaseParams& phase, const EpsilonSet& eps,
                           std::optional<double> read_rate = std::nullopt);

// Expected failures until i distinct failures beyond the first: sum_{j=1..i} N/(N-j).
double expected_distinct_failures(std::uint64_t nodes, std::uint64_t i);

// n*exp(-alpha^2/(2 n c^2)).
double supermartingale_tail(double n, double c, double alpha);

// (1 - E/(2R)) * N * clen.
double storage_capacity(double erasure_rate, double read_rate, std::uint64_t nodes, std::uint64_t clen);

}  // namespace lsim
