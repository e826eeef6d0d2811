#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lsim/advanced_liquid.hpp"
#include "lsim/bounds.hpp"
#include "lsim/liquid.hpp"
#include "lsim/scenario.hpp"

namespace lsim {

// A scenario with every derived quantity fixed: layout, backend, defaults.
struct ResolvedScenario {
  Scenario scenario;
  SystemParams sys;  // xlen is the exact stored source size of the layout
  Backend backend = Backend::symbolic;
  std::optional<LiquidParams> liquid;
  std::optional<AdvancedParams> advanced;
  double peak_window = 1.0;
  std::uint64_t check_every = 1;
  std::optional<std::uint64_t> phase_length;  // distinct-id phase length
  FailureSequence replay;                     // loaded when scenario.replay is set
};

ResolvedScenario resolve(const Scenario& scenario);

struct TrialResult {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  bool recoverable = true;
  std::optional<double> first_loss_time;
  std::uint64_t bits_read = 0;
  std::uint64_t bits_written = 0;
  double avg_read_rate = 0.0;
  double peak_read_rate = 0.0;
  std::int64_t counter_min = 0;
  std::uint64_t failures = 0;  // failures processed
  double end_time = 0.0;
  std::vector<TraceLine> trace;  // only when scenario.trace

  bool operator==(const TrialResult& o) const;
};

// Observation points for tests and the acceptance harness.
struct TrialHooks {
  std::function<void(Repairer&)> on_start;
  // Called after every processed event, once invariants were checked.
  std::function<void(Repairer&, double time, bool is_failure)> after_event;
  bool record_steps = false;
  std::function<void(const std::vector<StepStat>&)> on_steps;
};

std::unique_ptr<Repairer> make_repairer(const ResolvedScenario& rs, std::uint64_t trial);

// Failures use Philox stream 2*trial, stored content stream 2*trial+1. At
// equal times repairer events run before the failure. A loss ends the
// trial. Throws Error(invariant_violation) on any repairer inconsistency,
// including data loss while the counter never went negative.
TrialResult run_trial(const ResolvedScenario& rs, std::uint64_t trial, const TrialHooks& hooks = {});

struct Aggregate {
  std::uint64_t trials = 0;
  std::uint64_t unrecoverable = 0;
  std::uint64_t detector_disagreements = 0;  // recoverable != (counter_min >= 0)
  double mean_avg_read_rate = 0.0;
  double mean_peak_read_rate = 0.0;
  double max_peak_read_rate = 0.0;
  double mean_read_per_failure = 0.0;   // bits
  double mean_write_per_failure = 0.0;  // bits
};

struct ExperimentReport {
  ResolvedScenario resolved;
  std::optional<BoundReport> bounds;
  std::string bounds_note;  // why bounds are absent
  std::vector<TrialResult> trials;
  Aggregate aggregate;
  // Named reference values and measured/reference ratios.
  std::vector<std::pair<std::string, double>> references;
  std::vector<std::pair<std::string, double>> ratios;
};

Aggregate aggregate(const std::vector<TrialResult>& trials);

// Trials 0..trials-1 on up to `jobs` threads; results are ordered by trial
// index and identical for any job count.
ExperimentReport run_experiment(const Scenario& scenario, unsigned jobs = 1);

struct GsEstimate {
  double mean = 0.0;
  double ci99 = 0.0;  // half-width of the 99% normal interval
  double stddev = 0.0;
  std::uint64_t trials = 0;
};

// Failures until i distinct failures beyond the first, N nodes, uniform ids.
GsEstimate monte_carlo_gs(std::uint64_t nodes, std::uint64_t i, std::uint64_t trials, std::uint64_t seed);

}  // namespace lsim
