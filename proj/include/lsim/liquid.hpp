#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "lsim/repairer.hpp"
#include "lsim/rng.hpp"

namespace lsim {

// Staggered-redundancy layout: object at position j holds EFIs
// 0..k+b+j-1, EFI e always at node e. The periodic variant is b = 1.
struct LiquidParams {
  Variant variant = Variant::periodic;
  std::uint64_t nodes = 0;
  std::uint64_t clen = 0;
  std::uint32_t r = 0;        // beta*N
  std::uint32_t k = 0;        // N - r
  std::uint32_t objects = 0;  // r (periodic) or r' (Poisson)
  std::uint32_t b = 1;        // counter cap
  double eps_prime = 0.0;
  std::uint64_t flen = 0;     // floor(clen/objects)
  std::int64_t slack = 0;     // r + 1 - (objects + b); zero when rounding is exact
  double step_duration = 0.0; // +inf disables repair

  CodecParams codec() const { return CodecParams{static_cast<std::uint32_t>(nodes), k, flen}; }
};

// `overhead_nodes` is r = beta*N. Periodic steps default to one period;
// Poisson steps to (1 - eps/2)/(lambda*N).
LiquidParams liquid_params(Variant variant, std::uint64_t nodes, std::uint64_t clen, std::uint32_t overhead_nodes,
                           double eps, double lambda, double period, std::optional<double> step_duration,
                           Backend backend);

class LiquidRepairer final : public Repairer {
 public:
  // Runs the storer: encodes every object and preloads its fragments.
  LiquidRepairer(const LiquidParams& params, Backend backend, Rng content_rng);

  Cluster& cluster() override { return cluster_; }
  double next_event_time() const override;
  void on_timer(double now) override;
  void on_failure(const FailureEvent& event) override;
  std::int64_t counter() const override { return counter_; }
  std::int64_t counter_cap() const override { return params_.b; }
  void check_invariants(bool full) const override;

  const LiquidParams& params() const { return params_; }
  ObjectId object_at(std::uint32_t position) const { return order_.at(position); }
  bool step_in_progress() const { return step_.has_value(); }
  std::uint64_t steps_completed() const { return completed_; }

 private:
  struct Step {
    ObjectId object = 0;
    double start = 0.0;
    double end = 0.0;
    std::uint32_t next_slot = 0;
    std::vector<Fragment> captured;
    std::vector<char> taken;  // per EFI
    std::uint64_t read0 = 0;
    std::uint64_t written0 = 0;
  };

  double slot_time(std::uint32_t slot) const;
  void start_step(double now);
  void read_slot(double now);
  void complete_step(double now);

  LiquidParams params_;
  Cluster cluster_;
  std::deque<ObjectId> order_;
  std::int64_t counter_ = 0;
  std::optional<Step> step_;
  std::uint64_t completed_ = 0;
};

}  // namespace lsim
