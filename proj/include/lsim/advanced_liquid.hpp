#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "lsim/repairer.hpp"
#include "lsim/rng.hpp"

namespace lsim {

// ---- closed forms for the grouped layout ----

// r*(N + (r+1)/2): fragments per node; clen must be a multiple in byte mode.
std::uint64_t advanced_fragments_per_node(std::uint64_t nodes, std::uint32_t r);
// (r + 1 + 2b)/(2N + r + 1); b = 1 gives the periodic (r+3)/(2N+r+1).
double advanced_beta(std::uint64_t nodes, std::uint32_t r, std::uint32_t b = 1);
// round(2*beta*N/(1-beta)), at least 1.
std::uint32_t advanced_r_for_beta(std::uint64_t nodes, double beta);
// Per-step read bound N(N+2r)/(r(N+(r+1)/2)) and exact write total, in clen units.
double advanced_read_bound(std::uint64_t nodes, std::uint32_t r);
double advanced_write_per_step(std::uint64_t nodes, std::uint32_t r);
// Large-N approximations (1+2b)/(2b) and 2-b, in clen units.
double advanced_read_approx(double beta);
double advanced_write_approx(double beta);
// Peak-rate coefficients of lambda*N*clen: the theorem statement uses
// 1 + 1/(2(beta-eps')), the proof's R uses 2 + 1/(2(beta-eps')).
double advanced_theorem_rate(double beta, double eps_prime);
double advanced_proof_rate(double beta, double eps_prime);
// Upper bound on the time for m - b repair steps.
double advanced_steps_time_bound(std::uint64_t m, std::uint32_t b, double beta, double eps_prime, double lambda,
                                 std::uint64_t nodes);

struct AdvancedParams {
  Variant variant = Variant::periodic;
  std::uint64_t nodes = 0;
  std::uint64_t clen = 0;
  std::uint32_t r = 0;
  std::uint32_t b = 1;      // counter cap; k = N - b
  std::uint32_t k = 0;
  std::uint32_t n = 0;      // N + r
  std::uint64_t flen = 0;
  double beta = 0.0;        // layout overhead
  double eps_prime = 0.0;
  double read_rate = 0.0;   // Poisson: bits/time, constant while a step runs
  double t_gen = 0.0;       // durations at read_rate: one Generate helpers,
  double t_move = 0.0;      // one Move helpers,
  double t_update = 0.0;    // one Update helpers
  bool repair_enabled = true;

  std::uint32_t objects() const { return static_cast<std::uint32_t>(nodes * r); }
  CodecParams codec() const { return CodecParams{n, k, flen}; }
};

// Poisson timing: the repairer reads at one constant rate, chosen so that a
// step with exactly one generation lasts D = (1-eps')/(lambda N). Each
// sub-algorithm lasts its read volume over that rate. For large N the rate
// stays below (1-beta)(2 + 1/(2(beta-eps'))) lambda N clen. `step_duration`
// replaces D.
AdvancedParams advanced_params(Variant variant, std::uint64_t nodes, std::uint64_t clen, std::uint32_t r, double eps,
                               double lambda, std::optional<double> step_duration, Backend backend);

enum class SubAlgorithm { generate, move, update };

struct SubAlgorithmCount {
  SubAlgorithm kind = SubAlgorithm::generate;
  NodeId node = 0;  // the group node (generate/update) or the source (move)
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
};

class AdvancedRepairer final : public Repairer {
 public:
  AdvancedRepairer(const AdvancedParams& params, Backend backend, Rng content_rng);

  Cluster& cluster() override { return cluster_; }
  double next_event_time() const override;
  void on_timer(double now) override;
  void on_failure(const FailureEvent& event) override;
  std::int64_t counter() const override { return counter_; }
  std::int64_t counter_cap() const override { return params_.b; }
  void check_invariants(bool full) const override;

  const AdvancedParams& params() const { return params_; }
  Efi primary_efi(NodeId node) const { return primary_.at(node); }
  const std::vector<Efi>& helper_efis() const { return helpers_; }
  // Object at position j of group g.
  ObjectId object_at(NodeId group, std::uint32_t position) const;
  bool in_scope(NodeId node) const { return in_np_.at(node) != 0; }
  std::uint64_t scope_size() const { return np_size_; }
  bool step_in_progress() const { return step_.has_value(); }
  std::uint64_t steps_completed() const { return completed_; }

  void set_record_sub_algorithms(bool on) { record_subs_ = on; }
  const std::vector<SubAlgorithmCount>& sub_algorithms() const { return subs_; }

  // Whether node g holds h_0 for every object of its group.
  bool has_helpers(NodeId group) const;

 private:
  struct Pending {
    NodeId node;
    Fragment fragment;
  };
  enum class Phase { moving, updating };
  enum class Sub { generate, move, update };
  struct Step {
    NodeId target = 0;
    double start = 0.0;
    Phase phase = Phase::moving;
    NodeId ell = 0;
    Sub sub = Sub::generate;
    double sub_end = 0.0;
    std::uint64_t target_epoch = 0;
    std::uint64_t ell_epoch = 0;
    bool abandoned = false;
    std::vector<Pending> writes;  // applied when the sub-operation ends
    std::vector<std::pair<NodeId, Fragment>> deletes;  // moved copies, dropped at the rotation
    std::uint64_t read0 = 0;
    std::uint64_t written0 = 0;
  };

  // Reads k fragments of `object`, preferring primaries, skipping `skip`.
  std::vector<Fragment> gather(ObjectId object, NodeId skip);
  std::vector<Pending> generate_helpers(NodeId group);
  std::vector<Pending> move_helpers(NodeId from, NodeId to, Efi efi);
  std::vector<Pending> update_helpers(NodeId group);
  void rotate_efis(NodeId target);
  // Spreads the metering of the next `reads` fragment reads evenly over
  // [start, start + duration).
  void pace(double start, double duration, std::uint64_t reads);
  double read_time();
  void record(SubAlgorithm kind, NodeId node, std::uint64_t reads, std::uint64_t writes);
  void apply(const std::vector<Pending>& writes, double now);

  void periodic_step(NodeId target, double now);
  void start_step(double now);
  void begin_ell(double now);
  void begin_update(double now);
  void finish_sub(double now);
  void complete_step(double now);
  void leave_scope(NodeId node);

  AdvancedParams params_;
  Cluster cluster_;
  std::vector<Efi> primary_;
  std::vector<Efi> helpers_;
  std::vector<std::uint32_t> rotation_;  // group g position j -> slot (rotation_[g] + j) % r
  std::vector<char> in_np_;
  std::uint64_t np_size_ = 0;
  std::vector<std::uint64_t> epoch_;  // failures per node
  std::deque<NodeId> queue_;          // failed nodes awaiting a step, oldest first
  std::vector<char> queued_;
  std::int64_t counter_ = 0;
  std::optional<Step> step_;
  std::uint64_t completed_ = 0;
  bool record_subs_ = false;
  std::vector<SubAlgorithmCount> subs_;
  double read_clock_ = 0.0;
  double read_gap_ = 0.0;
};

}  // namespace lsim
