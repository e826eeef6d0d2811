#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "lsim/cluster.hpp"
#include "lsim/failure_gen.hpp"

namespace lsim {

enum class Variant { periodic, poisson };

const char* variant_name(Variant v);

// One row of the optional per-event trace. Bit columns are cumulative.
struct TraceLine {
  double time = 0.0;
  std::string event;
  std::int64_t counter = 0;
  std::uint64_t bits_read = 0;
  std::uint64_t bits_written = 0;
};
using TraceSink = std::function<void(const TraceLine&)>;

struct StepStat {
  double start = 0.0;
  double end = 0.0;
  std::uint64_t bits_read = 0;
  std::uint64_t bits_written = 0;
};

// A repairer owns the cluster and reacts to failures and to its own timers.
// The trial loop interleaves both streams; at equal times timers go first.
class Repairer {
 public:
  virtual ~Repairer() = default;

  virtual Cluster& cluster() = 0;
  const Cluster& cluster() const { return const_cast<Repairer*>(this)->cluster(); }

  // Time of the next internal event, +inf when idle.
  virtual double next_event_time() const = 0;
  virtual void on_timer(double now) = 0;
  virtual void on_failure(const FailureEvent& event) = 0;

  virtual std::int64_t counter() const = 0;
  virtual std::int64_t counter_cap() const = 0;
  std::int64_t counter_min() const { return counter_min_; }

  // Throws Error(invariant_violation). `full` adds the expensive census checks.
  virtual void check_invariants(bool full) const = 0;

  // Test-only: wipe node 0 behind the repairer's back.
  void inject_fault() { cluster().fail_node(0, 0.0); }

  void set_trace(TraceSink sink) { trace_ = std::move(sink); }
  void set_record_steps(bool on) { record_steps_ = on; }
  const std::vector<StepStat>& steps() const { return steps_; }

 protected:
  void trace(double time, const std::string& event) {
    if (trace_) {
      const Cluster& c = cluster();
      trace_(TraceLine{time, event, counter(), c.total_bits_read(), c.total_bits_written()});
    }
  }
  void note_counter(std::int64_t value) {
    if (value < counter_min_) counter_min_ = value;
  }

  TraceSink trace_;
  bool record_steps_ = false;
  std::vector<StepStat> steps_;
  std::int64_t counter_min_ = 0;
};

}  // namespace lsim
