#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "lsim/rng.hpp"

namespace lsim {

using NodeId = std::uint32_t;

struct FailureEvent {
  double time = 0.0;
  NodeId node = 0;
  bool operator==(const FailureEvent&) const = default;
};

using FailureSequence = std::vector<FailureEvent>;

struct PeriodicTiming {
  double period = 1.0;
};
struct PoissonTiming {
  double lambda = 1.0;  // per-node rate
  std::uint64_t nodes = 1;
};
using TimingModel = std::variant<PeriodicTiming, PoissonTiming>;

// Each identifier drawn independently and uniformly from {0..N-1}.
struct UniformIds {};
// Phases of M identifiers, distinct within a phase.
struct DistinctPhaseIds {
  std::uint64_t phase_length = 0;
};
using IdentifierModel = std::variant<UniformIds, DistinctPhaseIds>;

// Stateful generator owned by one trial. Emits events one at a time so a
// trial never materialises the whole sequence.
class FailureGenerator {
 public:
  FailureGenerator(std::uint64_t nodes, TimingModel timing, IdentifierModel ids, Rng rng, double t0 = 0.0);

  FailureEvent next();
  std::uint64_t emitted() const { return emitted_; }

 private:
  NodeId next_id();

  std::uint64_t nodes_;
  TimingModel timing_;
  IdentifierModel ids_;
  Rng rng_;
  double t0_;
  double last_time_;
  std::uint64_t emitted_ = 0;
  std::vector<NodeId> phase_;  // distinct ids already used in the current phase
};

FailureSequence gen_periodic(double period, std::uint64_t count, std::uint64_t nodes, const IdentifierModel& ids,
                             Rng rng);
FailureSequence gen_poisson(double lambda, std::uint64_t nodes, std::uint64_t count, const IdentifierModel& ids,
                            Rng rng);

// M ids drawn uniformly without replacement from {0..N-1} minus `prefix`.
std::vector<NodeId> gen_distinct_ids(std::uint64_t nodes, std::uint64_t count, const std::vector<NodeId>& prefix,
                                     Rng& rng);

struct UseqSample {
  std::vector<NodeId> ids;               // y0, U1, U2, ..., U_{gs_{M-1}}
  std::vector<std::uint64_t> gs_table;  // gs_table[i] = gs_i, i = 0..M-1 (gs_0 = 0)
};

// Uniform identifier sequence assembled from independent geometric gaps G_i
// (success probability (N-i)/N) and a distinct identifier sequence; positions
// strictly between gs_{i-1} and gs_i repeat already-failed identifiers.
UseqSample gen_useq_from_gseq(std::uint64_t nodes, std::uint64_t distinct, Rng& rng);

// `time,nodeId` text, one event per line.
void write_failure_sequence(std::ostream& out, const FailureSequence& seq);
FailureSequence read_failure_sequence(std::istream& in, std::uint64_t nodes);

}  // namespace lsim
