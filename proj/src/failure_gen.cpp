#include "lsim/failure_gen.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "lsim/error.hpp"

namespace lsim {

FailureGenerator::FailureGenerator(std::uint64_t nodes, TimingModel timing, IdentifierModel ids, Rng rng, double t0)
    : nodes_(nodes), timing_(timing), ids_(ids), rng_(rng), t0_(t0), last_time_(t0) {
  if (nodes_ == 0) throw Error(Errc::config, "failure generator needs N >= 1");
  if (const auto* p = std::get_if<PeriodicTiming>(&timing_); p && !(p->period > 0.0)) {
    throw Error(Errc::config, "period must be positive");
  }
  if (const auto* p = std::get_if<PoissonTiming>(&timing_); p && !(p->lambda > 0.0 && p->nodes >= 1)) {
    throw Error(Errc::config, "Poisson timing needs lambda > 0 and N >= 1");
  }
  if (const auto* d = std::get_if<DistinctPhaseIds>(&ids_)) {
    if (d->phase_length == 0 || d->phase_length > nodes_) throw Error(Errc::config, "distinct phase length must be in [1, N]");
    phase_.resize(nodes_);
    std::iota(phase_.begin(), phase_.end(), NodeId{0});
  }
}

NodeId FailureGenerator::next_id() {
  if (std::holds_alternative<UniformIds>(ids_)) return static_cast<NodeId>(rng_.below(nodes_));
  // phase_ holds a permutation whose first `used` entries are this phase's ids.
  const std::uint64_t m = std::get<DistinctPhaseIds>(ids_).phase_length;
  const std::uint64_t used = emitted_ % m;
  const std::uint64_t pick = used + rng_.below(nodes_ - used);
  std::swap(phase_[used], phase_[pick]);
  return phase_[used];
}

FailureEvent FailureGenerator::next() {
  double t = 0.0;
  if (const auto* p = std::get_if<PeriodicTiming>(&timing_)) {
    t = t0_ + static_cast<double>(emitted_ + 1) * p->period;
  } else {
    const auto& q = std::get<PoissonTiming>(timing_);
    t = last_time_ + rng_.exponential(q.lambda * static_cast<double>(q.nodes));
    if (t <= last_time_) t = std::nextafter(last_time_, std::numeric_limits<double>::infinity());
  }
  const NodeId id = next_id();
  last_time_ = t;
  ++emitted_;
  return FailureEvent{t, id};
}

FailureSequence gen_periodic(double period, std::uint64_t count, std::uint64_t nodes, const IdentifierModel& ids,
                             Rng rng) {
  FailureGenerator gen(nodes, PeriodicTiming{period}, ids, rng);
  FailureSequence seq;
  seq.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) seq.push_back(gen.next());
  return seq;
}

FailureSequence gen_poisson(double lambda, std::uint64_t nodes, std::uint64_t count, const IdentifierModel& ids,
                            Rng rng) {
  FailureGenerator gen(nodes, PoissonTiming{lambda, nodes}, ids, rng);
  FailureSequence seq;
  seq.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) seq.push_back(gen.next());
  return seq;
}

std::vector<NodeId> gen_distinct_ids(std::uint64_t nodes, std::uint64_t count, const std::vector<NodeId>& prefix,
                                     Rng& rng) {
  std::vector<char> taken(nodes, 0);
  for (NodeId id : prefix) {
    if (id >= nodes) throw Error(Errc::domain, "prefix id out of range");
    if (taken[id]) throw Error(Errc::domain, "prefix ids are not distinct");
    taken[id] = 1;
  }
  if (prefix.size() + count > nodes) throw Error(Errc::domain, "not enough identifiers left for a distinct draw");
  std::vector<NodeId> pool;
  pool.reserve(nodes - prefix.size());
  for (std::uint64_t id = 0; id < nodes; ++id) {
    if (!taken[id]) pool.push_back(static_cast<NodeId>(id));
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t pick = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[pick]);
  }
  pool.resize(count);
  return pool;
}

UseqSample gen_useq_from_gseq(std::uint64_t nodes, std::uint64_t distinct, Rng& rng) {
  if (distinct == 0 || distinct > nodes) throw Error(Errc::domain, "gen_useq_from_gseq requires 1 <= M <= N");
  UseqSample out;
  std::vector<NodeId> pool(nodes);
  std::iota(pool.begin(), pool.end(), NodeId{0});
  auto fresh = [&](std::uint64_t used) {
    const std::uint64_t pick = used + rng.below(nodes - used);
    std::swap(pool[used], pool[pick]);
    return pool[used];
  };
  out.ids.push_back(fresh(0));
  out.gs_table.push_back(0);
  const double N = static_cast<double>(nodes);
  for (std::uint64_t i = 1; i < distinct; ++i) {
    const std::uint64_t gap = rng.geometric((N - static_cast<double>(i)) / N);
    for (std::uint64_t j = 1; j < gap; ++j) out.ids.push_back(pool[rng.below(i)]);
    out.ids.push_back(fresh(i));
    out.gs_table.push_back(out.gs_table.back() + gap);
  }
  return out;
}

void write_failure_sequence(std::ostream& out, const FailureSequence& seq) {
  out << "time,nodeId\n";
  char buf[64];
  for (const auto& ev : seq) {
    auto res = std::to_chars(buf, buf + sizeof(buf), ev.time);
    out.write(buf, res.ptr - buf);
    out << ',' << ev.node << '\n';
  }
}

FailureSequence read_failure_sequence(std::istream& in, std::uint64_t nodes) {
  FailureSequence seq;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line == "time,nodeId") continue;
    const auto comma = line.find(',');
    auto fail = [&](const std::string& why) {
      return Error(Errc::parse, "failure sequence line " + std::to_string(lineno) + ": " + why);
    };
    if (comma == std::string::npos) throw fail("expected 'time,nodeId'");
    double t = 0.0;
    std::uint64_t id = 0;
    const char* b = line.data();
    auto rt = std::from_chars(b, b + comma, t);
    if (rt.ec != std::errc() || rt.ptr != b + comma) throw fail("bad time");
    auto ri = std::from_chars(b + comma + 1, b + line.size(), id);
    if (ri.ec != std::errc() || ri.ptr != b + line.size()) throw fail("bad node id");
    if (id >= nodes) throw fail("node id out of range");
    if (!seq.empty() && t < seq.back().time) throw fail("times must be non-decreasing");
    seq.push_back(FailureEvent{t, static_cast<NodeId>(id)});
  }
  return seq;
}

}  // namespace lsim
