#include "lsim/advanced_liquid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lsim/error.hpp"

namespace lsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ClusterConfig cluster_config(const AdvancedParams& p, Backend backend) {
  ClusterConfig c;
  c.nodes = p.nodes;
  c.clen = p.clen;
  c.objects = p.objects();
  c.codec = p.codec();
  c.backend = backend;
  return c;
}

}  // namespace

std::uint64_t advanced_fragments_per_node(std::uint64_t nodes, std::uint32_t r) {
  return static_cast<std::uint64_t>(r) * nodes + static_cast<std::uint64_t>(r) * (r + 1) / 2;
}

double advanced_beta(std::uint64_t nodes, std::uint32_t r, std::uint32_t b) {
  return (r + 1.0 + 2.0 * b) / (2.0 * static_cast<double>(nodes) + r + 1.0);
}

std::uint32_t advanced_r_for_beta(std::uint64_t nodes, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(Errc::config, "beta must lie in (0, 1)");
  const double r = std::round(2.0 * beta * static_cast<double>(nodes) / (1.0 - beta));
  return r < 1.0 ? 1u : static_cast<std::uint32_t>(r);
}

double advanced_read_bound(std::uint64_t nodes, std::uint32_t r) {
  const double N = static_cast<double>(nodes);
  return N * (N + 2.0 * r) / (r * (N + (r + 1.0) / 2.0));
}

double advanced_write_per_step(std::uint64_t nodes, std::uint32_t r) {
  const double N = static_cast<double>(nodes);
  return (2.0 * N + (r + 1.0) / 2.0) / (N + (r + 1.0) / 2.0);
}

double advanced_read_approx(double beta) { return (1.0 + 2.0 * beta) / (2.0 * beta); }

double advanced_write_approx(double beta) { return 2.0 - beta; }

double advanced_theorem_rate(double beta, double eps_prime) {
  return (1.0 - beta) / (1.0 - eps_prime) * (1.0 + 1.0 / (2.0 * (beta - eps_prime)));
}

double advanced_proof_rate(double beta, double eps_prime) {
  return (1.0 - beta) / (1.0 - eps_prime) * (2.0 + 1.0 / (2.0 * (beta - eps_prime)));
}

double advanced_steps_time_bound(std::uint64_t m, std::uint32_t b, double beta, double eps_prime, double lambda,
                                 std::uint64_t nodes) {
  return (1.0 - eps_prime) / (lambda * static_cast<double>(nodes)) *
         (static_cast<double>(m) - b / (2.0 * beta + 1.0));
}

AdvancedParams advanced_params(Variant variant, std::uint64_t nodes, std::uint64_t clen, std::uint32_t r, double eps,
                               double lambda, std::optional<double> step_duration, Backend backend) {
  if (nodes < 2) throw Error(Errc::config, "advanced repairer needs N >= 2");
  if (r < 1) throw Error(Errc::config, "advanced repairer needs r >= 1");
  AdvancedParams p;
  p.variant = variant;
  p.nodes = nodes;
  p.clen = clen;
  p.r = r;
  if (variant == Variant::poisson) {
    if (!(eps > 0.0 && eps < 2.0)) throw Error(Errc::config, "Poisson advanced repairer needs 0 < eps < 2");
    p.eps_prime = eps / 2.0;
    p.b = static_cast<std::uint32_t>(std::floor(p.eps_prime * static_cast<double>(nodes) + 1e-9)) + 1;
    if (p.b >= nodes) throw Error(Errc::config, "eps too large: b = eps/2*N + 1 leaves k < 1");
  }
  p.k = static_cast<std::uint32_t>(nodes - p.b);
  const std::uint64_t n = nodes + r;
  if (n >= 0xFFFF) throw Error(Errc::config, "advanced repairer needs N + r < 65535");
  p.n = static_cast<std::uint32_t>(n);
  if (backend == Backend::byte && n > ByteCodec::kMaxFragments) {
    throw Error(Errc::config, "byte backend needs N + r <= 256; use the symbolic backend");
  }
  const std::uint64_t per_node = advanced_fragments_per_node(nodes, r);
  if (backend == Backend::byte && clen % per_node != 0) {
    throw Error(Errc::config, "byte backend needs clen divisible by r*(N+(r+1)/2) = " + std::to_string(per_node));
  }
  p.flen = clen / per_node;
  if (p.flen == 0) throw Error(Errc::config, "clen too small: needs at least r*(N+(r+1)/2) = " + std::to_string(per_node));
  if (static_cast<std::uint64_t>(nodes) * r > 0xFFFFFFFFull) throw Error(Errc::config, "N*r objects exceed 2^32");
  p.beta = advanced_beta(nodes, r, p.b);

  if (variant == Variant::poisson) {
    double total = 0.0;
    if (step_duration) {
      total = *step_duration;
    } else {
      if (!(lambda > 0.0)) throw Error(Errc::config, "Poisson advanced repairer needs lambda > 0");
      total = (1.0 - p.eps_prime) / (lambda * static_cast<double>(nodes));
    }
    if (!(total >= 0.0)) throw Error(Errc::config, "step duration must be >= 0 or inf");
    p.repair_enabled = !std::isinf(total);
    if (p.repair_enabled) {
      // Reads of a step with exactly one generation: k*r, then N*(r + k).
      const double f = static_cast<double>(p.flen);
      const double k = p.k;
      const double step_bits = (k * r + static_cast<double>(nodes) * (r + k)) * f;
      p.read_rate = total > 0.0 ? step_bits / total : std::numeric_limits<double>::infinity();
      p.t_gen = k * r * f / p.read_rate;
      p.t_move = r * f / p.read_rate;
      p.t_update = k * f / p.read_rate;
    }
  } else if (step_duration && std::isinf(*step_duration)) {
    p.repair_enabled = false;
  }
  return p;
}

AdvancedRepairer::AdvancedRepairer(const AdvancedParams& params, Backend backend, Rng content_rng)
    : params_(params), cluster_(cluster_config(params, backend)) {
  const std::uint64_t N = params_.nodes;
  const std::uint32_t r = params_.r;
  primary_.resize(N);
  for (NodeId i = 0; i < N; ++i) primary_[i] = i;
  helpers_.resize(r);
  for (std::uint32_t j = 0; j < r; ++j) helpers_[j] = static_cast<Efi>(N + j);
  rotation_.assign(N, 0);
  in_np_.assign(N, 1);
  np_size_ = N;
  epoch_.assign(N, 0);
  queued_.assign(N, 0);
  counter_ = params_.b;
  counter_min_ = counter_;

  if (backend == Backend::byte) {
    const Codec& codec = cluster_.codec();
    std::vector<Efi> efis;
    for (NodeId g = 0; g < N; ++g) {
      for (std::uint32_t j = 0; j < r; ++j) {
        const ObjectId o = object_at(g, j);
        efis.resize(N + j + 1);
        for (Efi e = 0; e < efis.size(); ++e) efis[e] = e;
        ObjectData obj{o, Bytes(params_.k * params_.flen / 8)};
        for (auto& byte : obj.content) byte = static_cast<std::uint8_t>(content_rng.next_u32());
        cluster_.retain_source(obj);
        for (const auto& f : codec.encode(obj, efis)) cluster_.preload(f.efi < N ? f.efi : g, f);
      }
    }
    return;
  }
  // Symbolic: primaries first, then helpers. Interleaving the two is ~3x
  // slower at N = 1000.
  for (ObjectId o = 0; o < params_.objects(); ++o) {
    for (NodeId m = 0; m < N; ++m) cluster_.preload(m, Fragment{o, m, nullptr});
  }
  for (NodeId g = 0; g < N; ++g) {
    for (std::uint32_t j = 0; j < r; ++j) {
      const ObjectId o = object_at(g, j);
      for (std::uint32_t h = 0; h <= j; ++h) cluster_.preload(g, Fragment{o, helpers_[h], nullptr});
    }
  }
}

ObjectId AdvancedRepairer::object_at(NodeId group, std::uint32_t position) const {
  return static_cast<ObjectId>(group * params_.r + (rotation_.at(group) + position) % params_.r);
}

bool AdvancedRepairer::has_helpers(NodeId group) const {
  for (std::uint32_t j = 0; j < params_.r; ++j) {
    if (!cluster_.has(group, object_at(group, j), helpers_[0])) return false;
  }
  return true;
}

void AdvancedRepairer::record(SubAlgorithm kind, NodeId node, std::uint64_t reads, std::uint64_t writes) {
  if (record_subs_) subs_.push_back(SubAlgorithmCount{kind, node, reads, writes});
}

std::vector<Fragment> AdvancedRepairer::gather(ObjectId object, NodeId skip) {
  const std::uint32_t k = params_.k;
  std::vector<Fragment> out;
  out.reserve(k);
  std::vector<char> taken;
  for (NodeId m = 0; m < params_.nodes && out.size() < k; ++m) {
    if (m != skip && cluster_.has(m, object, primary_[m])) out.push_back(cluster_.read(m, object, primary_[m], read_time()));
  }
  if (out.size() < k) {
    // Fall back to any surviving EFI, helpers included.
    taken.assign(params_.n, 0);
    for (const auto& f : out) taken[f.efi] = 1;
    for (NodeId m = 0; m < params_.nodes && out.size() < k; ++m) {
      for (Efi e : cluster_.efis_at(m, object)) {
        if (out.size() < k && !taken[e]) {
          taken[e] = 1;
          out.push_back(cluster_.read(m, object, e, read_time()));
        }
      }
    }
  }
  if (out.size() < k) {
    throw Error(Errc::insufficient_fragments, "object " + std::to_string(object) + " has fewer than k fragments");
  }
  return out;
}

std::vector<AdvancedRepairer::Pending> AdvancedRepairer::generate_helpers(NodeId group) {
  std::vector<Pending> writes;
  std::uint64_t reads = 0;
  std::vector<Efi> targets;
  for (std::uint32_t j = 0; j < params_.r; ++j) {
    const ObjectId o = object_at(group, j);
    const auto frags = gather(o, group);
    reads += frags.size();
    targets.assign(helpers_.begin(), helpers_.begin() + j + 1);
    for (auto& f : cluster_.codec().regenerate_many(frags, targets)) writes.push_back(Pending{group, std::move(f)});
  }
  record(SubAlgorithm::generate, group, reads, writes.size());
  return writes;
}

std::vector<AdvancedRepairer::Pending> AdvancedRepairer::move_helpers(NodeId from, NodeId to, Efi efi) {
  std::vector<Pending> writes;
  for (std::uint32_t j = 0; j < params_.r; ++j) {
    writes.push_back(Pending{to, cluster_.read(from, object_at(from, j), efi, read_time())});
  }
  record(SubAlgorithm::move, from, writes.size(), writes.size());
  return writes;
}

std::vector<AdvancedRepairer::Pending> AdvancedRepairer::update_helpers(NodeId group) {
  rotation_[group] = (rotation_[group] + 1) % params_.r;
  const ObjectId last = object_at(group, params_.r - 1);
  const auto frags = gather(last, group);
  std::vector<Pending> writes;
  for (auto& f : cluster_.codec().regenerate_many(frags, helpers_)) writes.push_back(Pending{group, std::move(f)});
  record(SubAlgorithm::update, group, frags.size(), writes.size());
  return writes;
}

void AdvancedRepairer::pace(double start, double duration, std::uint64_t reads) {
  read_clock_ = start;
  read_gap_ = reads > 0 ? duration / static_cast<double>(reads) : 0.0;
}

double AdvancedRepairer::read_time() {
  const double t = read_clock_;
  read_clock_ += read_gap_;
  return t;
}

void AdvancedRepairer::apply(const std::vector<Pending>& writes, double now) {
  for (const auto& w : writes) cluster_.store(w.node, w.fragment, now);
}

// h-hat = (h_1..h_{r-1}, f_i), f-hat_i = h_0.
void AdvancedRepairer::rotate_efis(NodeId target) {
  const Efi h0 = helpers_.front();
  helpers_.erase(helpers_.begin());
  helpers_.push_back(primary_[target]);
  primary_[target] = h0;
}

void AdvancedRepairer::leave_scope(NodeId node) {
  if (in_np_[node]) {
    in_np_[node] = 0;
    --np_size_;
  }
}

// Generate for i, rotate, then move + update per node in ascending order.
// The moved EFI is the old h_0, which the rotation makes i's new primary.
void AdvancedRepairer::periodic_step(NodeId target, double now) {
  const std::uint64_t read0 = cluster_.total_bits_read();
  const std::uint64_t written0 = cluster_.total_bits_written();
  trace(now, "step_start");
  pace(now, 0.0, 0);
  apply(generate_helpers(target), now);
  const Efi h0 = helpers_.front();
  rotate_efis(target);
  for (NodeId ell = 0; ell < params_.nodes; ++ell) {
    auto moved = move_helpers(ell, target, h0);
    for (const auto& w : moved) {
      if (ell != target) cluster_.erase(ell, w.fragment.object, w.fragment.efi);
    }
    apply(moved, now);
    apply(update_helpers(ell), now);
  }
  if (!in_np_[target]) {
    in_np_[target] = 1;
    ++np_size_;
  }
  counter_ = std::min<std::int64_t>(counter_ + 1, params_.b);
  ++completed_;
  if (record_steps_) {
    steps_.push_back(StepStat{now, now, cluster_.total_bits_read() - read0, cluster_.total_bits_written() - written0});
  }
  trace(now, "step_end");
}

void AdvancedRepairer::on_failure(const FailureEvent& event) {
  const NodeId node = event.node;
  cluster_.fail_node(node, event.time);
  ++epoch_.at(node);
  leave_scope(node);
  --counter_;
  note_counter(counter_);
  trace(event.time, "failure");
  if (!params_.repair_enabled) return;
  if (params_.variant == Variant::periodic) {
    periodic_step(node, event.time);
    return;
  }
  if (!queued_[node]) {
    queued_[node] = 1;
    queue_.push_back(node);
  }
  if (!step_ && counter_ < params_.b) start_step(event.time);
}

double AdvancedRepairer::next_event_time() const { return step_ ? step_->sub_end : kInf; }

void AdvancedRepairer::on_timer(double now) {
  if (!step_) throw Error(Errc::invariant_violation, "advanced timer fired with no step in progress");
  finish_sub(now);
}

void AdvancedRepairer::start_step(double now) {
  while (counter_ < params_.b) {
    if (queue_.empty()) {
      // Every node is in scope: nothing to rebuild, the step is empty.
      counter_ = std::min<std::int64_t>(counter_ + 1, params_.b);
      trace(now, "null_step");
      continue;
    }
    Step s;
    s.target = queue_.front();
    queue_.pop_front();
    queued_[s.target] = 0;
    s.start = now;
    s.target_epoch = epoch_[s.target];
    s.read0 = cluster_.total_bits_read();
    s.written0 = cluster_.total_bits_written();
    step_ = std::move(s);
    trace(now, "step_start");
    begin_ell(now);
    return;
  }
}

void AdvancedRepairer::begin_ell(double now) {
  Step& s = *step_;
  s.ell_epoch = epoch_[s.ell];
  if (!has_helpers(s.ell)) {
    s.sub = Sub::generate;
    pace(now, params_.t_gen, static_cast<std::uint64_t>(params_.k) * params_.r);
    s.writes = generate_helpers(s.ell);
    s.sub_end = now + params_.t_gen;
  } else {
    s.sub = Sub::move;
    pace(now, params_.t_move, params_.r);
    s.writes = move_helpers(s.ell, s.target, helpers_.front());
    s.sub_end = now + params_.t_move;
  }
}

void AdvancedRepairer::begin_update(double now) {
  Step& s = *step_;
  s.ell_epoch = epoch_[s.ell];
  s.sub = Sub::update;
  pace(now, params_.t_update, params_.k);
  s.writes = update_helpers(s.ell);
  s.sub_end = now + params_.t_update;
}

void AdvancedRepairer::finish_sub(double now) {
  Step& s = *step_;
  const bool ell_failed = epoch_[s.ell] != s.ell_epoch;
  if (s.phase == Phase::moving) {
    if (epoch_[s.target] != s.target_epoch) {
      // The node being rebuilt failed again: drop the step, keep the sources.
      s.abandoned = true;
      s.writes.clear();
      s.deletes.clear();
      complete_step(now);
      return;
    }
    if (s.sub == Sub::generate) {
      if (!ell_failed) apply(s.writes, now);
      s.writes.clear();
      begin_ell(now);
      return;
    }
    if (ell_failed) {
      // Move interrupted: regenerate at the replacement and move again.
      s.writes.clear();
      begin_ell(now);
      return;
    }
    apply(s.writes, now);
    if (s.ell != s.target) {
      for (auto& w : s.writes) s.deletes.emplace_back(s.ell, std::move(w.fragment));
    }
    s.writes.clear();
    if (++s.ell < params_.nodes) {
      begin_ell(now);
      return;
    }
    for (const auto& [node, f] : s.deletes) {
      if (cluster_.has(node, f.object, f.efi)) cluster_.erase(node, f.object, f.efi);
    }
    s.deletes.clear();
    rotate_efis(s.target);
    s.phase = Phase::updating;
    s.ell = 0;
    begin_update(now);
    return;
  }
  if (!ell_failed) apply(s.writes, now);
  s.writes.clear();
  if (++s.ell < params_.nodes) {
    begin_update(now);
  } else {
    complete_step(now);
  }
}

void AdvancedRepairer::complete_step(double now) {
  Step& s = *step_;
  const bool rebuilt = !s.abandoned && epoch_[s.target] == s.target_epoch;
  if (rebuilt && !in_np_[s.target]) {
    in_np_[s.target] = 1;
    ++np_size_;
  }
  if (record_steps_) {
    steps_.push_back(StepStat{s.start, now, cluster_.total_bits_read() - s.read0,
                              cluster_.total_bits_written() - s.written0});
  }
  step_.reset();
  ++completed_;
  counter_ = std::min<std::int64_t>(counter_ + 1, params_.b);
  trace(now, rebuilt ? "step_end" : "step_abandoned");
  if (counter_ < params_.b) start_step(now);
}

void AdvancedRepairer::check_invariants(bool full) const {
  auto fail = [](const std::string& what) { throw Error(Errc::invariant_violation, "advanced: " + what); };
  if (counter_ > params_.b) fail("counter above its cap");
  if (counter_ >= 0 && static_cast<std::int64_t>(np_size_) < static_cast<std::int64_t>(params_.k) + counter_) {
    fail("scope holds " + std::to_string(np_size_) + " nodes, needs k + b(t) = " +
         std::to_string(params_.k + counter_));
  }
  std::vector<char> seen(params_.n, 0);
  auto distinct = [&](Efi e) {
    if (e >= params_.n || seen[e]) fail("rotating EFIs are not distinct");
    seen[e] = 1;
  };
  for (Efi e : primary_) distinct(e);
  for (Efi e : helpers_) distinct(e);
  if (!full) return;

  const std::uint32_t objects = params_.objects();
  const std::uint64_t per_node = advanced_fragments_per_node(params_.nodes, params_.r);
  for (ObjectId o = 0; o < objects; ++o) {
    for (NodeId m = 0; m < params_.nodes; ++m) {
      if (in_np_[m] && !cluster_.has(m, o, primary_[m])) {
        fail("node " + std::to_string(m) + " lacks primary EFI " + std::to_string(primary_[m]) + " of object " +
             std::to_string(o));
      }
    }
  }
  for (NodeId m = 0; m < params_.nodes; ++m) {
    if (!in_np_[m] || step_) continue;  // helpers are mid-rotation while a step runs
    for (std::uint32_t j = 0; j < params_.r; ++j) {
      const ObjectId o = object_at(m, j);
      for (std::uint32_t h = 0; h <= j; ++h) {
        if (!cluster_.has(m, o, helpers_[h])) {
          fail("node " + std::to_string(m) + " lacks helper h_" + std::to_string(h) + " of its position-" +
               std::to_string(j) + " object");
        }
      }
    }
    if (params_.variant == Variant::periodic && cluster_.fragment_count(m) != per_node) {
      fail("node " + std::to_string(m) + " stores " + std::to_string(cluster_.fragment_count(m)) +
           " fragments, expected " + std::to_string(per_node));
    }
  }
}

}  // namespace lsim
