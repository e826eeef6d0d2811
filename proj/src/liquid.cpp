#include "lsim/liquid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lsim/error.hpp"

namespace lsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// floor() that forgives the last-ulp error of products like 0.1*20.
std::uint32_t floor_count(double x) { return static_cast<std::uint32_t>(std::floor(x + 1e-9)); }

ClusterConfig cluster_config(const LiquidParams& p, Backend backend) {
  ClusterConfig c;
  c.nodes = p.nodes;
  c.clen = p.clen;
  c.objects = p.objects;
  c.codec = p.codec();
  c.backend = backend;
  return c;
}

}  // namespace

const char* variant_name(Variant v) { return v == Variant::periodic ? "periodic" : "poisson"; }

LiquidParams liquid_params(Variant variant, std::uint64_t nodes, std::uint64_t clen, std::uint32_t overhead_nodes,
                           double eps, double lambda, double period, std::optional<double> step_duration,
                           Backend backend) {
  if (nodes < 2) throw Error(Errc::config, "liquid repairer needs N >= 2");
  if (overhead_nodes < 1 || overhead_nodes >= nodes) {
    throw Error(Errc::config, "liquid repairer needs 1 <= beta*N < N, got beta*N = " + std::to_string(overhead_nodes));
  }
  LiquidParams p;
  p.variant = variant;
  p.nodes = nodes;
  p.clen = clen;
  p.r = overhead_nodes;
  p.k = static_cast<std::uint32_t>(nodes - overhead_nodes);
  if (variant == Variant::periodic) {
    p.objects = p.r;
    p.b = 1;
    if (!(period > 0.0)) throw Error(Errc::config, "periodic repairer needs period > 0");
    p.step_duration = period;
  } else {
    if (!(eps > 0.0 && eps < 2.0)) throw Error(Errc::config, "Poisson liquid repairer needs 0 < eps < 2");
    p.eps_prime = eps / 2.0;
    p.b = floor_count(p.eps_prime * p.r) + 1;
    p.objects = floor_count((1.0 - p.eps_prime) * p.r);
    if (p.objects < 1) throw Error(Errc::config, "Poisson liquid repairer needs (1 - eps/2)*beta*N >= 1");
    if (step_duration) {
      p.step_duration = *step_duration;
    } else {
      if (!(lambda > 0.0)) throw Error(Errc::config, "Poisson liquid repairer needs lambda > 0");
      p.step_duration = (1.0 - p.eps_prime) / (lambda * static_cast<double>(nodes));
    }
  }
  if (variant == Variant::periodic && step_duration) p.step_duration = *step_duration;
  if (!(p.step_duration >= 0.0)) throw Error(Errc::config, "step duration must be >= 0 or inf");
  p.slack = static_cast<std::int64_t>(p.r) + 1 - (static_cast<std::int64_t>(p.objects) + p.b);
  if (p.slack < 0) throw Error(Errc::config, "liquid layout needs objects + b <= beta*N + 1");
  if (backend == Backend::byte && clen % p.objects != 0) {
    throw Error(Errc::config, "byte backend needs clen divisible by the object count " + std::to_string(p.objects));
  }
  p.flen = clen / p.objects;
  if (p.flen == 0) throw Error(Errc::config, "clen too small for the object count");
  return p;
}

LiquidRepairer::LiquidRepairer(const LiquidParams& params, Backend backend, Rng content_rng)
    : params_(params), cluster_(cluster_config(params, backend)), counter_(params.b) {
  counter_min_ = counter_;
  const Codec& codec = cluster_.codec();
  for (std::uint32_t j = 0; j < params_.objects; ++j) {
    order_.push_back(j);
    ObjectData obj{j, {}};
    if (backend == Backend::byte) {
      obj.content.resize(params_.k * params_.flen / 8);
      for (auto& byte : obj.content) byte = static_cast<std::uint8_t>(content_rng.next_u32());
      cluster_.retain_source(obj);
    }
    std::vector<Efi> efis(params_.k + params_.b + j);
    for (Efi e = 0; e < efis.size(); ++e) efis[e] = e;
    for (const auto& f : codec.encode(obj, efis)) cluster_.preload(f.efi, f);
  }
}

double LiquidRepairer::slot_time(std::uint32_t slot) const {
  return step_->start + params_.step_duration * static_cast<double>(slot) / params_.k;
}

double LiquidRepairer::next_event_time() const {
  if (!step_) return kInf;
  return step_->next_slot < params_.k ? slot_time(step_->next_slot) : step_->end;
}

void LiquidRepairer::on_timer(double now) {
  if (!step_) throw Error(Errc::invariant_violation, "liquid timer fired with no step in progress");
  if (step_->next_slot < params_.k) {
    read_slot(now);
  } else {
    complete_step(now);
  }
}

void LiquidRepairer::start_step(double now) {
  if (std::isinf(params_.step_duration)) return;
  Step s;
  s.object = order_.front();
  s.start = now;
  s.end = now + params_.step_duration;
  s.taken.assign(params_.nodes, 0);
  s.captured.reserve(params_.k);
  s.read0 = cluster_.total_bits_read();
  s.written0 = cluster_.total_bits_written();
  step_ = std::move(s);
  trace(now, "step_start");
}

// Slot q reads the lowest-EFI fragment of the object not yet captured. A
// failure between slots just shifts later slots to other surviving EFIs.
void LiquidRepairer::read_slot(double now) {
  Step& s = *step_;
  for (Efi e = 0; e < params_.nodes; ++e) {
    if (!s.taken[e] && cluster_.has(e, s.object, e)) {
      s.captured.push_back(cluster_.read(e, s.object, e, now));
      s.taken[e] = 1;
      break;
    }
  }
  ++s.next_slot;
}

void LiquidRepairer::complete_step(double now) {
  Step& s = *step_;
  std::vector<Efi> missing;
  for (Efi e = 0; e < params_.nodes; ++e) {
    if (!cluster_.has(e, s.object, e)) missing.push_back(e);
  }
  if (!missing.empty()) {
    // Throws insufficient_fragments when the object is already lost.
    const auto regenerated = cluster_.codec().regenerate_many(s.captured, missing);
    for (const auto& f : regenerated) cluster_.store(f.efi, f, now);
  }
  if (record_steps_) {
    steps_.push_back(StepStat{s.start, now, cluster_.total_bits_read() - s.read0,
                              cluster_.total_bits_written() - s.written0});
  }
  order_.push_back(order_.front());
  order_.pop_front();
  step_.reset();
  ++completed_;
  counter_ = std::min<std::int64_t>(counter_ + 1, params_.b);
  trace(now, "step_end");
  if (counter_ < params_.b) start_step(now);
}

void LiquidRepairer::on_failure(const FailureEvent& event) {
  cluster_.fail_node(event.node, event.time);
  --counter_;
  note_counter(counter_);
  trace(event.time, "failure");
  if (!step_ && counter_ < params_.b) start_step(event.time);
}

void LiquidRepairer::check_invariants(bool full) const {
  auto fail = [](const std::string& what) { throw Error(Errc::invariant_violation, "liquid: " + what); };
  if (counter_ > params_.b) fail("counter above its cap");
  // The layout bound is only promised while the counter is non-negative.
  for (std::uint32_t j = 0; counter_ >= 0 && j < params_.objects; ++j) {
    const std::int64_t need = static_cast<std::int64_t>(params_.k) + counter_ + j;
    const std::int64_t have = cluster_.distinct_efis(order_[j]);
    if (have < need) {
      fail("object at position " + std::to_string(j) + " holds " + std::to_string(have) + " fragments, needs " +
           std::to_string(need));
    }
  }
  if (!full) return;
  std::vector<Efi> held;
  for (NodeId node = 0; node < params_.nodes; ++node) {
    if (cluster_.used_bits(node) > params_.clen) fail("node over capacity");
  }
  for (ObjectId o = 0; o < params_.objects; ++o) {
    for (NodeId node = 0; node < params_.nodes; ++node) {
      cluster_.efis_at(node, o, held);
      for (Efi e : held) {
        if (e != node) fail("EFI " + std::to_string(e) + " found at node " + std::to_string(node));
      }
    }
  }
}

}  // namespace lsim
