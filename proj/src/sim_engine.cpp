#include "lsim/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "lsim/error.hpp"

namespace lsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kCensusEvery = 1024;

bool byte_ok(std::uint64_t n, std::uint64_t clen, std::uint64_t per_node) {
  return n <= ByteCodec::kMaxFragments && clen % per_node == 0 && (clen / per_node) % 8 == 0;
}

Backend choose_backend(BackendChoice choice, std::uint64_t n, std::uint64_t clen, std::uint64_t per_node) {
  switch (choice) {
    case BackendChoice::symbolic: return Backend::symbolic;
    case BackendChoice::automatic: return byte_ok(n, clen, per_node) ? Backend::byte : Backend::symbolic;
    case BackendChoice::byte:
      if (n > ByteCodec::kMaxFragments) {
        throw Error(Errc::config, "byte backend supports at most " + std::to_string(ByteCodec::kMaxFragments) +
                                      " fragments per object, layout needs " + std::to_string(n));
      }
      if (clen % per_node != 0 || (clen / per_node) % 8 != 0) {
        throw Error(Errc::config, "byte backend needs clen to be a multiple of 8*" + std::to_string(per_node));
      }
      return Backend::byte;
  }
  return Backend::symbolic;
}

}  // namespace

ResolvedScenario resolve(const Scenario& sc) {
  validate_scenario(sc);
  ResolvedScenario rs;
  rs.scenario = sc;
  SystemParams sys;
  if (sc.beta) {
    sys = SystemParams::from_beta(sc.nodes, sc.clen, *sc.beta, sc.vlen, sc.lambda);
  } else {
    sys.nodes = sc.nodes;
    sys.clen = sc.clen;
    sys.vlen = sc.vlen;
    sys.lambda = sc.lambda;
    sys.xlen = *sc.xlen;
  }
  sys.validate();
  if (sc.variant == Variant::poisson && !(sc.lambda > 0.0) && sc.replay.empty()) {
    throw Error(Errc::config, "[system] Poisson failures need lambda > 0");
  }

  if (sc.kind == RepairerKind::liquid) {
    const u128 overhead = sys.total_capacity() - sys.xlen;
    if (overhead % sc.clen != 0) {
      throw Error(Errc::config, "liquid repairer needs beta*N integral: N*clen - xlen = " + to_string(overhead) +
                                    " is not a multiple of clen");
    }
    const u128 r = overhead / sc.clen;
    if (r == 0 || r >= sc.nodes) throw Error(Errc::config, "liquid repairer needs 1 <= beta*N < N");
    const auto r32 = static_cast<std::uint32_t>(r);
    // Probe with the symbolic layout for the object count.
    const LiquidParams probe = liquid_params(sc.variant, sc.nodes, sc.clen, r32, sc.eps.eps, sc.lambda, sc.period,
                                             sc.step_duration, Backend::symbolic);
    rs.backend = choose_backend(sc.backend, sc.nodes, sc.clen, probe.objects);
    rs.liquid = liquid_params(sc.variant, sc.nodes, sc.clen, r32, sc.eps.eps, sc.lambda, sc.period, sc.step_duration,
                              rs.backend);
    sys.xlen = static_cast<u128>(rs.liquid->objects) * rs.liquid->k * rs.liquid->flen;
  } else {
    const std::uint32_t r = sc.r ? *sc.r : advanced_r_for_beta(sc.nodes, sys.beta());
    const std::uint64_t per_node = advanced_fragments_per_node(sc.nodes, r);
    rs.backend = choose_backend(sc.backend, sc.nodes + r, sc.clen, per_node);
    rs.advanced = advanced_params(sc.variant, sc.nodes, sc.clen, r, sc.eps.eps, sc.lambda, sc.step_duration, rs.backend);
    sys.xlen = static_cast<u128>(rs.advanced->objects()) * rs.advanced->k * rs.advanced->flen;
  }
  rs.sys = sys;

  if (sc.peak_window) {
    rs.peak_window = *sc.peak_window;
  } else if (sc.lambda > 0.0) {
    rs.peak_window = 1.0 / (sc.lambda * static_cast<double>(sc.nodes));
  } else {
    rs.peak_window = sc.period;
  }
  rs.check_every = sc.check_every ? *sc.check_every : (sc.nodes <= 200 ? 1 : 100);

  if (sc.ids == IdChoice::distinct) {
    std::uint64_t len = sc.nodes;
    try {
      len = std::min<std::uint64_t>(derive_phase_params(sys).M, sc.nodes);
    } catch (const Error&) {
    }
    rs.phase_length = len;
  }
  if (!sc.replay.empty()) {
    std::ifstream in(sc.replay);
    if (!in) throw Error(Errc::io, "cannot open replay file '" + sc.replay + "'");
    rs.replay = read_failure_sequence(in, sc.nodes);
  }
  return rs;
}

bool TrialResult::operator==(const TrialResult& o) const {
  auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
  if (trace.size() != o.trace.size()) return false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& a = trace[i];
    const auto& b = o.trace[i];
    if (!same(a.time, b.time) || a.event != b.event || a.counter != b.counter || a.bits_read != b.bits_read ||
        a.bits_written != b.bits_written) {
      return false;
    }
  }
  return trial == o.trial && seed == o.seed && recoverable == o.recoverable && first_loss_time == o.first_loss_time &&
         bits_read == o.bits_read && bits_written == o.bits_written && same(avg_read_rate, o.avg_read_rate) &&
         same(peak_read_rate, o.peak_read_rate) && counter_min == o.counter_min && failures == o.failures &&
         same(end_time, o.end_time);
}

std::unique_ptr<Repairer> make_repairer(const ResolvedScenario& rs, std::uint64_t trial) {
  Rng content(rs.scenario.seed, 2 * trial + 1);
  if (rs.liquid) return std::make_unique<LiquidRepairer>(*rs.liquid, rs.backend, content);
  return std::make_unique<AdvancedRepairer>(*rs.advanced, rs.backend, content);
}

TrialResult run_trial(const ResolvedScenario& rs, std::uint64_t trial, const TrialHooks& hooks) {
  const Scenario& sc = rs.scenario;
  TrialResult res;
  res.trial = trial;
  res.seed = sc.seed;

  auto rep = make_repairer(rs, trial);
  Cluster& cluster = rep->cluster();
  if (sc.trace) rep->set_trace([&res](const TraceLine& line) { res.trace.push_back(line); });
  rep->set_record_steps(hooks.record_steps);
  if (hooks.on_start) hooks.on_start(*rep);

  std::optional<FailureGenerator> gen;
  std::uint64_t total = sc.failures;
  if (!sc.replay.empty()) {
    total = sc.failures == 0 ? rs.replay.size() : std::min<std::uint64_t>(sc.failures, rs.replay.size());
  } else {
    TimingModel timing = sc.variant == Variant::periodic ? TimingModel{PeriodicTiming{sc.period}}
                                                         : TimingModel{PoissonTiming{sc.lambda, sc.nodes}};
    IdentifierModel ids = rs.phase_length ? IdentifierModel{DistinctPhaseIds{*rs.phase_length}}
                                          : IdentifierModel{UniformIds{}};
    gen.emplace(sc.nodes, timing, ids, Rng(sc.seed, 2 * trial));
  }

  if (sc.inject_fault) {
    rep->inject_fault();
    rep->check_invariants(true);
  }
  rep->check_invariants(true);

  std::uint64_t events = 0;
  std::uint64_t checked_at = cluster.changes();
  double last_failure = 0.0;
  double last_repair = 0.0;
  bool lost = false;

  auto on_loss = [&](double t) {
    lost = true;
    res.recoverable = false;
    res.first_loss_time = t;
    if (rep->counter_min() >= 0) {
      throw Error(Errc::invariant_violation, "data lost at t=" + std::to_string(t) + " while the counter stayed >= 0");
    }
  };
  auto census = [&]() {
    if (rs.backend != Backend::byte) return;
    const Census c = cluster.census();
    if (!c.corrupted.empty()) {
      throw Error(Errc::invariant_violation, "object " + std::to_string(c.corrupted.front()) + " decodes to wrong bytes");
    }
    if (c.lost.empty() != cluster.all_decodable()) {
      throw Error(Errc::invariant_violation, "decode census disagrees with the fragment counts");
    }
  };
  // Returns false once the source is lost.
  auto after = [&](double t, bool is_failure) {
    ++events;
    if (!cluster.all_decodable()) {
      on_loss(t);
      return false;
    }
    // The full census only runs when stored contents changed since the last one.
    const bool full = events % rs.check_every == 0 && cluster.changes() != checked_at;
    rep->check_invariants(full);
    if (full) checked_at = cluster.changes();
    if (is_failure && res.failures % kCensusEvery == 0) census();
    if (hooks.after_event) hooks.after_event(*rep, t, is_failure);
    return true;
  };
  auto guarded = [&](double t, auto&& action) {
    try {
      action();
    } catch (const Error& e) {
      if (e.code() != Errc::insufficient_fragments) throw;
      on_loss(t);
      return false;
    }
    return true;
  };
  auto run_timer = [&]() {
    const double t = rep->next_event_time();
    last_repair = t;
    return guarded(t, [&] { rep->on_timer(t); }) && after(t, false);
  };

  for (std::uint64_t i = 0; i < total && !lost; ++i) {
    const FailureEvent ev = gen ? gen->next() : rs.replay[i];
    while (!lost && rep->next_event_time() <= ev.time) run_timer();
    if (lost) break;
    last_failure = ev.time;
    ++res.failures;
    if (guarded(ev.time, [&] { rep->on_failure(ev); })) after(ev.time, true);
  }
  while (!lost && rep->next_event_time() < kInf) run_timer();
  if (!lost) census();

  res.end_time = lost ? *res.first_loss_time : std::max(last_failure, last_repair);
  res.bits_read = cluster.total_bits_read();
  res.bits_written = cluster.total_bits_written();
  res.counter_min = rep->counter_min();
  if (res.end_time > 0.0) res.avg_read_rate = static_cast<double>(res.bits_read) / res.end_time;
  res.peak_read_rate = cluster.meter_window(0.0, res.end_time, rs.peak_window).peak_read_rate;
  if (hooks.on_steps) hooks.on_steps(rep->steps());
  return res;
}

Aggregate aggregate(const std::vector<TrialResult>& trials) {
  Aggregate a;
  a.trials = trials.size();
  for (const auto& t : trials) {
    if (!t.recoverable) ++a.unrecoverable;
    if (t.recoverable != (t.counter_min >= 0)) ++a.detector_disagreements;
    a.mean_avg_read_rate += t.avg_read_rate;
    a.mean_peak_read_rate += t.peak_read_rate;
    a.max_peak_read_rate = std::max(a.max_peak_read_rate, t.peak_read_rate);
    if (t.failures > 0) {
      a.mean_read_per_failure += static_cast<double>(t.bits_read) / static_cast<double>(t.failures);
      a.mean_write_per_failure += static_cast<double>(t.bits_written) / static_cast<double>(t.failures);
    }
  }
  if (a.trials > 0) {
    const double n = static_cast<double>(a.trials);
    a.mean_avg_read_rate /= n;
    a.mean_peak_read_rate /= n;
    a.mean_read_per_failure /= n;
    a.mean_write_per_failure /= n;
  }
  return a;
}

namespace {

void attach_references(ExperimentReport& rep) {
  const ResolvedScenario& rs = rep.resolved;
  const Scenario& sc = rs.scenario;
  const Aggregate& a = rep.aggregate;
  const double clen = static_cast<double>(sc.clen);
  const double N = static_cast<double>(sc.nodes);
  const double erasure = sc.lambda * N * clen;
  auto add = [&](const std::string& name, double reference, double measured) {
    rep.references.emplace_back(name, reference);
    if (reference != 0.0 && std::isfinite(reference)) rep.ratios.emplace_back(name, measured / reference);
  };
  if (rs.liquid) {
    const LiquidParams& p = *rs.liquid;
    const double beta = static_cast<double>(p.r) / N;
    if (p.variant == Variant::periodic) {
      add("liquid_read_per_failure", static_cast<double>(p.k) * static_cast<double>(p.flen), a.mean_read_per_failure);
      add("liquid_write_per_failure_max", static_cast<double>(p.objects) * static_cast<double>(p.flen),
          a.mean_write_per_failure);
    } else if (sc.eps.eps < 1.0) {
      add("liquid_peak_ceiling", (1.0 - beta) / ((1.0 - sc.eps.eps) * beta) * erasure, a.max_peak_read_rate);
    }
  } else {
    const AdvancedParams& p = *rs.advanced;
    if (p.variant == Variant::periodic) {
      add("advanced_read_per_step_bound", advanced_read_bound(p.nodes, p.r) * clen, a.mean_read_per_failure);
      add("advanced_write_per_step", advanced_write_per_step(p.nodes, p.r) * clen, a.mean_write_per_failure);
      add("advanced_read_approx", advanced_read_approx(p.beta) * clen, a.mean_read_per_failure);
      add("advanced_write_approx", advanced_write_approx(p.beta) * clen, a.mean_write_per_failure);
    } else if (p.beta > p.eps_prime) {
      add("advanced_theorem_peak_rate", advanced_theorem_rate(p.beta, p.eps_prime) * erasure, a.max_peak_read_rate);
      add("advanced_proof_peak_rate", advanced_proof_rate(p.beta, p.eps_prime) * erasure, a.max_peak_read_rate);
    }
  }
  if (rep.bounds) {
    add("lower_bound_read_per_failure", rep.bounds->uniform_rate_per_failure, a.mean_read_per_failure);
    if (sc.lambda > 0.0) add("lower_bound_read_rate", rep.bounds->poisson_rate, a.mean_avg_read_rate);
  }
}

}  // namespace

ExperimentReport run_experiment(const Scenario& scenario, unsigned jobs) {
  ExperimentReport rep;
  rep.resolved = resolve(scenario);
  const ResolvedScenario& rs = rep.resolved;
  try {
    rep.bounds = poisson_bounds(rs.sys, derive_phase_params(rs.sys), scenario.eps);
  } catch (const Error& e) {
    rep.bounds_note = e.what();
  }

  const std::uint64_t n = scenario.trials;
  rep.trials.resize(n);
  std::vector<std::exception_ptr> errors(n);
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::uint64_t>(jobs, n));
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> stop{false};
  auto worker = [&]() {
    for (std::uint64_t i; !stop && (i = next++) < n;) {
      try {
        rep.trials[i] = run_trial(rs, i);
      } catch (...) {
        errors[i] = std::current_exception();
        stop = true;
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  rep.aggregate = aggregate(rep.trials);
  attach_references(rep);
  return rep;
}

GsEstimate monte_carlo_gs(std::uint64_t nodes, std::uint64_t i, std::uint64_t trials, std::uint64_t seed) {
  if (i < 1 || i >= nodes) throw Error(Errc::domain, "monte_carlo_gs requires 1 <= i < N");
  if (trials < 2) throw Error(Errc::domain, "monte_carlo_gs needs at least 2 trials");
  Rng rng(seed, 0);
  const double N = static_cast<double>(nodes);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::uint64_t gs = 0;
    for (std::uint64_t j = 1; j <= i; ++j) gs += rng.geometric((N - static_cast<double>(j)) / N);
    const double x = static_cast<double>(gs);
    const double delta = x - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (x - mean);
  }
  GsEstimate est;
  est.trials = trials;
  est.mean = mean;
  est.stddev = std::sqrt(m2 / static_cast<double>(trials - 1));
  est.ci99 = 2.5758293035489004 * est.stddev / std::sqrt(static_cast<double>(trials));
  return est;
}

}  // namespace lsim
