// Acceptance harness: one PASS/FAIL line per criterion, each timed.
// Exit status is 0 iff the failing set equals --expect-fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsim/advanced_liquid.hpp"
#include "lsim/bounds.hpp"
#include "lsim/erasure.hpp"
#include "lsim/error.hpp"
#include "lsim/liquid.hpp"
#include "lsim/report_io.hpp"
#include "lsim/rng.hpp"
#include "lsim/sim_engine.hpp"

using namespace lsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1: lower-bound reproduction ----
Outcome bounds_reproduction() {
  const auto sys = SystemParams::from_beta(100000, 10000000000000000ull, 0.1, 10000000000000ull, 1.0);
  const auto phase = derive_phase_params(sys);
  const double d1 = core_bounds(phase, sys.clen, EpsilonSet{0.1, 0.1, 0.1}).delta_core.value;
  const double d2 = core_bounds(phase, sys.clen, EpsilonSet{0.2, 0.1, 0.1}).delta_core.value;
  Outcome o;
  o.pass = d1 <= 3e-7 && d2 <= 2e-39;
  o.detail = fmt("F=%llu beta'=%.5f delta_c(0.1)=%.4e (<=3e-7: %s) delta_c(0.2)=%.4e (<=2e-39: %s)",
                 static_cast<unsigned long long>(phase.F), phase.beta_prime, d1, d1 <= 3e-7 ? "yes" : "no", d2,
                 d2 <= 2e-39 ? "yes" : "no");
  return o;
}

// ---- 2: liquid periodic exactness ----
Outcome liquid_periodic() {
  Scenario sc;
  sc.nodes = 100;
  sc.clen = 1000000;
  sc.beta = 0.1;
  sc.kind = RepairerKind::liquid;
  sc.variant = Variant::periodic;
  sc.backend = BackendChoice::byte;
  sc.failures = 10000;
  sc.seed = 1;
  sc.check_every = 1;
  const ResolvedScenario rs = resolve(sc);
  const auto& lp = *rs.liquid;

  std::uint64_t events = 0;
  std::uint64_t undecodable = 0;
  std::uint64_t steps = 0;
  std::uint64_t bad_read = 0;
  std::uint64_t bad_write = 0;
  TrialHooks hooks;
  hooks.record_steps = true;
  hooks.after_event = [&](Repairer& r, double, bool) {
    ++events;
    if (!r.cluster().all_decodable()) ++undecodable;
  };
  hooks.on_steps = [&](const std::vector<StepStat>& ss) {
    steps = ss.size();
    for (const auto& s : ss) {
      if (s.bits_read != 9000000) ++bad_read;
      if (s.bits_written > 1000000) ++bad_write;
    }
  };
  const TrialResult res = run_trial(rs, 0, hooks);
  const double per_failure = static_cast<double>(res.bits_read) / static_cast<double>(res.failures);
  Outcome o;
  o.pass = res.recoverable && undecodable == 0 && res.failures == 10000 && steps == 10000 && bad_read == 0 &&
           bad_write == 0 && res.bits_read == 10000ull * 9000000;
  o.detail = fmt("k=%u r=%u events=%llu undecodable=%llu steps=%llu read/failure=%.1f steps!=9e6=%llu "
                 "steps-writing>1e6=%llu",
                 lp.k, lp.r, static_cast<unsigned long long>(events), static_cast<unsigned long long>(undecodable),
                 static_cast<unsigned long long>(steps), per_failure, static_cast<unsigned long long>(bad_read),
                 static_cast<unsigned long long>(bad_write));
  return o;
}

// ---- 3: advanced periodic exactness ----
Outcome advanced_periodic() {
  const std::uint64_t N = 100;
  const std::uint32_t r = 20;
  Scenario sc;
  sc.nodes = N;
  sc.clen = advanced_fragments_per_node(N, r) * 1000;
  sc.beta = advanced_beta(N, r);
  sc.r = r;
  sc.kind = RepairerKind::advanced;
  sc.variant = Variant::periodic;
  sc.backend = BackendChoice::symbolic;
  sc.failures = 1000;
  sc.seed = 3;
  sc.check_every = 1;
  const ResolvedScenario rs = resolve(sc);

  std::uint64_t checked = 0;
  std::uint64_t scanned = 0;
  std::uint64_t bad_counts = 0;
  std::uint64_t over_bound = 0;
  std::uint64_t steps = 0;
  std::string violation;
  TrialHooks hooks;
  hooks.record_steps = true;
  hooks.on_start = [](Repairer& rep) { static_cast<AdvancedRepairer&>(rep).set_record_sub_algorithms(true); };
  hooks.after_event = [&](Repairer& rep, double, bool) {
    auto& adv = static_cast<AdvancedRepairer&>(rep);
    // Every state between failures, full census.
    try {
      adv.check_invariants(true);
    } catch (const Error& e) {
      if (violation.empty()) violation = e.what();
    }
    ++checked;
    const auto& subs = adv.sub_algorithms();
    for (; scanned < subs.size(); ++scanned) {
      const auto& s = subs[scanned];
      bool ok = false;
      switch (s.kind) {
        case SubAlgorithm::generate: ok = s.reads == (N - 1) * r && s.writes == r * (r + 1) / 2; break;
        case SubAlgorithm::move: ok = s.reads == r && s.writes == r; break;
        case SubAlgorithm::update: ok = s.reads == N - 1 && s.writes == r; break;
      }
      if (!ok) ++bad_counts;
    }
  };
  const double bound = advanced_read_bound(N, r) * static_cast<double>(sc.clen);
  double max_step = 0.0;
  hooks.on_steps = [&](const std::vector<StepStat>& ss) {
    steps = ss.size();
    for (const auto& s : ss) {
      max_step = std::max(max_step, static_cast<double>(s.bits_read));
      if (static_cast<double>(s.bits_read) > bound) ++over_bound;
    }
  };
  const TrialResult res = run_trial(rs, 0, hooks);
  Outcome o;
  o.pass = res.recoverable && violation.empty() && res.failures == 1000 && steps == 1000 &&
           scanned == 1000 * (1 + 2 * N) && bad_counts == 0 && over_bound == 0;
  o.detail = fmt("beta=%.6f checks=%llu sub-algorithms=%llu wrong-counts=%llu max-step-read/bound=%.4f "
                 "steps-over-bound=%llu%s%s",
                 rs.sys.beta(), static_cast<unsigned long long>(checked), static_cast<unsigned long long>(scanned),
                 static_cast<unsigned long long>(bad_counts), max_step / bound,
                 static_cast<unsigned long long>(over_bound), violation.empty() ? "" : " violation: ",
                 violation.c_str());
  return o;
}

// ---- 4: advanced large-N asymptotics ----
Outcome advanced_large() {
  const std::uint64_t N = 1000;
  const double beta = 0.1;
  const std::uint32_t r = advanced_r_for_beta(N, beta);
  Scenario sc;
  sc.nodes = N;
  sc.clen = advanced_fragments_per_node(N, r) * 1000;
  sc.beta = beta;
  sc.kind = RepairerKind::advanced;
  sc.variant = Variant::periodic;
  sc.backend = BackendChoice::symbolic;
  sc.failures = 200;
  sc.seed = 5;
  // A full census costs ~2 s at this size; sample it.
  sc.check_every = 50;
  const ResolvedScenario rs = resolve(sc);
  const TrialResult res = run_trial(rs, 0);
  const double clen = static_cast<double>(sc.clen);
  const double f = static_cast<double>(res.failures);
  const double read = static_cast<double>(res.bits_read) / f;
  const double write = static_cast<double>(res.bits_written) / f;
  const double b = rs.sys.beta();
  const double read_ratio = read / (advanced_read_approx(b) * clen);
  const double write_ratio = write / (advanced_write_approx(b) * clen);
  const double read_ratio_nominal = read / (advanced_read_approx(beta) * clen);
  const double write_ratio_nominal = write / (advanced_write_approx(beta) * clen);
  auto within = [](double x) { return std::fabs(x - 1.0) <= 0.10; };
  Outcome o;
  o.pass = res.recoverable && res.failures == 200 && within(read_ratio) && within(write_ratio) &&
           within(read_ratio_nominal) && within(write_ratio_nominal);
  o.detail = fmt("r=%u layout beta=%.5f read/approx=%.4f write/approx=%.4f (nominal beta 0.1: %.4f, %.4f)", r, b,
                 read_ratio, write_ratio, read_ratio_nominal, write_ratio_nominal);
  return o;
}

// ---- 5: Poisson liquid structural safety ----
Outcome poisson_liquid() {
  Scenario sc;
  sc.nodes = 100;
  sc.clen = 1800;
  sc.beta = 0.2;
  sc.lambda = 0.01;
  sc.kind = RepairerKind::liquid;
  sc.variant = Variant::poisson;
  sc.eps = EpsilonSet{0.1, 0.1, 0.2};
  sc.backend = BackendChoice::symbolic;
  sc.failures = 10000;
  sc.trials = 100;
  sc.seed = 2;
  sc.check_every = 1;
  const ExperimentReport rep = run_experiment(sc, 1);
  const double beta = rep.resolved.sys.beta();
  const double ceiling = (1.0 - beta) / ((1.0 - sc.eps.eps) * beta) * sc.lambda * static_cast<double>(sc.nodes) *
                         static_cast<double>(sc.clen);
  std::uint64_t disagree = 0;
  std::uint64_t over = 0;
  std::uint64_t lost = 0;
  double worst = 0.0;
  for (const auto& t : rep.trials) {
    if (t.recoverable != (t.counter_min >= 0)) ++disagree;
    if (t.peak_read_rate > ceiling) ++over;
    if (!t.recoverable) ++lost;
    worst = std::max(worst, t.peak_read_rate / ceiling);
  }
  Outcome o;
  o.pass = rep.trials.size() == 100 && disagree == 0 && over == 0;
  o.detail = fmt("b=%d trials=%zu unrecoverable=%llu detector-disagreements=%llu max-peak/ceiling=%.4f "
                 "trials-over-ceiling=%llu",
                 static_cast<int>(rep.resolved.liquid->b), rep.trials.size(), static_cast<unsigned long long>(lost),
                 static_cast<unsigned long long>(disagree), worst, static_cast<unsigned long long>(over));
  return o;
}

// ---- 6: upper vs lower sandwich ----
Outcome sandwich() {
  const std::uint64_t N = 100000;
  const std::uint64_t clen = 10000000000000000ull;
  std::vector<double> ratios;
  std::string detail;
  for (double beta : {0.05, 0.02, 0.01}) {
    const auto sys = SystemParams::from_beta(N, clen, beta, 10000000000000ull, 1.0);
    const auto phase = derive_phase_params(sys);
    const double bp = phase.beta_prime;
    const std::uint32_t r = advanced_r_for_beta(N, bp);
    const double upper = advanced_read_bound(N, r);
    const double lower = (1.0 - bp) / lni(2.0 * bp);
    ratios.push_back(upper / lower);
    detail += fmt("beta=%.2f beta'=%.5f r=%u ratio=%.4f; ", beta, bp, r, upper / lower);
  }
  const bool monotone = ratios[0] > ratios[1] && ratios[1] > ratios[2] && ratios[2] > 1.0;
  Outcome o;
  o.pass = monotone && ratios[2] < 1.25;
  o.detail = detail + (monotone ? "decreasing toward 1" : "not monotone");
  return o;
}

// ---- 7: MDS codec ----
Outcome codec_roundtrip() {
  const CodecParams cp{12, 8, 8 * 64};
  auto codec = make_codec(Backend::byte, cp);
  Rng rng(7, 0);
  std::vector<Efi> all(cp.n);
  for (Efi e = 0; e < cp.n; ++e) all[e] = e;
  std::uint64_t bad = 0;
  std::uint64_t accepted_short = 0;
  for (int t = 0; t < 10000; ++t) {
    ObjectData obj{static_cast<ObjectId>(t), Bytes(cp.k * cp.flen / 8)};
    for (auto& byte : obj.content) byte = static_cast<std::uint8_t>(rng.next_u32());
    auto frags = codec->encode(obj, all);
    for (std::size_t i = 0; i < cp.k; ++i) std::swap(frags[i], frags[i + rng.below(frags.size() - i)]);
    std::vector<Fragment> subset(frags.begin(), frags.begin() + cp.k);
    if (codec->decode(subset).content != obj.content) ++bad;
    subset.pop_back();
    try {
      codec->decode(subset);
      ++accepted_short;
    } catch (const Error& e) {
      if (e.code() != Errc::insufficient_fragments) ++accepted_short;
    }
  }
  Outcome o;
  o.pass = bad == 0 && accepted_short == 0;
  o.detail = fmt("k=8 n=12 subsets=10000 wrong-decodes=%llu k-1-accepted=%llu", static_cast<unsigned long long>(bad),
                 static_cast<unsigned long long>(accepted_short));
  return o;
}

// ---- 8: geometric-sum oracle ----
Outcome gs_oracle() {
  const double exact = expected_distinct_failures(10, 2);
  const GsEstimate g = monte_carlo_gs(10, 2, 100000, 8);
  const double rel = std::fabs(g.mean - exact) / exact;
  Outcome o;
  o.pass = rel <= 0.01;
  o.detail = fmt("exact=%.6f mean=%.6f ci99=%.6f rel-error=%.5f in-ci=%s", exact, g.mean, g.ci99, rel,
                 std::fabs(g.mean - exact) <= g.ci99 ? "yes" : "no");
  return o;
}

// ---- 9: determinism ----
std::string report_bytes(const ExperimentReport& r) {
  std::ostringstream out;
  write_csv(out, r);
  write_summary(out, r);
  for (const auto& t : r.trials) write_trace(out, t);
  return out.str();
}

Outcome determinism() {
  // Poisson liquid with traces: random times and ids.
  Scenario liquid;
  liquid.nodes = 100;
  liquid.clen = 1800;
  liquid.beta = 0.2;
  liquid.lambda = 0.01;
  liquid.kind = RepairerKind::liquid;
  liquid.variant = Variant::poisson;
  liquid.eps = EpsilonSet{0.1, 0.1, 0.2};
  liquid.failures = 1500;
  liquid.trials = 8;
  liquid.seed = 9;
  liquid.trace = true;

  // Byte backend: stored content comes from the seed as well.
  Scenario periodic;
  periodic.nodes = 20;
  periodic.clen = 6400;
  periodic.beta = 0.2;
  periodic.kind = RepairerKind::liquid;
  periodic.variant = Variant::periodic;
  periodic.backend = BackendChoice::byte;
  periodic.failures = 3000;
  periodic.trials = 3;
  periodic.seed = 6;

  Scenario advanced;
  advanced.nodes = 40;
  advanced.clen = advanced_fragments_per_node(40, 9) * 64;
  advanced.beta = 0.1;
  advanced.r = 9;
  advanced.lambda = 0.025;
  advanced.kind = RepairerKind::advanced;
  advanced.variant = Variant::poisson;
  advanced.eps = EpsilonSet{0.1, 0.1, 0.3};
  advanced.backend = BackendChoice::symbolic;
  advanced.failures = 2000;
  advanced.trials = 4;
  advanced.seed = 4;
  advanced.trace = true;

  std::string detail;
  bool ok = true;
  for (const Scenario* sc : {&liquid, &periodic, &advanced}) {
    const std::string a = report_bytes(run_experiment(*sc, 1));
    const std::string b = report_bytes(run_experiment(*sc, 1));
    const std::string c = report_bytes(run_experiment(*sc, 8));
    const bool same = a == b && a == c;
    ok = ok && same;
    detail += fmt("%s %s: rerun %s, jobs 1 vs 8 %s (%zu bytes); ", kind_name(sc->kind), variant_name(sc->variant),
                  a == b ? "identical" : "DIFFERS",
                  a == c ? "identical" : "DIFFER", a.size());
  }
  Outcome o;
  o.pass = ok;
  o.detail = detail.substr(0, detail.size() - 2);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0: no runtime limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria for the liquid repair simulator"};
  std::vector<int> only;
  std::vector<int> expect_fail;
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--expect-fail", expect_fail, "criteria known to fail; exit 0 iff exactly these fail");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "bound reproduction", 1.0, bounds_reproduction},
      {2, "liquid periodic exactness", 60.0, liquid_periodic},
      {3, "advanced periodic exactness", 60.0, advanced_periodic},
      {4, "advanced large-N asymptotics", 120.0, advanced_large},
      {5, "Poisson liquid structural safety", 0.0, poisson_liquid},
      {6, "upper vs lower sandwich", 1.0, sandwich},
      {7, "MDS codec", 30.0, codec_roundtrip},
      {8, "geometric-sum oracle", 30.0, gs_oracle},
      {9, "determinism", 0.0, determinism},
  };

  std::set<int> failed;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_s == 0.0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) failed.insert(c.id);
    std::string limit = c.limit_s > 0.0 ? fmt(" (limit %.0f s)", c.limit_s) : std::string();
    std::printf("%s %d %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                limit.c_str());
    std::fflush(stdout);
  }
  std::set<int> expected;
  for (int id : expect_fail) {
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected.insert(id);
  }
  if (failed != expected) {
    std::printf("unexpected outcome: %zu failing, %zu expected to fail\n", failed.size(), expected.size());
    return 1;
  }
  return 0;
}
