#include <cmath>

#include "doctest.h"
#include "lsim/error.hpp"
#include "lsim/liquid.hpp"
#include "lsim/sim_engine.hpp"

using namespace lsim;

namespace {

LiquidParams periodic(std::uint64_t n, std::uint64_t clen, std::uint32_t r, Backend backend = Backend::symbolic) {
  return liquid_params(Variant::periodic, n, clen, r, 0.1, 0.0, 1.0, std::nullopt, backend);
}

// Runs timers up to `t`, then the failure.
void fail_at(LiquidRepairer& rep, double t, NodeId node) {
  while (rep.next_event_time() <= t) rep.on_timer(rep.next_event_time());
  rep.on_failure(FailureEvent{t, node});
}

void drain(LiquidRepairer& rep) {
  while (std::isfinite(rep.next_event_time())) rep.on_timer(rep.next_event_time());
}

Scenario liquid_scenario() {
  Scenario sc;
  sc.nodes = 10;
  sc.clen = 1600;
  sc.beta = 0.2;
  sc.kind = RepairerKind::liquid;
  sc.variant = Variant::periodic;
  sc.period = 1.0;
  sc.failures = 100;
  sc.seed = 7;
  return sc;
}

}  // namespace

TEST_CASE("storer layout: N=10, beta=0.2") {
  const auto p = periodic(10, 1600, 2, Backend::byte);
  CHECK(p.k == 8);
  CHECK(p.objects == 2);
  CHECK(p.flen == 800);  // clen / r
  LiquidRepairer rep(p, Backend::byte, Rng(1, 1));
  CHECK(rep.cluster().distinct_efis(rep.object_at(0)) == 9);
  CHECK(rep.cluster().distinct_efis(rep.object_at(1)) == 10);
  CHECK(rep.cluster().all_decodable());
  CHECK(rep.cluster().census().corrupted.empty());
  for (NodeId node = 0; node < 10; ++node) {
    for (ObjectId o = 0; o < 2; ++o) {
      for (Efi e : rep.cluster().efis_at(node, o)) CHECK(e == node);
    }
  }
  rep.check_invariants(true);
}

TEST_CASE("layout parameter errors") {
  CHECK_THROWS_AS(periodic(10, 1600, 0), Error);
  CHECK_THROWS_AS(periodic(10, 1600, 10), Error);
  CHECK_THROWS_AS(periodic(10, 1601, 2, Backend::byte), Error);
  CHECK_THROWS_AS(liquid_params(Variant::poisson, 10, 1600, 2, 0.1, 0.0, 1.0, std::nullopt, Backend::symbolic), Error);
}

TEST_CASE("repair step reads k fragments and writes the missing ones") {
  // beta = 0.1, clen = 1e6: one step reads 9e6 bits.
  const auto p = periodic(10, 1000000, 1);
  LiquidRepairer rep(p, Backend::symbolic, Rng(1, 1));
  rep.set_record_steps(true);
  fail_at(rep, 0.0, 3);
  CHECK(rep.counter() == 0);
  CHECK(rep.step_in_progress());
  drain(rep);
  REQUIRE(rep.steps().size() == 1);
  CHECK(rep.steps()[0].bits_read == 9000000);
  CHECK(rep.steps()[0].bits_written == 1000000);
  CHECK(rep.steps()[0].end == doctest::Approx(1.0));
  CHECK(rep.counter() == 1);
  CHECK(rep.cluster().distinct_efis(0) == 10);
  rep.check_invariants(true);
}

TEST_CASE("a failure on a node holding no fragment of x0 leaves it alone") {
  // N=10, r=2: x0 holds EFIs 0..8, node 9 stores nothing of it.
  const auto p = periodic(10, 1600, 2);
  LiquidRepairer rep(p, Backend::symbolic, Rng(1, 1));
  rep.set_record_steps(true);
  const ObjectId x0 = rep.object_at(0);
  fail_at(rep, 0.0, 9);
  CHECK(rep.cluster().distinct_efis(x0) == 9);
  CHECK(rep.cluster().distinct_efis(rep.object_at(1)) == 9);
  drain(rep);
  // Only EFI 9 was missing.
  CHECK(rep.steps()[0].bits_read == 8 * 800);
  CHECK(rep.steps()[0].bits_written == 800);
  // Rotation: the repaired object now sits last with n fragments.
  CHECK(rep.object_at(1) == x0);
  CHECK(rep.cluster().distinct_efis(x0) == 10);
}

TEST_CASE("reads are paced across the step") {
  const auto p = periodic(10, 1600, 2);
  LiquidRepairer rep(p, Backend::symbolic, Rng(1, 1));
  fail_at(rep, 0.0, 9);
  for (std::uint32_t q = 0; q < p.k; ++q) {
    CHECK(rep.next_event_time() == doctest::Approx(q / 8.0));
    rep.on_timer(rep.next_event_time());
    CHECK(rep.cluster().total_bits_read() == (q + 1) * 800);
  }
  CHECK(rep.next_event_time() == doctest::Approx(1.0));
}

TEST_CASE("Poisson counter bookkeeping") {
  // N=100, beta=0.2, eps=0.2: eps'=0.1, b=3, r'=18, step = 0.9/(lambda N).
  const auto p = liquid_params(Variant::poisson, 100, 1800, 20, 0.2, 0.01, 1.0, std::nullopt, Backend::symbolic);
  CHECK(p.b == 3);
  CHECK(p.objects == 18);
  CHECK(p.slack == 0);
  CHECK(p.step_duration == doctest::Approx(0.9));
  LiquidRepairer rep(p, Backend::symbolic, Rng(1, 1));
  rep.set_record_steps(true);

  SUBCASE("failure at the cap schedules one step") {
    rep.on_failure(FailureEvent{5.0, 1});
    CHECK(rep.counter() == 2);
    CHECK(rep.step_in_progress());
    drain(rep);
    CHECK(rep.counter() == 3);
    REQUIRE(rep.steps().size() == 1);
    CHECK(rep.steps()[0].end == doctest::Approx(5.9));
    CHECK_FALSE(rep.step_in_progress());
  }
  SUBCASE("counter b-3 restarts immediately") {
    rep.on_failure(FailureEvent{0.0, 1});
    rep.on_failure(FailureEvent{0.1, 2});
    rep.on_failure(FailureEvent{0.2, 3});
    CHECK(rep.counter() == 0);
    while (rep.steps().empty()) rep.on_timer(rep.next_event_time());
    CHECK(rep.counter() == 1);
    CHECK(rep.step_in_progress());
    drain(rep);
    CHECK(rep.counter() == 3);
    CHECK(rep.steps().size() == 3);
  }
  SUBCASE("m failures during a step change the counter by 1-m") {
    rep.on_failure(FailureEvent{0.0, 1});
    const std::int64_t before = rep.counter();
    rep.on_failure(FailureEvent{0.2, 2});
    rep.on_failure(FailureEvent{0.4, 3});
    while (rep.steps().empty()) rep.on_timer(rep.next_event_time());
    CHECK(rep.counter() - before == 1 - 2);
  }
  rep.check_invariants(true);
}

TEST_CASE("trial: periodic N=10 beta=0.2 reads exactly 4 clen per failure") {
  const auto rs = resolve(liquid_scenario());
  std::uint64_t steps = 0;
  TrialHooks hooks;
  hooks.record_steps = true;
  hooks.on_steps = [&](const std::vector<StepStat>& s) {
    steps = s.size();
    for (const auto& st : s) {
      CHECK(st.bits_read == 4 * 1600);
      CHECK(st.bits_written <= 1600);
    }
  };
  const auto res = run_trial(rs, 0, hooks);
  CHECK(res.recoverable);
  CHECK(res.counter_min == 0);
  CHECK(res.failures == 100);
  CHECK(steps == 100);
  CHECK(res.bits_read == 100 * 4 * 1600);
}

TEST_CASE("trial: zero failures read nothing") {
  auto sc = liquid_scenario();
  sc.failures = 0;
  const auto res = run_trial(resolve(sc), 0);
  CHECK(res.recoverable);
  CHECK(res.bits_read == 0);
  CHECK(res.bits_written == 0);
}

TEST_CASE("trial: pure erosion loses data exactly when the census says so") {
  auto sc = liquid_scenario();
  sc.nodes = 20;
  sc.clen = 4 * 64;
  sc.variant = Variant::poisson;
  sc.lambda = 1.0;
  sc.eps.eps = 0.2;
  sc.step_duration = std::numeric_limits<double>::infinity();
  sc.failures = 50;
  const auto rs = resolve(sc);
  const auto& p = *rs.liquid;
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    // Oracle: replay the same failures against bare storage, no repair.
    auto rep = make_repairer(rs, trial);
    FailureGenerator gen(sc.nodes, PoissonTiming{sc.lambda, sc.nodes}, UniformIds{}, Rng(sc.seed, 2 * trial));
    std::optional<double> oracle;
    for (std::uint64_t i = 0; i < sc.failures && !oracle; ++i) {
      const auto ev = gen.next();
      rep->cluster().fail_node(ev.node, ev.time);
      for (ObjectId o = 0; o < p.objects; ++o) {
        if (rep->cluster().distinct_efis(o) < p.k) oracle = ev.time;
      }
    }
    const auto res = run_trial(rs, trial);
    REQUIRE(oracle.has_value());
    CHECK_FALSE(res.recoverable);
    REQUIRE(res.first_loss_time.has_value());
    CHECK(*res.first_loss_time == *oracle);
    CHECK(res.counter_min < 0);
    CHECK(res.bits_read == 0);
  }
}

TEST_CASE("trial: byte backend round trip over many failures") {
  auto sc = liquid_scenario();
  sc.backend = BackendChoice::byte;
  sc.failures = 300;
  const auto rs = resolve(sc);
  CHECK(rs.backend == Backend::byte);
  const auto res = run_trial(rs, 3);
  CHECK(res.recoverable);
}

TEST_CASE("injected fault is caught as an invariant violation") {
  auto sc = liquid_scenario();
  sc.inject_fault = true;
  try {
    run_trial(resolve(sc), 0);
    FAIL("fault not detected");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invariant_violation);
  }
}
