#include <cmath>
#include <cstring>
#include <limits>

#include "doctest.h"
#include "lsim/bounds.hpp"
#include "lsim/error.hpp"
#include "lsim/rng.hpp"

using namespace lsim;

namespace {

SystemParams practical() {
  return SystemParams::from_beta(100000, 10000000000000000ull, 0.1, 10000000000000ull, 1.0 / 3.0);
}

}  // namespace

TEST_CASE("lni") {
  CHECK(lni(0.0) == 0.0);
  CHECK(lni(0.2) == doctest::Approx(0.22314355131420976).epsilon(1e-14));
  CHECK(lni(0.5) == doctest::Approx(0.6931471805599453).epsilon(1e-14));
  CHECK_THROWS_AS(lni(-0.1), Error);
  CHECK_THROWS_AS(lni(1.0), Error);
  double prev = -1.0;
  for (double z = 0.0; z < 0.999; z += 0.01) {
    CHECK(lni(z) >= z);
    CHECK(lni(z) > prev);
    prev = lni(z);
  }
}

TEST_CASE("lnd") {
  CHECK(lnd(0.0) == 0.0);
  CHECK(lnd(0.1) == doctest::Approx(0.0046898201956751).epsilon(1e-12));
  CHECK(lnd(1e-3) / (1e-6 / 2) == doctest::Approx(1.0).epsilon(0.002));
  CHECK(lnd(1e-4) / (1e-8 / 2) == doctest::Approx(1.0).epsilon(0.002));
  CHECK(lnd(-0.5) > 0.0);
  CHECK_THROWS_AS(lnd(-1.0), Error);
  // Series and direct branches meet smoothly.
  CHECK(lnd(0.99999e-4) == doctest::Approx(lnd(1.00001e-4)).epsilon(1e-4));
}

TEST_CASE("phase parameters") {
  SUBCASE("hand example") {
    SystemParams s{100, 1000, 90000, 0, 0.0};
    auto p = derive_phase_params(s);
    CHECK(p.olen == 10001);
    CHECK(p.F == 11);
    CHECK(p.beta_prime == doctest::Approx(0.11));
    CHECK(p.M == 22);
    CHECK(p.F_prime == doctest::Approx(lni(0.22) * 100));
  }
  SUBCASE("practical system") {
    auto s = practical();
    CHECK(to_string(s.xlen) == "900000000000000000000");
    auto p = derive_phase_params(s);
    CHECK(p.F == 10001);
    CHECK(p.beta_prime - 0.1 <= 1e-7 + 1e-4);
    CHECK(p.beta_prime >= 0.1);
  }
  SUBCASE("beta = 1 rejected") {
    SystemParams s{10, 10, 0, 0, 0.0};
    CHECK_THROWS_AS(derive_phase_params(s), Error);
    try {
      derive_phase_params(s);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::config);
    }
  }
  SUBCASE("random draws keep beta' in its band") {
    Rng rng(7, 0);
    for (int i = 0; i < 1000; ++i) {
      const std::uint64_t n = 10 + rng.below(5000);
      const std::uint64_t clen = 1 + rng.below(1000000);
      const std::uint64_t vlen = rng.below(clen);
      const u128 total = static_cast<u128>(n) * clen;
      const u128 overhead = static_cast<u128>(rng.below(static_cast<std::uint64_t>(total / 3)));
      SystemParams s{n, clen, total - overhead, vlen, 0.0};
      PhaseParams p;
      try {
        p = derive_phase_params(s);
      } catch (const Error&) {
        continue;
      }
      const double beta = s.beta();
      CHECK(p.beta_prime >= beta - 1e-12);
      CHECK(p.beta_prime <= beta + (static_cast<double>(vlen) + 1) / (static_cast<double>(n) * clen) + 1.0 / n + 1e-12);
      CHECK(p.F * clen >= p.olen);
    }
  }
}

TEST_CASE("core bounds") {
  auto s = practical();
  auto p = derive_phase_params(s);
  SUBCASE("delta_c at the practical point") {
    EpsilonSet e{0.1, 0.1, 0.1};
    CHECK(core_bounds(p, s.clen, e).delta_core.value == doctest::Approx(3.0624e-7).epsilon(1e-4));
    e.eps_c = 0.2;
    auto c = core_bounds(p, s.clen, e);
    CHECK(c.delta_core.value == doctest::Approx(8.998e-40).epsilon(1e-3));
    CHECK(c.delta_core.value <= 2e-39);
    CHECK_FALSE(c.delta_core.vacuous);
  }
  SUBCASE("eps_c = 1 kills the rate") {
    EpsilonSet e{1.0, 0.1, 0.1};
    CHECK(core_bounds(p, s.clen, e).rate_per_failure == 0.0);
  }
  SUBCASE("gamma chain") {
    SystemParams small{100, 1000, 90000, 0, 0.0};
    auto q = derive_phase_params(small);
    EpsilonSet e;
    auto c = core_bounds(q, small.clen, e);
    REQUIRE(c.gamma.size() == 2 * q.F - 1);
    for (std::size_t i = 1; i < c.gamma.size(); ++i) {
      CHECK(c.gamma[i] > c.gamma[i - 1]);
      CHECK(c.gamma[i] / (i + 1) <= c.gamma[i - 1] / i);
    }
    CHECK(c.gamma.back() / c.gamma.size() >= c.rate_per_failure);
  }
}

TEST_CASE("poisson bounds") {
  auto s = practical();
  auto p = derive_phase_params(s);
  SUBCASE("asymptotic ratio") {
    SystemParams t{1000, 1000, 900000, 0, 1.0};
    auto q = derive_phase_params(t);
    REQUIRE(q.F == 101);
    PhaseParams fixed = q;
    fixed.beta_prime = 0.1;
    auto rep = poisson_bounds(t, fixed, EpsilonSet{});
    CHECK(rep.asymptotic_ratio == doctest::Approx(4.033278).epsilon(1e-6));
  }
  SUBCASE("Delta window") {
    SystemParams t = s;
    t.lambda = 1.0 / 3.0;
    PhaseParams fixed = p;
    fixed.beta_prime = 0.1;
    auto rep = poisson_bounds(t, fixed, EpsilonSet{0.1, 0.01, 0.01});
    CHECK(rep.delta_window == doctest::Approx(1.365772).epsilon(1e-6));
  }
  SUBCASE("capacity") {
    CHECK(storage_capacity(5.0, 5.0, 10, 100) == doctest::Approx(500.0));
    CHECK(storage_capacity(0.0, 0.0, 10, 100) == doctest::Approx(1000.0));
    auto rep = poisson_bounds(s, p, EpsilonSet{}, s.erasure_rate());
    CHECK(rep.capacity == doctest::Approx(0.5 * 1e5 * 1e16));
  }
  SUBCASE("probabilities are non-negative and composed") {
    auto rep = poisson_bounds(s, p, EpsilonSet{});
    CHECK(rep.delta_distinct.value >= 0.0);
    CHECK(rep.delta_uniform.value >= rep.delta_distinct.value);
    CHECK(rep.delta_poisson.value >= rep.delta_uniform.value);
    CHECK(rep.poisson_rate > 0.0);
    CHECK(rep.uniform_rate_per_failure > 0.0);
  }
  SUBCASE("lambda zero gives an infinite window") {
    SystemParams t = s;
    t.lambda = 0.0;
    auto rep = poisson_bounds(t, p, EpsilonSet{});
    CHECK(std::isinf(rep.delta_window));
  }
  SUBCASE("rate approaches E/(2 beta) as beta shrinks") {
    for (double beta : {0.05, 0.02, 0.01}) {
      SystemParams t = SystemParams::from_beta(100000, 1000000000, beta, 0, 1e-3);
      auto q = derive_phase_params(t);
      auto rep = poisson_bounds(t, q, EpsilonSet{1e-9, 1e-9, 1e-9});
      const double ratio = rep.poisson_rate / (rep.erasure_rate / (2 * q.beta_prime));
      CHECK(ratio < 1.0);
      if (beta == 0.01) CHECK(ratio == doctest::Approx(1.0).epsilon(0.02));
    }
  }
  SUBCASE("pure") {
    auto a = poisson_bounds(s, p, EpsilonSet{});
    auto b = poisson_bounds(s, p, EpsilonSet{});
    CHECK(std::memcmp(&a.delta_poisson.value, &b.delta_poisson.value, sizeof(double)) == 0);
    CHECK(a.gamma == b.gamma);
  }
}

TEST_CASE("two_pow_neg saturates") {
  CHECK(two_pow_neg(1) == 0.5);
  CHECK(two_pow_neg(10) == doctest::Approx(1.0 / 1024));
  CHECK(two_pow_neg(2000) == 0.0);
}

TEST_CASE("expected distinct failures") {
  CHECK(expected_distinct_failures(10, 1) == doctest::Approx(10.0 / 9));
  CHECK(expected_distinct_failures(10, 2) == doctest::Approx(2.3611111).epsilon(1e-7));
  const double e = expected_distinct_failures(100, 20);
  CHECK(e == doctest::Approx(22.43982).epsilon(1e-6));
  CHECK(100 * lni(0.20) < e);
  CHECK(e < 100 * lni(0.21));
  CHECK_THROWS_AS(expected_distinct_failures(10, 10), Error);
}

TEST_CASE("supermartingale tail") {
  CHECK(supermartingale_tail(1, 1, std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(supermartingale_tail(100, 1, 20) == doctest::Approx(13.5335283).epsilon(1e-8));
  CHECK(supermartingale_tail(1e4, 1, 1e3) == doctest::Approx(1.92875e-18).epsilon(1e-5));
  CHECK_THROWS_AS(supermartingale_tail(0.5, 1, 1), Error);
}
