#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "lsim/bounds.hpp"
#include "lsim/error.hpp"
#include "lsim/failure_gen.hpp"
#include "lsim/rng.hpp"

using namespace lsim;

TEST_CASE("philox known answers") {
  using A = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("rng streams") {
  Rng a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
  Rng u(1, 0);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("periodic timing") {
  auto s = gen_periodic(1.0, 3, 10, UniformIds{}, Rng(9, 0));
  REQUIRE(s.size() == 3);
  CHECK(s[0].time == 1.0);
  CHECK(s[1].time == 2.0);
  CHECK(s[2].time == 3.0);
  CHECK(s == gen_periodic(1.0, 3, 10, UniformIds{}, Rng(9, 0)));
  auto t = gen_periodic(2.5, 4, 10, UniformIds{}, Rng(9, 0));
  CHECK(t[0].time == 2.5);
  CHECK(t[1].time == 5.0);
  CHECK(t[2].time == 7.5);
  CHECK(t[3].time == 10.0);
  CHECK_THROWS_AS(gen_periodic(0.0, 1, 10, UniformIds{}, Rng(9, 0)), Error);
}

TEST_CASE("distinct phases are permutations") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto s = gen_periodic(1.0, 20, 10, DistinctPhaseIds{10}, Rng(seed, 0));
    for (int phase = 0; phase < 2; ++phase) {
      std::set<NodeId> ids;
      for (int i = 0; i < 10; ++i) ids.insert(s[phase * 10 + i].node);
      CHECK(ids.size() == 10);
      CHECK(*ids.rbegin() == 9);
    }
  }
  auto short_phase = gen_periodic(1.0, 30, 10, DistinctPhaseIds{3}, Rng(5, 0));
  for (int p = 0; p < 10; ++p) {
    std::set<NodeId> ids{short_phase[3 * p].node, short_phase[3 * p + 1].node, short_phase[3 * p + 2].node};
    CHECK(ids.size() == 3);
  }
  CHECK_THROWS_AS(FailureGenerator(5, PeriodicTiming{1}, DistinctPhaseIds{6}, Rng(1, 0)), Error);
}

TEST_CASE("poisson timing") {
  CHECK(gen_poisson(1.0, 1, 0, UniformIds{}, Rng(1, 0)).empty());
  const std::size_t n = 100000;
  auto s = gen_poisson(0.01, 100, n, UniformIds{}, Rng(11, 2));
  std::vector<double> gaps(n);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    gaps[i] = s[i].time - prev;
    REQUIRE(gaps[i] > 0.0);
    prev = s[i].time;
  }
  const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / n;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
  double var = 0, lag = 0;
  for (std::size_t i = 0; i < n; ++i) var += (gaps[i] - mean) * (gaps[i] - mean);
  for (std::size_t i = 1; i < n; ++i) lag += (gaps[i] - mean) * (gaps[i - 1] - mean);
  CHECK(std::fabs(lag / var) < 0.01);

  auto yrs = gen_poisson(1.0 / 3.0, 100000, 20000, UniformIds{}, Rng(3, 0));
  CHECK(yrs.back().time / 20000 == doctest::Approx(3.0 / 1e5).epsilon(0.03));

  std::vector<int> counts(100, 0);
  for (const auto& e : s) ++counts[e.node];
  double chi = 0;
  for (int c : counts) chi += (c - 1000.0) * (c - 1000.0) / 1000.0;
  CHECK(chi < 148.2);  // df 99, p = 0.001
}

TEST_CASE("distinct id draws") {
  Rng rng(4, 0);
  auto ids = gen_distinct_ids(3, 2, {0}, rng);
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::vector<NodeId>{1, 2});
  CHECK_THROWS_AS(gen_distinct_ids(5, 1, {0, 1, 2, 3, 4}, rng), Error);
  CHECK_THROWS_AS(gen_distinct_ids(5, 1, {0, 0}, rng), Error);

  std::vector<int> first(10, 0);
  for (int t = 0; t < 100000; ++t) ++first[gen_distinct_ids(10, 10, {}, rng)[0]];
  double chi = 0;
  for (int c : first) chi += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi < 27.88);  // df 9, p = 0.001
}

TEST_CASE("useq from geometric gaps") {
  Rng rng(21, 0);
  SUBCASE("structure") {
    for (int t = 0; t < 200; ++t) {
      auto u = gen_useq_from_gseq(10, 10, rng);
      REQUIRE(u.gs_table.size() == 10);
      CHECK(u.ids.size() == u.gs_table.back() + 1);
      std::set<NodeId> failed;
      std::size_t next = 0;
      for (std::size_t pos = 0; pos < u.ids.size(); ++pos) {
        if (next < u.gs_table.size() && pos == u.gs_table[next]) {
          CHECK(failed.insert(u.ids[pos]).second);
          ++next;
        } else {
          CHECK(failed.count(u.ids[pos]) == 1);
        }
      }
      for (std::size_t i = 1; i < u.gs_table.size(); ++i) CHECK(u.gs_table[i] > u.gs_table[i - 1]);
    }
  }
  SUBCASE("N=2 first gap") {
    int ones = 0;
    for (int t = 0; t < 100000; ++t) ones += gen_useq_from_gseq(2, 2, rng).gs_table[1] == 1;
    CHECK(ones / 1e5 == doctest::Approx(0.5).epsilon(0.02));
  }
  SUBCASE("mean gs_2 for N=10") {
    double sum = 0;
    for (int t = 0; t < 100000; ++t) sum += static_cast<double>(gen_useq_from_gseq(10, 3, rng).gs_table[2]);
    CHECK(sum / 1e5 == doctest::Approx(expected_distinct_failures(10, 2)).epsilon(0.01));
  }
  CHECK_THROWS_AS(gen_useq_from_gseq(3, 4, rng), Error);
}

TEST_CASE("sequence text round trip") {
  auto s = gen_poisson(0.3, 7, 50, UniformIds{}, Rng(8, 1));
  std::stringstream io;
  write_failure_sequence(io, s);
  CHECK(read_failure_sequence(io, 7) == s);
  std::istringstream bad("time,nodeId\n1.0,3\n0.5,2\n");
  CHECK_THROWS_AS(read_failure_sequence(bad, 7), Error);
  std::istringstream range("1.0,9\n");
  CHECK_THROWS_AS(read_failure_sequence(range, 7), Error);
}

TEST_CASE("generator is deterministic per stream") {
  FailureGenerator a(50, PoissonTiming{0.1, 50}, UniformIds{}, Rng(77, 5));
  FailureGenerator b(50, PoissonTiming{0.1, 50}, UniformIds{}, Rng(77, 5));
  for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
  CHECK(a.emitted() == 1000);
}
