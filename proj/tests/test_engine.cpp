#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lsim/error.hpp"
#include "lsim/report_io.hpp"
#include "lsim/scenario.hpp"
#include "lsim/sim_engine.hpp"

using namespace lsim;

namespace {

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "t.ini");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::parse);
    return e.what();
  }
  FAIL("no parse error");
  return {};
}

std::string csv_of(const ExperimentReport& r) {
  std::ostringstream o;
  write_csv(o, r);
  return o.str();
}

const char* kPoisson =
    "[system]\nN = 20\nclen = 400\nbeta = 0.2\nlambda = 0.05\n"
    "[repairer]\nkind = liquid\nvariant = poisson\neps = 0.2\n"
    "[codec]\nbackend = symbolic\n"
    "[run]\nfailures = 2000\ntrials = 6\nseed = 11\n";

}  // namespace

TEST_CASE("scenario: dump then parse is the identity") {
  Scenario s = parse(kPoisson);
  CHECK(parse(dump_scenario(s)) == s);

  Scenario a;
  a.nodes = 1000;
  a.clen = 246753000;
  a.xlen = u128(123456789) * 1000000;
  a.kind = RepairerKind::advanced;
  a.variant = Variant::poisson;
  a.lambda = 1e-3 / 3;
  a.eps = EpsilonSet{0.07, 0.11, 0.3};
  a.r = 200;
  a.step_duration = INFINITY;
  a.backend = BackendChoice::byte;
  a.failures = 12345;
  a.trials = 3;
  a.seed = 0xffffffffffffffffULL;
  a.peak_window = 0.1;
  a.ids = IdChoice::distinct;
  a.replay = "f.csv";
  a.check_every = 7;
  a.csv = "x.csv";
  a.trace = true;
  CHECK(parse(dump_scenario(a)) == a);
  CHECK(dump_scenario(parse(dump_scenario(a))) == dump_scenario(a));
}

TEST_CASE("scenario: errors carry the line") {
  CHECK(parse_error("[system]\nN = 10\n\nbogus = 1\n").find("t.ini:4:") != std::string::npos);
  CHECK(parse_error("[system]\nN = 10\nN = 11\n").find("t.ini:3:") != std::string::npos);
  CHECK(parse_error("[nope]\n").find("t.ini:1:") != std::string::npos);
  CHECK(parse_error("[system]\nN = ten\n").find("t.ini:2:") != std::string::npos);
  CHECK(parse_error("[system]\nN =\n").find("t.ini:2:") != std::string::npos);
  CHECK(parse("[system]\nN = 1e5\nclen = 10\nbeta = 0.1\n").nodes == 100000);
}

TEST_CASE("scenario: beta and xlen together are rejected by name") {
  try {
    parse("[system]\nN = 10\nclen = 100\nbeta = 0.2\nxlen = 500\n[run]\nfailures = 1\n");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
    std::string m = e.what();
    CHECK(m.find("beta") != std::string::npos);
    CHECK(m.find("xlen") != std::string::npos);
  }
}

TEST_CASE("csv: golden header and row count") {
  ExperimentReport r = run_experiment(parse(kPoisson), 1);
  std::string csv = csv_of(r);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "trial,seed,recoverable,first_loss_time,bits_read,bits_written,avg_read_rate,peak_read_rate,counter_min");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("determinism: reruns and job counts agree") {
  Scenario s = parse(kPoisson);
  ExperimentReport a = run_experiment(s, 1);
  ExperimentReport b = run_experiment(s, 1);
  ExperimentReport c = run_experiment(s, 8);
  CHECK(csv_of(a) == csv_of(b));
  CHECK(csv_of(a) == csv_of(c));
  REQUIRE(a.trials.size() == c.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) CHECK(a.trials[i] == c.trials[i]);
  // Distinct trials draw distinct streams.
  CHECK(a.trials[0].bits_read != a.trials[1].bits_read);
  s.seed = 12;
  CHECK(csv_of(run_experiment(s, 1)) != csv_of(a));
}

TEST_CASE("engine: zero failures") {
  Scenario s = parse(kPoisson);
  s.failures = 0;
  s.trials = 1;
  ExperimentReport r = run_experiment(s, 1);
  REQUIRE(r.trials.size() == 1);
  CHECK(r.trials[0].recoverable);
  CHECK(r.trials[0].failures == 0);
  CHECK(r.trials[0].bits_read == 0);
}

TEST_CASE("engine: replayed failures") {
  auto path = std::filesystem::temp_directory_path() / "lsim_replay_test.csv";
  {
    std::ofstream f(path);
    f << "time,nodeId\n";
    for (int i = 1; i <= 30; ++i) f << i << "," << (i * 7) % 10 << "\n";
  }
  Scenario s;
  s.nodes = 10;
  s.clen = 1600;
  s.beta = 0.2;
  s.failures = 0;
  s.replay = path.string();
  ExperimentReport r = run_experiment(s, 1);
  REQUIRE(r.trials.size() == 1);
  CHECK(r.trials[0].failures == 30);
  CHECK(r.trials[0].recoverable);
  CHECK(r.trials[0].bits_read == 30ull * 4 * 1600);
  s.failures = 12;
  CHECK(run_experiment(s, 1).trials[0].failures == 12);
  std::filesystem::remove(path);

  s.replay = "/nonexistent/replay.csv";
  CHECK_THROWS_AS(run_experiment(s, 1), Error);
}

TEST_CASE("monte carlo: distinct failure gaps") {
  GsEstimate g2 = monte_carlo_gs(10, 2, 100000, 5);
  const double exact2 = 10.0 / 9 + 10.0 / 8;  // 2.3611...
  CHECK(std::fabs(g2.mean - exact2) <= g2.ci99);
  CHECK(std::fabs(g2.mean - exact2) <= 0.01 * exact2);

  GsEstimate g1 = monte_carlo_gs(10, 1, 100000, 6);
  CHECK(std::fabs(g1.mean - 10.0 / 9) <= g1.ci99);

  GsEstimate small = monte_carlo_gs(10, 2, 10000, 7);
  GsEstimate large = monte_carlo_gs(10, 2, 1000000, 8);
  const double shrink = small.ci99 / large.ci99;
  CHECK(shrink > 9.0);
  CHECK(shrink < 11.0);
}
