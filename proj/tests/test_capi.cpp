// Exercises the shared library through its C header only.
#include <cmath>
#include <cstring>
#include <string>

#include "doctest.h"
#include "lsim/lsim.h"

namespace {

const char* kScenario =
    "[system]\nN = 10\nclen = 1600\nbeta = 0.2\n"
    "[repairer]\nkind = liquid\nvariant = periodic\n"
    "[run]\nfailures = 50\ntrials = 3\nseed = 4\n";

std::string take(char* s) {
  std::string out = s ? s : "";
  lsim_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("capi: parse, run, inspect") {
  CHECK(std::strlen(lsim_version()) > 0);
  lsim_scenario* s = nullptr;
  REQUIRE(lsim_scenario_parse(kScenario, &s) == LSIM_OK);
  CHECK(lsim_scenario_validate(s) == LSIM_OK);

  lsim_report* r = nullptr;
  REQUIRE(lsim_run(s, 2, &r) == LSIM_OK);
  size_t n = 0;
  CHECK(lsim_report_trial_count(r, &n) == LSIM_OK);
  CHECK(n == 3);
  lsim_trial_result t{};
  CHECK(lsim_report_trial(r, 1, &t) == LSIM_OK);
  CHECK(t.trial == 1);
  CHECK(t.recoverable == 1);
  CHECK(t.has_loss == 0);
  CHECK(t.failures == 50);
  CHECK(t.bits_read == 50u * 4 * 1600);
  CHECK(lsim_report_trial(r, 3, &t) == LSIM_E_ARGUMENT);

  char* csv = nullptr;
  CHECK(lsim_report_csv(r, &csv) == LSIM_OK);
  std::string text = take(csv);
  CHECK(text.rfind("trial,seed,recoverable,", 0) == 0);

  char* summary = nullptr;
  CHECK(lsim_report_summary(r, &summary) == LSIM_OK);
  CHECK(take(summary).find("\"trials\"") != std::string::npos);
  lsim_report_free(r);

  char* dumped = nullptr;
  REQUIRE(lsim_scenario_dump(s, &dumped) == LSIM_OK);
  lsim_scenario* again = nullptr;
  CHECK(lsim_scenario_parse(dumped, &again) == LSIM_OK);
  lsim_string_free(dumped);
  lsim_scenario_free(again);
  lsim_scenario_free(s);
}

TEST_CASE("capi: error codes and messages") {
  lsim_scenario* s = nullptr;
  CHECK(lsim_scenario_parse("[system]\nN = 10\nN = 10\n", &s) == LSIM_E_PARSE);
  CHECK(s == nullptr);
  CHECK(std::string(lsim_last_error()).find(":3:") != std::string::npos);

  CHECK(lsim_scenario_parse("[system]\nN = 10\nclen = 100\nbeta = 0.2\nxlen = 10\n", &s) == LSIM_E_CONFIG);
  std::string msg = lsim_last_error();
  CHECK(msg.find("beta") != std::string::npos);
  CHECK(msg.find("xlen") != std::string::npos);

  CHECK(lsim_scenario_load("/nonexistent.ini", &s) == LSIM_E_IO);
  CHECK(lsim_run(nullptr, 1, nullptr) == LSIM_E_ARGUMENT);
  CHECK(std::string(lsim_status_name(LSIM_E_INVARIANT)).size() > 0);
}

TEST_CASE("capi: injected fault surfaces as an invariant error") {
  lsim_scenario* s = nullptr;
  REQUIRE(lsim_scenario_parse(kScenario, &s) == LSIM_OK);
  CHECK(lsim_scenario_set_inject_fault(s, 1) == LSIM_OK);
  lsim_report* r = nullptr;
  CHECK(lsim_run(s, 1, &r) == LSIM_E_INVARIANT);
  CHECK(r == nullptr);
  lsim_scenario_free(s);
}

TEST_CASE("capi: bounds") {
  lsim_system_params p{};
  p.nodes = 100000;
  p.clen = 10000000000000000ull;
  p.beta = 0.1;
  p.vlen = 10000000000000ull;
  p.lambda = 1.0;
  p.eps_c = 0.1;
  p.eps_d = 0.1;
  p.eps = 0.1;
  lsim_bounds b{};
  char* json = nullptr;
  char* table = nullptr;
  REQUIRE(lsim_bounds_compute(&p, &b, &json, &table) == LSIM_OK);
  CHECK(b.F == 10001);
  CHECK(b.delta_core > 3.0e-7);
  CHECK(b.delta_core < 3.1e-7);
  CHECK(take(json).find("delta") != std::string::npos);
  CHECK(!take(table).empty());

  p.nodes = 20;
  p.beta = 0.45;
  CHECK(lsim_bounds_compute(&p, &b, nullptr, nullptr) != LSIM_OK);
}
