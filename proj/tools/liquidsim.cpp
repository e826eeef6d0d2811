// Command-line front end. Talks to the simulator only through the C API.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsim/lsim.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInvariant = 3;

int exit_code(lsim_status s) {
  switch (s) {
    case LSIM_OK: return kExitOk;
    case LSIM_E_INVARIANT: return kExitInvariant;
    case LSIM_E_INTERNAL: return kExitInternal;
    default: return kExitValidation;
  }
}

int report_error(lsim_status s) {
  std::cerr << "liquidsim: " << lsim_status_name(s) << " error: " << lsim_last_error() << "\n";
  return exit_code(s);
}

struct StringDeleter {
  void operator()(char* s) const { lsim_string_free(s); }
};
using CString = std::unique_ptr<char, StringDeleter>;

struct RunOptions {
  std::string scenario;
  std::string out = "out";
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  bool inject_fault = false;
  bool dump_config = false;
};

int cmd_run(const RunOptions& o) {
  lsim_scenario* raw = nullptr;
  if (auto s = lsim_scenario_load(o.scenario.c_str(), &raw); s != LSIM_OK) return report_error(s);
  std::unique_ptr<lsim_scenario, void (*)(lsim_scenario*)> sc(raw, lsim_scenario_free);
  if (o.seed) lsim_scenario_set_seed(sc.get(), *o.seed);
  if (o.trials) {
    if (auto s = lsim_scenario_set_trials(sc.get(), *o.trials); s != LSIM_OK) return report_error(s);
  }
  if (o.dump_config) {
    char* text = nullptr;
    if (auto s = lsim_scenario_dump(sc.get(), &text); s != LSIM_OK) return report_error(s);
    CString owned(text);
    std::cout << owned.get();
    return kExitOk;
  }
  if (o.inject_fault) lsim_scenario_set_inject_fault(sc.get(), 1);
  if (auto s = lsim_scenario_validate(sc.get()); s != LSIM_OK) return report_error(s);

  lsim_report* rep_raw = nullptr;
  if (auto s = lsim_run(sc.get(), o.jobs, &rep_raw); s != LSIM_OK) return report_error(s);
  std::unique_ptr<lsim_report, void (*)(lsim_report*)> rep(rep_raw, lsim_report_free);
  if (auto s = lsim_report_write(rep.get(), o.out.c_str()); s != LSIM_OK) return report_error(s);

  std::size_t n = 0;
  lsim_report_trial_count(rep.get(), &n);
  std::size_t lost = 0;
  for (std::size_t i = 0; i < n; ++i) {
    lsim_trial_result t{};
    lsim_report_trial(rep.get(), i, &t);
    if (!t.recoverable) ++lost;
  }
  std::cout << n << " trials, " << lost << " unrecoverable; results in " << o.out << "/\n";
  return kExitOk;
}

struct BoundsOptions {
  lsim_system_params p{100000, 10000000000000000ull, 0.1, 10000000000000ull, 0.0, 0.1, 0.1, 0.1};
  bool sweep = false;
  bool json_only = false;
};

int cmd_bounds(const BoundsOptions& o) {
  if (!o.sweep) {
    lsim_bounds b{};
    char* js = nullptr;
    char* table = nullptr;
    if (auto s = lsim_bounds_compute(&o.p, &b, &js, &table); s != LSIM_OK) return report_error(s);
    CString js_owned(js);
    CString table_owned(table);
    if (!o.json_only) std::cout << table_owned.get() << "\n";
    std::cout << js_owned.get() << "\n";
    return kExitOk;
  }
  // As beta -> 0 the lower-bound ratio R/E approaches 1/(2 beta').
  std::printf("%-10s %-14s %-16s %-16s %s\n", "beta", "beta'", "R/E lower", "1/(2beta')", "ratio");
  int rows = 0;
  for (double beta : {0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001}) {
    lsim_system_params p = o.p;
    p.beta = beta;
    lsim_bounds b{};
    if (lsim_bounds_compute(&p, &b, nullptr, nullptr) != LSIM_OK) {
      std::printf("%-10g unsupported: %s\n", beta, lsim_last_error());
      continue;
    }
    const double limit = 1.0 / (2.0 * b.beta_prime);
    std::printf("%-10g %-14.6g %-16.8g %-16.8g %.6f\n", beta, b.beta_prime, b.asymptotic_ratio, limit,
                b.asymptotic_ratio / limit);
    ++rows;
  }
  return rows > 0 ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for lazy repair of erasure-coded storage"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lsim_version()));

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "run the experiment described by a scenario file");
  run_cmd->add_option("--scenario", run.scenario, "scenario file")->required();
  run_cmd->add_option("--seed", run.seed, "override [run] seed");
  run_cmd->add_option("--trials", run.trials, "override [run] trials");
  run_cmd->add_option("--out", run.out, "output directory")->capture_default_str();
  run_cmd->add_option("--jobs", run.jobs, "worker threads, 0 = all cores")->capture_default_str();
  run_cmd->add_flag("--dump-config", run.dump_config, "print the canonical scenario and exit");
  run_cmd->add_flag("--inject-fault", run.inject_fault, "test only")->group("");

  BoundsOptions bounds;
  auto* b_cmd = app.add_subcommand("bounds", "evaluate the lower-bound formulas");
  b_cmd->add_option("--N", bounds.p.nodes, "nodes")->capture_default_str();
  b_cmd->add_option("--clen", bounds.p.clen, "node capacity in bits")->capture_default_str();
  b_cmd->add_option("--beta", bounds.p.beta, "storage overhead")->capture_default_str();
  b_cmd->add_option("--vlen", bounds.p.vlen, "repairer memory in bits")->capture_default_str();
  b_cmd->add_option("--lambda", bounds.p.lambda, "per-node failure rate")->capture_default_str();
  b_cmd->add_option("--eps-c", bounds.p.eps_c)->capture_default_str();
  b_cmd->add_option("--eps-d", bounds.p.eps_d)->capture_default_str();
  b_cmd->add_option("--eps", bounds.p.eps)->capture_default_str();
  b_cmd->add_flag("--sweep", bounds.sweep, "tabulate R/E as beta -> 0");
  b_cmd->add_flag("--json", bounds.json_only, "JSON only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  if (*run_cmd) return cmd_run(run);
  return cmd_bounds(bounds);
}
