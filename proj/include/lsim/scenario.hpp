#pragma once

// Sectioned key = value scenario files. `#` starts a comment line.
//
//   [system]   N, clen, beta | xlen, vlen, lambda
//   [repairer] kind (liquid|advanced), variant (periodic|poisson), period,
//              eps, eps_c, eps_d, r, step_duration (number or inf)
//   [codec]    backend (byte|symbolic|auto)
//   [run]      failures, trials, seed, peak_window, ids (uniform|distinct),
//              replay, check_every
//   [output]   csv, trace (true|false)

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "lsim/bounds.hpp"
#include "lsim/repairer.hpp"
#include "lsim/wide.hpp"

namespace lsim {

enum class RepairerKind { liquid, advanced };
enum class BackendChoice { byte, symbolic, automatic };
enum class IdChoice { uniform, distinct };

struct Scenario {
  // system
  std::uint64_t nodes = 0;
  std::uint64_t clen = 0;
  std::optional<double> beta;
  std::optional<u128> xlen;
  std::uint64_t vlen = 0;
  double lambda = 0.0;
  // repairer
  RepairerKind kind = RepairerKind::liquid;
  Variant variant = Variant::periodic;
  double period = 1.0;
  EpsilonSet eps;
  std::optional<std::uint32_t> r;        // advanced only; default round(2*beta*N/(1-beta))
  std::optional<double> step_duration;   // +inf disables repair
  // codec
  BackendChoice backend = BackendChoice::automatic;
  // run
  std::uint64_t failures = 0;
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::optional<double> peak_window;     // default 1/(lambda*N), else the period
  IdChoice ids = IdChoice::uniform;
  std::string replay;                    // `time,nodeId` file replacing the generator
  std::optional<std::uint64_t> check_every;  // full invariant census every K events
  // output
  std::string csv;
  bool trace = false;

  // Test-only, never read from or written to files: wipe node 0 behind the
  // repairer's back before the first event.
  bool inject_fault = false;

  bool operator==(const Scenario&) const = default;
};

const char* kind_name(RepairerKind k);
const char* backend_choice_name(BackendChoice b);
const char* id_choice_name(IdChoice c);

// Throws Error(parse) with "<source>:<line>: ..." messages, Error(config)
// from validate_scenario.
Scenario parse_scenario(std::istream& in, const std::string& source = "<scenario>");
Scenario load_scenario(const std::string& path);
// Canonical text; parse_scenario(dump_scenario(s)) == s.
std::string dump_scenario(const Scenario& s);
// Structural checks that need no derived quantities.
void validate_scenario(const Scenario& s);

}  // namespace lsim
