#include "lsim/lsim.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "lsim/error.hpp"
#include "lsim/report_io.hpp"
#include "lsim/scenario.hpp"
#include "lsim/sim_engine.hpp"

struct lsim_scenario {
  lsim::Scenario value;
};

struct lsim_report {
  lsim::ExperimentReport value;
};

namespace {

thread_local std::string last_error;

lsim_status status_of(lsim::Errc code) {
  switch (code) {
    case lsim::Errc::parse: return LSIM_E_PARSE;
    case lsim::Errc::io: return LSIM_E_IO;
    case lsim::Errc::invariant_violation: return LSIM_E_INVARIANT;
    case lsim::Errc::config:
    case lsim::Errc::domain: return LSIM_E_CONFIG;
    default: return LSIM_E_INTERNAL;
  }
}

template <class F>
lsim_status guard(F&& f) {
  try {
    last_error.clear();
    f();
    return LSIM_OK;
  } catch (const lsim::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return LSIM_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return LSIM_E_INTERNAL;
  }
}

lsim_status bad_argument(const char* what) {
  last_error = what;
  return LSIM_E_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* lsim_version(void) { return "0.1.0"; }

const char* lsim_status_name(lsim_status status) {
  switch (status) {
    case LSIM_OK: return "ok";
    case LSIM_E_ARGUMENT: return "argument";
    case LSIM_E_PARSE: return "parse";
    case LSIM_E_CONFIG: return "config";
    case LSIM_E_IO: return "io";
    case LSIM_E_INVARIANT: return "invariant";
    case LSIM_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* lsim_last_error(void) { return last_error.c_str(); }

void lsim_string_free(char* s) { std::free(s); }

lsim_status lsim_scenario_load(const char* path, lsim_scenario** out) {
  if (!path || !out) return bad_argument("null argument");
  return guard([&] { *out = new lsim_scenario{lsim::load_scenario(path)}; });
}

lsim_status lsim_scenario_parse(const char* text, lsim_scenario** out) {
  if (!text || !out) return bad_argument("null argument");
  return guard([&] {
    std::istringstream in(text);
    *out = new lsim_scenario{lsim::parse_scenario(in)};
  });
}

lsim_status lsim_scenario_dump(const lsim_scenario* s, char** out) {
  if (!s || !out) return bad_argument("null argument");
  return guard([&] { *out = copy_string(lsim::dump_scenario(s->value)); });
}

lsim_status lsim_scenario_set_seed(lsim_scenario* s, uint64_t seed) {
  if (!s) return bad_argument("null scenario");
  s->value.seed = seed;
  return LSIM_OK;
}

lsim_status lsim_scenario_set_trials(lsim_scenario* s, uint64_t trials) {
  if (!s) return bad_argument("null scenario");
  if (trials == 0) {
    last_error = "trials must be >= 1";
    return LSIM_E_CONFIG;
  }
  s->value.trials = trials;
  return LSIM_OK;
}

lsim_status lsim_scenario_set_inject_fault(lsim_scenario* s, int on) {
  if (!s) return bad_argument("null scenario");
  s->value.inject_fault = on != 0;
  return LSIM_OK;
}

lsim_status lsim_scenario_validate(const lsim_scenario* s) {
  if (!s) return bad_argument("null scenario");
  return guard([&] { (void)lsim::resolve(s->value); });
}

void lsim_scenario_free(lsim_scenario* s) { delete s; }

lsim_status lsim_run(const lsim_scenario* s, unsigned jobs, lsim_report** out) {
  if (!s || !out) return bad_argument("null argument");
  return guard([&] { *out = new lsim_report{lsim::run_experiment(s->value, jobs)}; });
}

lsim_status lsim_report_trial_count(const lsim_report* r, size_t* out) {
  if (!r || !out) return bad_argument("null argument");
  *out = r->value.trials.size();
  return LSIM_OK;
}

lsim_status lsim_report_trial(const lsim_report* r, size_t index, lsim_trial_result* out) {
  if (!r || !out) return bad_argument("null argument");
  if (index >= r->value.trials.size()) return bad_argument("trial index out of range");
  const auto& t = r->value.trials[index];
  out->trial = t.trial;
  out->seed = t.seed;
  out->recoverable = t.recoverable ? 1 : 0;
  out->has_loss = t.first_loss_time ? 1 : 0;
  out->first_loss_time = t.first_loss_time.value_or(0.0);
  out->bits_read = t.bits_read;
  out->bits_written = t.bits_written;
  out->avg_read_rate = t.avg_read_rate;
  out->peak_read_rate = t.peak_read_rate;
  out->counter_min = t.counter_min;
  out->failures = t.failures;
  return LSIM_OK;
}

lsim_status lsim_report_csv(const lsim_report* r, char** out) {
  if (!r || !out) return bad_argument("null argument");
  return guard([&] {
    std::ostringstream o;
    lsim::write_csv(o, r->value);
    *out = copy_string(o.str());
  });
}

lsim_status lsim_report_summary(const lsim_report* r, char** out) {
  if (!r || !out) return bad_argument("null argument");
  return guard([&] {
    std::ostringstream o;
    lsim::write_summary(o, r->value);
    *out = copy_string(o.str());
  });
}

lsim_status lsim_report_write(const lsim_report* r, const char* out_dir) {
  if (!r || !out_dir) return bad_argument("null argument");
  return guard([&] { lsim::write_outputs(r->value, out_dir); });
}

void lsim_report_free(lsim_report* r) { delete r; }

lsim_status lsim_bounds_compute(const lsim_system_params* p, lsim_bounds* out, char** json_out, char** table_out) {
  if (!p) return bad_argument("null argument");
  return guard([&] {
    const auto sys = lsim::SystemParams::from_beta(p->nodes, p->clen, p->beta, p->vlen, p->lambda);
    lsim::EpsilonSet eps;
    eps.eps_c = p->eps_c;
    eps.eps_d = p->eps_d;
    eps.eps = p->eps;
    const auto phase = lsim::derive_phase_params(sys);
    const auto b = lsim::poisson_bounds(sys, phase, eps);
    if (out) {
      out->F = b.phase.F;
      out->M = b.phase.M;
      out->beta_prime = b.phase.beta_prime;
      out->delta_core = b.delta_core.value;
      out->delta_distinct = b.delta_distinct.value;
      out->delta_uniform = b.delta_uniform.value;
      out->delta_poisson = b.delta_poisson.value;
      out->core_rate_per_failure = b.core_rate_per_failure;
      out->uniform_rate_per_failure = b.uniform_rate_per_failure;
      out->poisson_rate = b.poisson_rate;
      out->asymptotic_ratio = b.asymptotic_ratio;
      out->capacity = b.capacity;
    }
    char* js = json_out ? copy_string(lsim::bounds_json(b, sys)) : nullptr;
    try {
      if (table_out) *table_out = copy_string(lsim::bounds_table(b, sys));
    } catch (...) {
      std::free(js);
      throw;
    }
    if (json_out) *json_out = js;
  });
}

}  // extern "C"
