#ifndef LSIM_LSIM_H
#define LSIM_LSIM_H

/* C interface to the simulator. Every call returns an lsim_status; on
 * failure lsim_last_error() holds a message for the calling thread.
 * Strings returned through char** are owned by the caller and released
 * with lsim_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(LSIM_BUILDING_LIBRARY)
#define LSIM_API __attribute__((visibility("default")))
#else
#define LSIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lsim_status {
  LSIM_OK = 0,
  LSIM_E_ARGUMENT = 1,  /* null handle or out-of-range index */
  LSIM_E_PARSE = 2,     /* malformed scenario text */
  LSIM_E_CONFIG = 3,    /* inconsistent or unsupported parameters */
  LSIM_E_IO = 4,
  LSIM_E_INVARIANT = 5, /* repairer invariant violated: a bug */
  LSIM_E_INTERNAL = 6
} lsim_status;

typedef struct lsim_scenario lsim_scenario;
typedef struct lsim_report lsim_report;

typedef struct lsim_trial_result {
  uint64_t trial;
  uint64_t seed;
  int recoverable;
  int has_loss;
  double first_loss_time;
  uint64_t bits_read;
  uint64_t bits_written;
  double avg_read_rate;
  double peak_read_rate;
  int64_t counter_min;
  uint64_t failures;
} lsim_trial_result;

typedef struct lsim_system_params {
  uint64_t nodes;
  uint64_t clen;
  double beta;
  uint64_t vlen;
  double lambda;
  double eps_c;
  double eps_d;
  double eps;
} lsim_system_params;

typedef struct lsim_bounds {
  uint64_t F;
  uint64_t M;
  double beta_prime;
  double delta_core;
  double delta_distinct;
  double delta_uniform;
  double delta_poisson;
  double core_rate_per_failure;
  double uniform_rate_per_failure;
  double poisson_rate;
  double asymptotic_ratio;
  double capacity;
} lsim_bounds;

LSIM_API const char* lsim_version(void);
LSIM_API const char* lsim_status_name(lsim_status status);
LSIM_API const char* lsim_last_error(void);
LSIM_API void lsim_string_free(char* s);

LSIM_API lsim_status lsim_scenario_load(const char* path, lsim_scenario** out);
LSIM_API lsim_status lsim_scenario_parse(const char* text, lsim_scenario** out);
LSIM_API lsim_status lsim_scenario_dump(const lsim_scenario* s, char** out);
LSIM_API lsim_status lsim_scenario_set_seed(lsim_scenario* s, uint64_t seed);
LSIM_API lsim_status lsim_scenario_set_trials(lsim_scenario* s, uint64_t trials);
/* Test-only: corrupt node 0 before the first event of every trial. */
LSIM_API lsim_status lsim_scenario_set_inject_fault(lsim_scenario* s, int on);
/* Resolves derived quantities without running anything. */
LSIM_API lsim_status lsim_scenario_validate(const lsim_scenario* s);
LSIM_API void lsim_scenario_free(lsim_scenario* s);

/* jobs == 0 uses every hardware thread. */
LSIM_API lsim_status lsim_run(const lsim_scenario* s, unsigned jobs, lsim_report** out);
LSIM_API lsim_status lsim_report_trial_count(const lsim_report* r, size_t* out);
LSIM_API lsim_status lsim_report_trial(const lsim_report* r, size_t index, lsim_trial_result* out);
LSIM_API lsim_status lsim_report_csv(const lsim_report* r, char** out);
LSIM_API lsim_status lsim_report_summary(const lsim_report* r, char** out);
LSIM_API lsim_status lsim_report_write(const lsim_report* r, const char* out_dir);
LSIM_API void lsim_report_free(lsim_report* r);

LSIM_API lsim_status lsim_bounds_compute(const lsim_system_params* p, lsim_bounds* out, char** json_out,
                                         char** table_out);

#ifdef __cplusplus
}
#endif

#endif
