#pragma once

#include <iosfwd>
#include <string>

#include "lsim/sim_engine.hpp"

namespace lsim {

// Stable column set; changing it breaks downstream tooling.
inline constexpr const char* kCsvHeader =
    "trial,seed,recoverable,first_loss_time,bits_read,bits_written,avg_read_rate,peak_read_rate,counter_min";
inline constexpr const char* kTraceHeader = "time,event,counter,bitsRead,bitsWritten";

// Shortest text that parses back to the same double; "inf"/"nan" spelled out.
std::string format_double(double v);

void write_csv(std::ostream& out, const ExperimentReport& report);
void write_trace(std::ostream& out, const TrialResult& trial);
// First line: the experiment (scenario, layout, bounds, aggregates, ratios);
// then one line per trial.
void write_summary(std::ostream& out, const ExperimentReport& report);

std::string bounds_json(const BoundReport& report, const SystemParams& sys);
std::string bounds_table(const BoundReport& report, const SystemParams& sys);

// Writes <dir>/results.csv (or the scenario's csv name), <dir>/summary.jsonl
// and, with tracing on, <dir>/trace_<trial>.csv. Creates `dir`.
void write_outputs(const ExperimentReport& report, const std::string& dir);

}  // namespace lsim
