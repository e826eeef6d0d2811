#include "lsim/report_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "lsim/error.hpp"

namespace lsim {

namespace {

using nlohmann::json;

json probability(const ProbabilityBound& p) { return json{{"value", p.value}, {"vacuous", p.vacuous}}; }

json bounds_object(const BoundReport& b, const SystemParams& sys) {
  json j;
  j["N"] = sys.nodes;
  j["clen"] = sys.clen;
  j["xlen"] = to_string(sys.xlen);
  j["vlen"] = sys.vlen;
  j["lambda"] = sys.lambda;
  j["beta"] = sys.beta();
  j["olen"] = to_string(b.phase.olen);
  j["F"] = b.phase.F;
  j["M"] = b.phase.M;
  j["beta_prime"] = b.phase.beta_prime;
  j["F_prime"] = b.phase.F_prime;
  j["eps_c"] = b.eps.eps_c;
  j["eps_d"] = b.eps.eps_d;
  j["eps"] = b.eps.eps;
  j["delta_core"] = probability(b.delta_core);
  j["delta_distinct"] = probability(b.delta_distinct);
  j["delta_uniform"] = probability(b.delta_uniform);
  j["delta_poisson"] = probability(b.delta_poisson);
  j["core_rate_per_failure"] = b.core_rate_per_failure;
  j["uniform_rate_per_failure"] = b.uniform_rate_per_failure;
  j["poisson_rate"] = b.poisson_rate;
  j["delta_window"] = b.delta_window;
  j["asymptotic_ratio"] = b.asymptotic_ratio;
  j["erasure_rate"] = b.erasure_rate;
  j["read_rate_for_capacity"] = b.read_rate_for_capacity;
  j["capacity"] = b.capacity;
  if (!b.gamma.empty()) {
    j["gamma_first"] = b.gamma.front();
    j["gamma_last"] = b.gamma.back();
  }
  return j;
}

json trial_object(const TrialResult& t) {
  json j;
  j["trial"] = t.trial;
  j["seed"] = t.seed;
  j["recoverable"] = t.recoverable;
  j["first_loss_time"] = t.first_loss_time ? json(*t.first_loss_time) : json(nullptr);
  j["bits_read"] = t.bits_read;
  j["bits_written"] = t.bits_written;
  j["avg_read_rate"] = t.avg_read_rate;
  j["peak_read_rate"] = t.peak_read_rate;
  j["counter_min"] = t.counter_min;
  j["failures"] = t.failures;
  j["end_time"] = t.end_time;
  return j;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const ExperimentReport& report) {
  out << kCsvHeader << "\n";
  for (const auto& t : report.trials) {
    out << t.trial << ',' << t.seed << ',' << (t.recoverable ? 1 : 0) << ','
        << (t.first_loss_time ? format_double(*t.first_loss_time) : std::string()) << ',' << t.bits_read << ','
        << t.bits_written << ',' << format_double(t.avg_read_rate) << ',' << format_double(t.peak_read_rate) << ','
        << t.counter_min << "\n";
  }
}

void write_trace(std::ostream& out, const TrialResult& trial) {
  out << kTraceHeader << "\n";
  for (const auto& l : trial.trace) {
    out << format_double(l.time) << ',' << l.event << ',' << l.counter << ',' << l.bits_read << ',' << l.bits_written
        << "\n";
  }
}

void write_summary(std::ostream& out, const ExperimentReport& report) {
  const ResolvedScenario& rs = report.resolved;
  json e;
  e["type"] = "experiment";
  e["scenario"] = dump_scenario(rs.scenario);
  e["backend"] = backend_name(rs.backend);
  e["beta"] = rs.sys.beta();
  e["xlen"] = to_string(rs.sys.xlen);
  e["peak_window"] = rs.peak_window;
  json layout;
  if (rs.liquid) {
    const auto& p = *rs.liquid;
    layout = {{"repairer", "liquid"}, {"variant", variant_name(p.variant)}, {"k", p.k}, {"r", p.r},
              {"objects", p.objects}, {"b", p.b}, {"flen", p.flen}, {"slack", p.slack},
              {"step_duration", p.step_duration}};
  } else {
    const auto& p = *rs.advanced;
    layout = {{"repairer", "advanced"}, {"variant", variant_name(p.variant)}, {"k", p.k}, {"r", p.r},
              {"n", p.n}, {"objects", p.objects()}, {"b", p.b}, {"flen", p.flen}, {"layout_beta", p.beta},
              {"read_rate", p.read_rate}, {"t_gen", p.t_gen}, {"t_move", p.t_move}, {"t_update", p.t_update}};
  }
  e["layout"] = layout;
  if (report.bounds) {
    e["bounds"] = bounds_object(*report.bounds, rs.sys);
  } else {
    e["bounds"] = nullptr;
    e["bounds_note"] = report.bounds_note;
  }
  const Aggregate& a = report.aggregate;
  e["aggregate"] = {{"trials", a.trials},
                    {"unrecoverable", a.unrecoverable},
                    {"detector_disagreements", a.detector_disagreements},
                    {"mean_avg_read_rate", a.mean_avg_read_rate},
                    {"mean_peak_read_rate", a.mean_peak_read_rate},
                    {"max_peak_read_rate", a.max_peak_read_rate},
                    {"mean_read_per_failure", a.mean_read_per_failure},
                    {"mean_write_per_failure", a.mean_write_per_failure}};
  json refs = json::object();
  for (const auto& [k, v] : report.references) refs[k] = v;
  json ratios = json::object();
  for (const auto& [k, v] : report.ratios) ratios[k] = v;
  e["references"] = refs;
  e["ratios"] = ratios;
  out << e.dump() << "\n";
  for (const auto& t : report.trials) {
    json j = trial_object(t);
    j["type"] = "trial";
    out << j.dump() << "\n";
  }
}

std::string bounds_json(const BoundReport& report, const SystemParams& sys) { return bounds_object(report, sys).dump(); }

std::string bounds_table(const BoundReport& b, const SystemParams& sys) {
  std::ostringstream o;
  auto row = [&](const std::string& name, const std::string& value) {
    o << std::left << std::setw(28) << name << value << "\n";
  };
  auto prob = [](const ProbabilityBound& p) { return format_double(p.value) + (p.vacuous ? "  (vacuous)" : ""); };
  row("N", std::to_string(sys.nodes));
  row("clen", std::to_string(sys.clen));
  row("xlen", to_string(sys.xlen));
  row("vlen", std::to_string(sys.vlen));
  row("beta", format_double(sys.beta()));
  row("lambda", format_double(sys.lambda));
  row("olen", to_string(b.phase.olen));
  row("F", std::to_string(b.phase.F));
  row("M = 2F", std::to_string(b.phase.M));
  row("beta'", format_double(b.phase.beta_prime));
  row("F'", format_double(b.phase.F_prime));
  row("eps_c / eps_d / eps",
      format_double(b.eps.eps_c) + " / " + format_double(b.eps.eps_d) + " / " + format_double(b.eps.eps));
  row("delta_c", prob(b.delta_core));
  row("delta_distinct", prob(b.delta_distinct));
  row("delta_uniform", prob(b.delta_uniform));
  row("delta_poisson", prob(b.delta_poisson));
  row("read/failure (core)", format_double(b.core_rate_per_failure));
  row("read/failure (uniform)", format_double(b.uniform_rate_per_failure));
  row("erasure rate E", format_double(b.erasure_rate));
  row("read rate lower bound R", format_double(b.poisson_rate));
  row("window Delta", format_double(b.delta_window));
  row("asymptotic R/E", format_double(b.asymptotic_ratio));
  row("capacity", format_double(b.capacity));
  return o.str();
}

void write_outputs(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create output directory '" + dir + "': " + ec.message());
  const std::string csv_name = report.resolved.scenario.csv.empty() ? "results.csv" : report.resolved.scenario.csv;
  auto open = [&](const std::string& name) {
    const fs::path p = fs::path(dir) / name;
    std::ofstream f(p);
    if (!f) throw Error(Errc::io, "cannot write '" + p.string() + "'");
    return f;
  };
  {
    auto f = open(csv_name);
    write_csv(f, report);
  }
  {
    auto f = open("summary.jsonl");
    write_summary(f, report);
  }
  if (report.resolved.scenario.trace) {
    for (const auto& t : report.trials) {
      auto f = open("trace_" + std::to_string(t.trial) + ".csv");
      write_trace(f, t);
    }
  }
}

}  // namespace lsim
