#include "lsim/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "lsim/error.hpp"

namespace lsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || std::isnan(v)) throw std::invalid_argument("expected a number");
  return v;
}

// Accepts plain digits or an exact integer in exponent form (1e6).
u128 parse_integer(const std::string& text) {
  if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos) return parse_u128(text);
  const double v = parse_double(text);
  if (!(v >= 0.0) || std::floor(v) != v || v >= 1.7e38) throw std::invalid_argument("expected a non-negative integer");
  // long double carries 64 mantissa bits: exact for powers of ten up to 1e27.
  long double ld = 0;
  {
    std::istringstream is(text);
    is >> ld;
  }
  return static_cast<u128>(ld);
}

std::uint64_t parse_u64(const std::string& text) {
  const u128 v = parse_integer(text);
  if (v > UINT64_MAX) throw std::invalid_argument("value exceeds 2^64-1");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "off" || text == "no" || text == "0") return false;
  throw std::invalid_argument("expected true or false");
}

template <class E>
E parse_enum(const std::string& text, std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, value] : options) {
    if (text == name) return value;
    names += names.empty() ? name : std::string("|") + name;
  }
  throw std::invalid_argument("expected one of " + names);
}

using Setter = std::function<void(Scenario&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"system",
       {
           {"N", [](Scenario& sc, const std::string& v) { sc.nodes = parse_u64(v); }},
           {"clen", [](Scenario& sc, const std::string& v) { sc.clen = parse_u64(v); }},
           {"beta", [](Scenario& sc, const std::string& v) { sc.beta = parse_double(v); }},
           {"xlen", [](Scenario& sc, const std::string& v) { sc.xlen = parse_integer(v); }},
           {"vlen", [](Scenario& sc, const std::string& v) { sc.vlen = parse_u64(v); }},
           {"lambda", [](Scenario& sc, const std::string& v) { sc.lambda = parse_double(v); }},
       }},
      {"repairer",
       {
           {"kind",
            [](Scenario& sc, const std::string& v) {
              sc.kind = parse_enum<RepairerKind>(v, {{"liquid", RepairerKind::liquid},
                                                     {"advanced", RepairerKind::advanced}});
            }},
           {"variant",
            [](Scenario& sc, const std::string& v) {
              sc.variant = parse_enum<Variant>(v, {{"periodic", Variant::periodic}, {"poisson", Variant::poisson}});
            }},
           {"period", [](Scenario& sc, const std::string& v) { sc.period = parse_double(v); }},
           {"eps", [](Scenario& sc, const std::string& v) { sc.eps.eps = parse_double(v); }},
           {"eps_c", [](Scenario& sc, const std::string& v) { sc.eps.eps_c = parse_double(v); }},
           {"eps_d", [](Scenario& sc, const std::string& v) { sc.eps.eps_d = parse_double(v); }},
           {"r",
            [](Scenario& sc, const std::string& v) {
              const std::uint64_t r = parse_u64(v);
              if (r > UINT32_MAX) throw std::invalid_argument("r too large");
              sc.r = static_cast<std::uint32_t>(r);
            }},
           {"step_duration", [](Scenario& sc, const std::string& v) { sc.step_duration = parse_double(v); }},
       }},
      {"codec",
       {
           {"backend",
            [](Scenario& sc, const std::string& v) {
              sc.backend = parse_enum<BackendChoice>(v, {{"byte", BackendChoice::byte},
                                                         {"symbolic", BackendChoice::symbolic},
                                                         {"auto", BackendChoice::automatic}});
            }},
       }},
      {"run",
       {
           {"failures", [](Scenario& sc, const std::string& v) { sc.failures = parse_u64(v); }},
           {"trials", [](Scenario& sc, const std::string& v) { sc.trials = parse_u64(v); }},
           {"seed", [](Scenario& sc, const std::string& v) { sc.seed = parse_u64(v); }},
           {"peak_window", [](Scenario& sc, const std::string& v) { sc.peak_window = parse_double(v); }},
           {"ids",
            [](Scenario& sc, const std::string& v) {
              sc.ids = parse_enum<IdChoice>(v, {{"uniform", IdChoice::uniform}, {"distinct", IdChoice::distinct}});
            }},
           {"replay", [](Scenario& sc, const std::string& v) { sc.replay = v; }},
           {"check_every", [](Scenario& sc, const std::string& v) { sc.check_every = parse_u64(v); }},
       }},
      {"output",
       {
           {"csv", [](Scenario& sc, const std::string& v) { sc.csv = v; }},
           {"trace", [](Scenario& sc, const std::string& v) { sc.trace = parse_bool(v); }},
       }},
  };
  return s;
}

}  // namespace

const char* kind_name(RepairerKind k) { return k == RepairerKind::liquid ? "liquid" : "advanced"; }

const char* backend_choice_name(BackendChoice b) {
  switch (b) {
    case BackendChoice::byte: return "byte";
    case BackendChoice::symbolic: return "symbolic";
    case BackendChoice::automatic: return "auto";
  }
  return "?";
}

const char* id_choice_name(IdChoice c) { return c == IdChoice::uniform ? "uniform" : "distinct"; }

Scenario parse_scenario(std::istream& in, const std::string& source) {
  Scenario sc;
  std::string line;
  std::string section;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) { throw Error(Errc::parse, source + ":" + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail("unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!schema().count(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty()) fail("key '" + key + "' appears before any [section]");
    const auto& keys = schema().at(section);
    auto it = keys.find(key);
    if (it == keys.end()) fail("unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) fail("duplicate key '" + key + "' in [" + section + "]");
    if (value.empty()) fail("empty value for '" + key + "'");
    try {
      it->second(sc, value);
    } catch (const std::invalid_argument& e) {
      fail("bad value '" + value + "' for '" + key + "': " + e.what());
    } catch (const Error& e) {
      fail("bad value '" + value + "' for '" + key + "': " + e.what());
    }
  }
  validate_scenario(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open scenario file '" + path + "'");
  return parse_scenario(in, path);
}

void validate_scenario(const Scenario& s) {
  auto fail = [](const std::string& msg) { throw Error(Errc::config, msg); };
  if (s.beta && s.xlen) fail("[system] gives both 'beta' and 'xlen'; exactly one of beta or xlen is allowed");
  if (!s.beta && !s.xlen) fail("[system] needs exactly one of 'beta' or 'xlen'");
  if (s.nodes < 2) fail("[system] N must be at least 2");
  if (s.clen == 0) fail("[system] clen must be positive");
  if (s.beta && !(*s.beta > 0.0 && *s.beta < 1.0)) fail("[system] beta must lie in (0, 1)");
  if (!(s.lambda >= 0.0) || std::isinf(s.lambda)) fail("[system] lambda must be finite and >= 0");
  if (!(s.period > 0.0) || std::isinf(s.period)) fail("[repairer] period must be finite and positive");
  if (s.step_duration && !(*s.step_duration >= 0.0)) fail("[repairer] step_duration must be >= 0 or inf");
  s.eps.validate();
  if (s.kind == RepairerKind::liquid && s.r) fail("[repairer] r applies to the advanced repairer only; liquid derives it from beta");
  if (s.variant == Variant::poisson && !(s.lambda > 0.0) && !s.step_duration) {
    fail("[system] Poisson variant needs lambda > 0");
  }
  if (s.trials == 0) fail("[run] trials must be >= 1");
  if (s.peak_window && !(*s.peak_window > 0.0)) fail("[run] peak_window must be positive");
  if (s.check_every && *s.check_every == 0) fail("[run] check_every must be >= 1");
}

std::string dump_scenario(const Scenario& s) {
  std::ostringstream o;
  o << "[system]\n";
  o << "N = " << s.nodes << "\n";
  o << "clen = " << s.clen << "\n";
  if (s.beta) o << "beta = " << fmt(*s.beta) << "\n";
  if (s.xlen) o << "xlen = " << to_string(*s.xlen) << "\n";
  o << "vlen = " << s.vlen << "\n";
  o << "lambda = " << fmt(s.lambda) << "\n";
  o << "\n[repairer]\n";
  o << "kind = " << kind_name(s.kind) << "\n";
  o << "variant = " << variant_name(s.variant) << "\n";
  o << "period = " << fmt(s.period) << "\n";
  o << "eps = " << fmt(s.eps.eps) << "\n";
  o << "eps_c = " << fmt(s.eps.eps_c) << "\n";
  o << "eps_d = " << fmt(s.eps.eps_d) << "\n";
  if (s.r) o << "r = " << *s.r << "\n";
  if (s.step_duration) o << "step_duration = " << fmt(*s.step_duration) << "\n";
  o << "\n[codec]\n";
  o << "backend = " << backend_choice_name(s.backend) << "\n";
  o << "\n[run]\n";
  o << "failures = " << s.failures << "\n";
  o << "trials = " << s.trials << "\n";
  o << "seed = " << s.seed << "\n";
  if (s.peak_window) o << "peak_window = " << fmt(*s.peak_window) << "\n";
  o << "ids = " << id_choice_name(s.ids) << "\n";
  if (!s.replay.empty()) o << "replay = " << s.replay << "\n";
  if (s.check_every) o << "check_every = " << *s.check_every << "\n";
  o << "\n[output]\n";
  if (!s.csv.empty()) o << "csv = " << s.csv << "\n";
  o << "trace = " << (s.trace ? "true" : "false") << "\n";
  return o.str();
}

}  // namespace lsim
