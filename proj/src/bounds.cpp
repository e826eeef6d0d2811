#include "lsim/bounds.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <string>

#include "lsim/error.hpp"

namespace lsim {

namespace {

constexpr double kSaturationFloor = 1e-300;

// Decomposes a double into mantissa/10^scale using its shortest round-trip
// decimal form. Returns false when the mantissa does not fit 64 bits.
bool decimal_fraction(double value, std::uint64_t& mantissa, int& scale) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string text(buf, res.ptr);
  int exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string::npos) {
    exponent = std::stoi(text.substr(e + 1));
    text.resize(e);
  }
  std::string digits;
  int frac_digits = 0;
  bool seen_point = false;
  for (char c : text) {
    if (c == '.') {
      seen_point = true;
    } else {
      digits.push_back(c);
      if (seen_point) ++frac_digits;
    }
  }
  scale = frac_digits - exponent;
  if (digits.size() > 18) return false;
  mantissa = std::stoull(digits);
  while (scale < 0) {
    if (mantissa > std::numeric_limits<std::uint64_t>::max() / 10) return false;
    mantissa *= 10;
    ++scale;
  }
  return scale <= 38;
}

}  // namespace

double SystemParams::beta() const {
  const u128 total = total_capacity();
  if (total == 0) return 0.0;
  const u128 overhead = total - xlen;
  return static_cast<double>(static_cast<long double>(overhead) / static_cast<long double>(total));
}

double SystemParams::erasure_rate() const {
  return lambda * static_cast<double>(nodes) * static_cast<double>(clen);
}

void SystemParams::validate() const {
  if (nodes == 0) throw Error(Errc::config, "N must be positive");
  if (clen == 0) throw Error(Errc::config, "clen must be positive");
  if (xlen == 0) throw Error(Errc::config, "xlen must be positive");
  if (xlen > total_capacity()) throw Error(Errc::config, "xlen exceeds N*clen");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(Errc::config, "lambda must be a finite non-negative rate");
}

SystemParams SystemParams::from_beta(std::uint64_t nodes, std::uint64_t clen, double beta, std::uint64_t vlen,
                                     double lambda) {
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(Errc::config, "beta must lie in [0, 1)");
  SystemParams sys;
  sys.nodes = nodes;
  sys.clen = clen;
  sys.vlen = vlen;
  sys.lambda = lambda;
  const u128 total = sys.total_capacity();
  u128 overhead = 0;
  std::uint64_t mantissa = 0;
  int scale = 0;
  u128 scaled = 0;
  if (decimal_fraction(beta, mantissa, scale) && !__builtin_mul_overflow(total, static_cast<u128>(mantissa), &scaled)) {
    u128 pow10 = 1;
    for (int i = 0; i < scale; ++i) pow10 *= 10;
    overhead = (scaled + pow10 / 2) / pow10;
  } else {
    overhead = static_cast<u128>(std::llround(static_cast<long double>(beta) * static_cast<long double>(total)));
  }
  sys.xlen = total - overhead;
  return sys;
}

void EpsilonSet::validate() const {
  if (!(eps_c > 0.0 && eps_c <= 1.0)) throw Error(Errc::config, "eps_c must lie in (0, 1]");
  if (!(eps_d > 0.0) || !std::isfinite(eps_d)) throw Error(Errc::config, "eps_d must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(Errc::config, "eps must be positive");
}

ProbabilityBound make_probability(double value) {
  if (value < 0.0) value = 0.0;
  return ProbabilityBound{value, value > 1.0};
}

double lni(double zeta) {
  if (!(zeta >= 0.0 && zeta < 1.0)) throw Error(Errc::domain, "lni requires 0 <= zeta < 1");
  return -std::log1p(-zeta);
}

double lnd(double zeta) {
  if (!(zeta > -1.0)) throw Error(Errc::domain, "lnd requires zeta > -1");
  // Series for tiny |zeta| avoids cancellation in zeta - log1p(zeta).
  if (std::fabs(zeta) < 1e-4) {
    const double z2 = zeta * zeta;
    return z2 / 2.0 - z2 * zeta / 3.0 + z2 * z2 / 4.0 - z2 * z2 * zeta / 5.0;
  }
  return zeta - std::log1p(zeta);
}

PhaseParams derive_phase_params(const SystemParams& sys) {
  sys.validate();
  PhaseParams p;
  p.nodes = sys.nodes;
  p.olen = checked_add(checked_add(sys.total_capacity() - sys.xlen, sys.vlen), 1);
  const u128 f = (p.olen + sys.clen - 1) / sys.clen;
  if (f >= sys.nodes || 2 * f >= sys.nodes) {
    throw Error(Errc::config, "unsupported regime: 2F = " + to_string(2 * f) + " >= N = " + std::to_string(sys.nodes) +
                                  " (beta' must stay below 1/2)");
  }
  p.F = static_cast<std::uint64_t>(f);
  p.M = 2 * p.F;
  p.beta_prime = static_cast<double>(p.F) / static_cast<double>(sys.nodes);
  p.F_prime = lni(2.0 * p.beta_prime) * static_cast<double>(sys.nodes);
  return p;
}

CoreBounds core_bounds(const PhaseParams& phase, std::uint64_t clen, const EpsilonSet& eps) {
  CoreBounds out;
  const double F = static_cast<double>(phase.F);
  const double N = static_cast<double>(phase.nodes);
  const double c = static_cast<double>(clen);
  const double denom = 2.0 * F - 1.0;
  out.gamma.reserve(2 * phase.F - 1);
  for (std::uint64_t i = 1; i <= 2 * phase.F - 1; ++i) {
    const double di = static_cast<double>(i);
    out.gamma.push_back((1.0 - eps.eps_c) * di * (N - (di + 1.0) / 2.0) * c / denom);
  }
  out.delta_core = make_probability(2.0 * F * std::exp(-eps.eps_c * eps.eps_c * F / 4.0 + eps.eps_c));
  out.rate_per_failure = (1.0 - eps.eps_c) * (1.0 - phase.beta_prime) * c / (2.0 * phase.beta_prime);
  return out;
}

double two_pow_neg(std::uint64_t clen) {
  const double log_value = -static_cast<double>(clen) * std::log(2.0);
  if (log_value < std::log(kSaturationFloor)) return 0.0;
  return std::exp(log_value);
}

BoundReport poisson_bounds(const SystemParams& sys, const PhaseParams& phase, const EpsilonSet& eps,
                           std::optional<double> read_rate) {
  eps.validate();
  BoundReport rep;
  rep.phase = phase;
  rep.eps = eps;

  CoreBounds core = core_bounds(phase, sys.clen, eps);
  rep.gamma = std::move(core.gamma);
  rep.delta_core = core.delta_core;
  rep.core_rate_per_failure = core.rate_per_failure;

  const double N = static_cast<double>(sys.nodes);
  const double F = static_cast<double>(phase.F);
  const double bp = phase.beta_prime;
  const double lni2b = lni(2.0 * bp);

  const double dd = 2.0 * F * std::exp(-2.0 * bp * (1.0 - 2.0 * bp) * N * lnd(eps.eps_d)) / (1.0 + eps.eps_d);
  rep.delta_distinct = make_probability(dd);
  const double du = dd + F * (core.delta_core.value + two_pow_neg(sys.clen));
  rep.delta_uniform = make_probability(du);
  const double dp =
      du + (1.0 + eps.eps_d) * 2.0 * phase.F_prime * std::exp(-2.0 * F * lnd(eps.eps)) / (1.0 + eps.eps);
  rep.delta_poisson = make_probability(dp);

  const double c = static_cast<double>(sys.clen);
  rep.uniform_rate_per_failure = (1.0 - eps.eps_c) / (1.0 + eps.eps_d) * (1.0 - bp) * c / lni2b;
  rep.erasure_rate = sys.erasure_rate();
  rep.poisson_rate =
      (1.0 - eps.eps_c) / ((1.0 + eps.eps_d) * (1.0 + eps.eps)) * (1.0 - bp) / lni2b * rep.erasure_rate;
  rep.delta_window = sys.lambda > 0.0 ? (1.0 + eps.eps_d) * (1.0 + eps.eps) * 2.0 * lni2b / sys.lambda
                                      : std::numeric_limits<double>::infinity();
  rep.asymptotic_ratio = (1.0 - bp) / lni2b;
  rep.read_rate_for_capacity = read_rate.value_or(rep.poisson_rate);
  rep.capacity = storage_capacity(rep.erasure_rate, rep.read_rate_for_capacity, sys.nodes, sys.clen);
  return rep;
}

double expected_distinct_failures(std::uint64_t nodes, std::uint64_t i) {
  if (i < 1 || i >= nodes) throw Error(Errc::domain, "expected_distinct_failures requires 1 <= i < N");
  const double N = static_cast<double>(nodes);
  double sum = 0.0;
  for (std::uint64_t j = 1; j <= i; ++j) sum += N / (N - static_cast<double>(j));
  return sum;
}

double supermartingale_tail(double n, double c, double alpha) {
  if (!(n >= 1.0) || !(c > 0.0) || !(alpha > 0.0)) throw Error(Errc::domain, "supermartingale_tail requires n >= 1, c > 0, alpha > 0");
  if (std::isinf(alpha)) return 0.0;
  return n * std::exp(-alpha * alpha / (2.0 * n * c * c));
}

double storage_capacity(double erasure_rate, double read_rate, std::uint64_t nodes, std::uint64_t clen) {
  const double total = static_cast<double>(nodes) * static_cast<double>(clen);
  if (erasure_rate == 0.0) return total;
  if (!(read_rate > 0.0)) return 0.0;
  return (1.0 - erasure_rate / (2.0 * read_rate)) * total;
}

}  // namespace lsim
