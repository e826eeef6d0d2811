#include "lsim/wide.hpp"

#include "lsim/error.hpp"

#include <algorithm>

namespace lsim {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::domain: return "domain";
    case Errc::config: return "config";
    case Errc::capacity_exceeded: return "capacity_exceeded";
    case Errc::missing_fragment: return "missing_fragment";
    case Errc::insufficient_fragments: return "insufficient_fragments";
    case Errc::unknown_efi: return "unknown_efi";
    case Errc::invariant_violation: return "invariant_violation";
    case Errc::parse: return "parse";
    case Errc::io: return "io";
  }
  return "unknown";
}

std::string to_string(u128 value) {
  if (value == 0) return "0";
  std::string out;
  while (value != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

u128 parse_u128(std::string_view text) {
  if (text.empty()) throw Error(Errc::parse, "empty integer");
  u128 value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw Error(Errc::parse, "not a non-negative integer: '" + std::string(text) + "'");
    u128 next = 0;
    if (__builtin_mul_overflow(value, static_cast<u128>(10), &next) ||
        __builtin_add_overflow(next, static_cast<u128>(c - '0'), &next)) {
      throw Error(Errc::parse, "integer too large: '" + std::string(text) + "'");
    }
    value = next;
  }
  return value;
}

double to_double(u128 value) { return static_cast<double>(value); }

u128 checked_mul(u128 a, u128 b) {
  u128 out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(Errc::domain, "128-bit multiplication overflow");
  return out;
}

u128 checked_add(u128 a, u128 b) {
  u128 out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw Error(Errc::domain, "128-bit addition overflow");
  return out;
}

}  // namespace lsim
