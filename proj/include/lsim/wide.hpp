#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lsim {

// Bit quantities such as xlen = N*clen overflow 64 bits at practical scale
// (1e5 nodes of 1e16 bits), so whole-system sizes use 128-bit integers.
using u128 = unsigned __int128;

std::string to_string(u128 value);

// Parses a non-negative decimal integer; throws Error(parse) on bad input or overflow.
u128 parse_u128(std::string_view text);

double to_double(u128 value);

u128 checked_mul(u128 a, u128 b);
u128 checked_add(u128 a, u128 b);

}  // namespace lsim
