#pragma once

#include <cstddef>
#include <cstdint>

namespace lsim::gf256 {

// GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11D).
std::uint8_t mul(std::uint8_t a, std::uint8_t b);
std::uint8_t inv(std::uint8_t a);  // a != 0

// dst[i] ^= c * src[i]
void mul_add_region(std::uint8_t* dst, const std::uint8_t* src, std::uint8_t c, std::size_t len);

// Name of the region kernel picked at startup ("avx2", "ssse3" or "scalar").
const char* region_kernel();

}  // namespace lsim::gf256
