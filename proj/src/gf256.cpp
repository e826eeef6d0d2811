#include "lsim/gf256.hpp"

#include <array>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define LSIM_X86 1
#endif

namespace lsim::gf256 {

namespace {

struct Tables {
  std::array<std::uint8_t, 512> exp{};
  std::array<std::uint8_t, 256> log{};
  std::array<std::array<std::uint8_t, 256>, 256> mul{};
  Tables() {
    unsigned x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<std::uint8_t>(x);
      log[x] = static_cast<std::uint8_t>(i);
      x <<= 1;
      if (x & 0x100) x ^= 0x11D;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
    for (int a = 1; a < 256; ++a) {
      for (int b = 1; b < 256; ++b) mul[a][b] = exp[log[a] + log[b]];
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

void region_scalar(std::uint8_t* dst, const std::uint8_t* src, std::uint8_t c, std::size_t len) {
  const auto& row = tables().mul[c];
  for (std::size_t i = 0; i < len; ++i) dst[i] ^= row[src[i]];
}

#ifdef LSIM_X86
// Split-nibble multiply: c*x = lo[x & 15] ^ hi[x >> 4].
__attribute__((target("ssse3"))) void region_ssse3(std::uint8_t* dst, const std::uint8_t* src, std::uint8_t c,
                                                   std::size_t len) {
  alignas(16) std::uint8_t lo[16], hi[16];
  const auto& row = tables().mul[c];
  for (int i = 0; i < 16; ++i) {
    lo[i] = row[i];
    hi[i] = row[i << 4];
  }
  const __m128i tlo = _mm_load_si128(reinterpret_cast<const __m128i*>(lo));
  const __m128i thi = _mm_load_si128(reinterpret_cast<const __m128i*>(hi));
  const __m128i mask = _mm_set1_epi8(0x0F);
  std::size_t i = 0;
  for (; i + 16 <= len; i += 16) {
    __m128i s = _mm_loadu_si128(reinterpret_cast<const __m128i*>(src + i));
    __m128i d = _mm_loadu_si128(reinterpret_cast<const __m128i*>(dst + i));
    __m128i l = _mm_shuffle_epi8(tlo, _mm_and_si128(s, mask));
    __m128i h = _mm_shuffle_epi8(thi, _mm_and_si128(_mm_srli_epi64(s, 4), mask));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(dst + i), _mm_xor_si128(d, _mm_xor_si128(l, h)));
  }
  region_scalar(dst + i, src + i, c, len - i);
}

__attribute__((target("avx2"))) void region_avx2(std::uint8_t* dst, const std::uint8_t* src, std::uint8_t c,
                                                 std::size_t len) {
  alignas(16) std::uint8_t lo[16], hi[16];
  const auto& row = tables().mul[c];
  for (int i = 0; i < 16; ++i) {
    lo[i] = row[i];
    hi[i] = row[i << 4];
  }
  const __m256i tlo = _mm256_broadcastsi128_si256(_mm_load_si128(reinterpret_cast<const __m128i*>(lo)));
  const __m256i thi = _mm256_broadcastsi128_si256(_mm_load_si128(reinterpret_cast<const __m128i*>(hi)));
  const __m256i mask = _mm256_set1_epi8(0x0F);
  std::size_t i = 0;
  for (; i + 32 <= len; i += 32) {
    __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
    __m256i l = _mm256_shuffle_epi8(tlo, _mm256_and_si256(s, mask));
    __m256i h = _mm256_shuffle_epi8(thi, _mm256_and_si256(_mm256_srli_epi64(s, 4), mask));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_xor_si256(d, _mm256_xor_si256(l, h)));
  }
  region_scalar(dst + i, src + i, c, len - i);
}
#endif

using RegionFn = void (*)(std::uint8_t*, const std::uint8_t*, std::uint8_t, std::size_t);

struct Kernel {
  RegionFn fn = region_scalar;
  const char* name = "scalar";
  Kernel() {
#ifdef LSIM_X86
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2")) {
      fn = region_avx2;
      name = "avx2";
    } else if (__builtin_cpu_supports("ssse3")) {
      fn = region_ssse3;
      name = "ssse3";
    }
#endif
  }
};

const Kernel& kernel() {
  static const Kernel k;
  return k;
}

}  // namespace

std::uint8_t mul(std::uint8_t a, std::uint8_t b) { return tables().mul[a][b]; }

std::uint8_t inv(std::uint8_t a) {
  const auto& t = tables();
  return t.exp[255 - t.log[a]];
}

void mul_add_region(std::uint8_t* dst, const std::uint8_t* src, std::uint8_t c, std::size_t len) {
  if (c == 0 || len == 0) return;
  if (c == 1) {
    for (std::size_t i = 0; i < len; ++i) dst[i] ^= src[i];
    return;
  }
  kernel().fn(dst, src, c, len);
}

const char* region_kernel() { return kernel().name; }

}  // namespace lsim::gf256
