#pragma once

#include <array>
#include <cstdint>

namespace lsim {

// Philox4x32-10 (Salmon et al., Random123). Counter-based: the output block
// for (key, counter) is a pure function, so a stream is reproducible on any
// platform from (seed, stream id) alone.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Sequential view over a Philox stream. The key is the 64-bit seed; the
// counter's upper half is the stream id, the lower half a block index.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream_id);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open0();
  // Uniform integer in [0, bound); bound > 0. Unbiased (rejection).
  std::uint64_t below(std::uint64_t bound);
  double exponential(double rate);
  // Trials up to and including the first success; p in (0, 1].
  std::uint64_t geometric(double p);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace lsim
