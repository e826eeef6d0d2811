#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "lsim/erasure.hpp"
#include "lsim/error.hpp"
#include "lsim/gf256.hpp"
#include "lsim/rng.hpp"

using namespace lsim;

namespace {

ObjectData random_object(ObjectId id, std::size_t bytes, Rng& rng) {
  ObjectData o{id, Bytes(bytes)};
  for (auto& b : o.content) b = static_cast<std::uint8_t>(rng.next_u32());
  return o;
}

std::vector<Efi> all_efis(std::uint32_t n) {
  std::vector<Efi> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

}  // namespace

TEST_CASE("field arithmetic") {
  for (int a = 1; a < 256; ++a) {
    CHECK(gf256::mul(static_cast<std::uint8_t>(a), gf256::inv(static_cast<std::uint8_t>(a))) == 1);
  }
  CHECK(gf256::mul(0x02, 0x80) == 0x1D);
  Rng rng(3, 0);
  for (std::size_t len : {0u, 1u, 15u, 16u, 31u, 32u, 33u, 100u, 1000u}) {
    Bytes src(len), dst(len), ref(len);
    for (auto& b : src) b = static_cast<std::uint8_t>(rng.next_u32());
    for (auto& b : dst) b = static_cast<std::uint8_t>(rng.next_u32());
    const auto c = static_cast<std::uint8_t>(rng.next_u32() | 2);
    for (std::size_t i = 0; i < len; ++i) ref[i] = dst[i] ^ gf256::mul(c, src[i]);
    gf256::mul_add_region(dst.data(), src.data(), c, len);
    CHECK(dst == ref);
  }
}

TEST_CASE("replication code") {
  ByteCodec codec({3, 1, 64});
  Rng rng(1, 0);
  auto obj = random_object(0, 8, rng);
  for (const auto& f : codec.encode(obj, all_efis(3))) CHECK(*f.payload == obj.content);
}

TEST_CASE("systematic and round trip") {
  ByteCodec codec({6, 4, 64});
  Rng rng(2, 0);
  auto obj = random_object(5, 32, rng);
  auto frags = codec.encode(obj, all_efis(6));
  for (std::uint32_t j = 0; j < 4; ++j) {
    CHECK(Bytes(obj.content.begin() + j * 8, obj.content.begin() + (j + 1) * 8) == *frags[j].payload);
  }
  std::vector<Fragment> pick{frags[1], frags[3], frags[4], frags[5]};
  CHECK(codec.decode(pick).content == obj.content);
  CHECK(codec.decode(pick).object == 5);
  CHECK(codec.encode(obj, all_efis(6))[5].payload->data()[0] == frags[5].payload->data()[0]);
  CHECK_THROWS_AS(codec.encode(obj, std::vector<Efi>{6}), Error);
}

TEST_CASE("MDS exhaustive for n=12, k=8") {
  ByteCodec codec({12, 8, 8 * 24});
  Rng rng(5, 0);
  auto obj = random_object(0, 8 * 24, rng);
  auto frags = codec.encode(obj, all_efis(12));
  int subsets = 0;
  for (unsigned mask = 0; mask < (1u << 12); ++mask) {
    if (__builtin_popcount(mask) != 8) continue;
    std::vector<Fragment> pick;
    for (unsigned e = 0; e < 12; ++e) {
      if (mask & (1u << e)) pick.push_back(frags[e]);
    }
    REQUIRE(codec.decode(pick).content == obj.content);
    ++subsets;
  }
  CHECK(subsets == 495);
}

TEST_CASE("MDS randomized for larger codes") {
  Rng rng(6, 0);
  ByteCodec codec({32, 20, 8 * 16});
  auto obj = random_object(0, 20 * 16, rng);
  auto frags = codec.encode(obj, all_efis(32));
  for (int t = 0; t < 2000; ++t) {
    std::vector<Fragment> pool = frags;
    for (std::size_t i = 0; i < 20; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    pool.resize(20);
    REQUIRE(codec.decode(pool).content == obj.content);
  }
}

TEST_CASE("too few fragments") {
  ByteCodec codec({12, 8, 64});
  Rng rng(7, 0);
  auto obj = random_object(0, 64, rng);
  auto frags = codec.encode(obj, all_efis(12));
  std::vector<Fragment> seven(frags.begin() + 2, frags.begin() + 9);
  try {
    codec.decode(seven);
    FAIL("decode accepted k-1 fragments");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::insufficient_fragments);
  }
  // Duplicates do not count twice.
  seven.push_back(seven.front());
  CHECK_THROWS_AS(codec.decode(seven), Error);
}

TEST_CASE("regenerate") {
  ByteCodec codec({10, 6, 80});
  Rng rng(8, 0);
  auto obj = random_object(2, 60, rng);
  auto frags = codec.encode(obj, all_efis(10));
  std::vector<Fragment> some{frags[0], frags[2], frags[3], frags[7], frags[8], frags[9]};
  CHECK(*codec.regenerate(some, 7).payload == *frags[7].payload);
  CHECK(*codec.regenerate(some, 1).payload == *frags[1].payload);
  auto many = codec.regenerate_many(some, std::vector<Efi>{1, 4, 5, 6});
  CHECK(*many[0].payload == *frags[1].payload);
  CHECK(*many[1].payload == *frags[4].payload);
  CHECK(*many[2].payload == *frags[5].payload);
  CHECK(*many[3].payload == *frags[6].payload);

  ByteCodec c2({8, 4, 64});
  auto o2 = random_object(0, 32, rng);
  auto src = c2.encode(o2, std::vector<Efi>{0, 1, 2, 3});
  std::vector<Fragment> next{src[1], src[2], src[3], c2.regenerate(src, 4)};
  CHECK(c2.decode(next).content == o2.content);
}

TEST_CASE("symbolic backend") {
  SymbolicCodec codec({12, 8, 1000});
  ObjectData marker{3, {}};
  auto frags = codec.encode(marker, all_efis(12));
  CHECK(frags.size() == 12);
  CHECK(frags[4].payload == nullptr);
  std::vector<Fragment> seven(frags.begin(), frags.begin() + 7);
  CHECK_THROWS_AS(codec.regenerate(seven, 11), Error);
  seven.push_back(frags[11]);
  CHECK(codec.regenerate(seven, 10).efi == 10);
}

TEST_CASE("byte and symbolic agree on every fragment multiset") {
  ByteCodec byte({7, 4, 16});
  SymbolicCodec sym({7, 4, 16});
  Rng rng(9, 0);
  auto obj = random_object(0, 8, rng);
  auto frags = byte.encode(obj, all_efis(7));
  for (int t = 0; t < 3000; ++t) {
    std::vector<Fragment> ms;
    const auto size = rng.below(9);
    for (std::uint64_t i = 0; i < size; ++i) ms.push_back(frags[rng.below(7)]);
    std::vector<Fragment> bare = ms;
    for (auto& f : bare) f.payload = nullptr;
    bool byte_ok = true, sym_ok = true;
    Bytes decoded;
    try {
      decoded = byte.decode(ms).content;
    } catch (const Error&) {
      byte_ok = false;
    }
    if (byte_ok) CHECK(decoded == obj.content);
    try {
      sym.decode(bare);
    } catch (const Error&) {
      sym_ok = false;
    }
    std::vector<Efi> efis;
    for (const auto& f : ms) efis.push_back(f.efi);
    CHECK(byte_ok == sym_ok);
    CHECK(byte_ok == decodable(efis, 4, 7));
  }
}

TEST_CASE("codec validation") {
  CHECK_THROWS_AS(ByteCodec({300, 10, 8}), Error);
  CHECK_THROWS_AS(ByteCodec({10, 5, 12}), Error);
  CHECK_THROWS_AS(SymbolicCodec({4, 5, 8}), Error);
  CHECK_THROWS_AS(SymbolicCodec({4, 0, 8}), Error);
  CHECK_NOTHROW(SymbolicCodec({1300, 1000, 8}));
  CHECK(make_codec(Backend::byte, {4, 2, 8})->backend() == Backend::byte);
}
