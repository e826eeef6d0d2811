#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace lsim {

using ObjectId = std::uint32_t;
using Efi = std::uint32_t;

using Bytes = std::vector<std::uint8_t>;
// Immutable fragment payload. Shared so that a read hands the repairer the
// bytes without copying and a later failure cannot pull them back.
using Payload = std::shared_ptr<const Bytes>;

enum class Backend { byte, symbolic };

const char* backend_name(Backend b);

struct CodecParams {
  std::uint32_t n = 0;     // total fragments
  std::uint32_t k = 0;     // source fragments
  std::uint64_t flen = 0;  // fragment size, bits

  std::uint32_t r() const { return n - k; }
  void validate() const;
};

struct Fragment {
  ObjectId object = 0;
  Efi efi = 0;
  Payload payload;  // null for the symbolic backend
};

struct ObjectData {
  ObjectId object = 0;
  Bytes content;  // k*flen/8 bytes; empty for the symbolic backend
};

// True when the EFIs contain at least k distinct values below n.
bool decodable(std::span<const Efi> efis, std::uint32_t k, std::uint32_t n);

class Codec {
 public:
  explicit Codec(CodecParams params);
  virtual ~Codec() = default;

  virtual Backend backend() const = 0;
  const CodecParams& params() const { return params_; }

  // One fragment per requested EFI; EFIs below k are verbatim slices.
  virtual std::vector<Fragment> encode(const ObjectData& object, std::span<const Efi> efis) const = 0;
  // Needs k distinct EFIs of one object; extra fragments are ignored.
  virtual ObjectData decode(std::span<const Fragment> fragments) const = 0;
  // encode(decode(fragments), targets) without materialising the object
  // when the byte backend can avoid it.
  virtual std::vector<Fragment> regenerate_many(std::span<const Fragment> fragments,
                                                std::span<const Efi> targets) const = 0;
  Fragment regenerate(std::span<const Fragment> fragments, Efi target) const;

 protected:
  void check_efi(Efi efi) const;
  // Distinct in-range EFIs, first occurrence kept; throws when fewer than k.
  std::vector<const Fragment*> select(std::span<const Fragment> fragments) const;

  CodecParams params_;
};

// Systematic MDS code over GF(256): identity rows for EFI < k, Cauchy rows
// e/(e xor j) for EFI e >= k. Requires n <= 256 and flen a multiple of 8.
class ByteCodec final : public Codec {
 public:
  static constexpr std::uint32_t kMaxFragments = 256;

  explicit ByteCodec(CodecParams params);
  Backend backend() const override { return Backend::byte; }
  std::vector<Fragment> encode(const ObjectData& object, std::span<const Efi> efis) const override;
  ObjectData decode(std::span<const Fragment> fragments) const override;
  std::vector<Fragment> regenerate_many(std::span<const Fragment> fragments,
                                        std::span<const Efi> targets) const override;

  std::uint8_t coefficient(Efi efi, std::uint32_t source) const;

 private:
  std::size_t frag_bytes() const { return static_cast<std::size_t>(params_.flen / 8); }
  // The k source payloads recovered from `fragments`.
  std::vector<Payload> recover_sources(std::span<const Fragment> fragments) const;
  Payload encode_row(const std::vector<Payload>& sources, Efi efi) const;
};

// Tracks only which EFIs exist. Decodability is the k-distinct count.
class SymbolicCodec final : public Codec {
 public:
  explicit SymbolicCodec(CodecParams params);
  Backend backend() const override { return Backend::symbolic; }
  std::vector<Fragment> encode(const ObjectData& object, std::span<const Efi> efis) const override;
  ObjectData decode(std::span<const Fragment> fragments) const override;
  std::vector<Fragment> regenerate_many(std::span<const Fragment> fragments,
                                        std::span<const Efi> targets) const override;
};

std::unique_ptr<Codec> make_codec(Backend backend, CodecParams params);

}  // namespace lsim
