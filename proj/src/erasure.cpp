#include "lsim/erasure.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "lsim/error.hpp"
#include "lsim/gf256.hpp"

namespace lsim {

const char* backend_name(Backend b) { return b == Backend::byte ? "byte" : "symbolic"; }

void CodecParams::validate() const {
  if (k < 1) throw Error(Errc::config, "codec needs k >= 1");
  if (n < k) throw Error(Errc::config, "codec needs n >= k");
  if (flen == 0) throw Error(Errc::config, "codec needs flen > 0");
}

bool decodable(std::span<const Efi> efis, std::uint32_t k, std::uint32_t n) {
  std::vector<char> seen(n, 0);
  std::uint32_t distinct = 0;
  for (Efi e : efis) {
    if (e < n && !seen[e]) {
      seen[e] = 1;
      if (++distinct >= k) return true;
    }
  }
  return false;
}

Codec::Codec(CodecParams params) : params_(params) { params_.validate(); }

void Codec::check_efi(Efi efi) const {
  if (efi >= params_.n) {
    throw Error(Errc::unknown_efi, "EFI " + std::to_string(efi) + " outside [0, " + std::to_string(params_.n) + ")");
  }
}

std::vector<const Fragment*> Codec::select(std::span<const Fragment> fragments) const {
  std::vector<const Fragment*> chosen(params_.n, nullptr);
  std::uint32_t distinct = 0;
  for (const auto& f : fragments) {
    check_efi(f.efi);
    if (f.object != fragments.front().object) {
      throw Error(Errc::domain, "fragments of different objects passed to one decode");
    }
    if (!chosen[f.efi]) {
      chosen[f.efi] = &f;
      ++distinct;
    }
  }
  if (distinct < params_.k) {
    throw Error(Errc::insufficient_fragments, "object needs " + std::to_string(params_.k) + " distinct EFIs, got " +
                                                  std::to_string(distinct));
  }
  return chosen;
}

Fragment Codec::regenerate(std::span<const Fragment> fragments, Efi target) const {
  const Efi t[1] = {target};
  return std::move(regenerate_many(fragments, t).front());
}

// ---- byte backend ----

ByteCodec::ByteCodec(CodecParams params) : Codec(params) {
  if (params_.n > kMaxFragments) throw Error(Errc::config, "byte codec supports n <= 256; use the symbolic backend");
  if (params_.flen % 8 != 0) throw Error(Errc::config, "byte codec needs flen divisible by 8");
}

std::uint8_t ByteCodec::coefficient(Efi efi, std::uint32_t source) const {
  if (efi < params_.k) return efi == source ? 1 : 0;
  // Row-scaled Cauchy: scaling keeps every square minor non-singular and
  // makes column 0 all ones, so k = 1 degenerates to replication.
  return gf256::mul(static_cast<std::uint8_t>(efi), gf256::inv(static_cast<std::uint8_t>(efi ^ source)));
}

Payload ByteCodec::encode_row(const std::vector<Payload>& sources, Efi efi) const {
  if (efi < params_.k) return sources[efi];
  auto out = std::make_shared<Bytes>(frag_bytes(), 0);
  for (std::uint32_t j = 0; j < params_.k; ++j) {
    gf256::mul_add_region(out->data(), sources[j]->data(), coefficient(efi, j), out->size());
  }
  return out;
}

std::vector<Fragment> ByteCodec::encode(const ObjectData& object, std::span<const Efi> efis) const {
  const std::size_t fb = frag_bytes();
  if (object.content.size() != fb * params_.k) throw Error(Errc::domain, "object content must be k*flen bits");
  for (Efi e : efis) check_efi(e);
  std::vector<Payload> sources(params_.k);
  for (std::uint32_t j = 0; j < params_.k; ++j) {
    sources[j] = std::make_shared<Bytes>(object.content.begin() + j * fb, object.content.begin() + (j + 1) * fb);
  }
  std::vector<Fragment> out;
  out.reserve(efis.size());
  for (Efi e : efis) out.push_back(Fragment{object.object, e, encode_row(sources, e)});
  return out;
}

std::vector<Payload> ByteCodec::recover_sources(std::span<const Fragment> fragments) const {
  const auto chosen = select(fragments);
  const std::uint32_t k = params_.k;
  const std::size_t fb = frag_bytes();
  for (const Fragment* f : chosen) {
    if (f && (!f->payload || f->payload->size() != fb)) throw Error(Errc::domain, "fragment payload must be flen bits");
  }

  std::vector<Payload> sources(k);
  std::vector<std::uint32_t> missing;
  for (std::uint32_t j = 0; j < k; ++j) {
    if (chosen[j]) {
      sources[j] = chosen[j]->payload;
    } else {
      missing.push_back(j);
    }
  }
  if (missing.empty()) return sources;

  std::vector<const Fragment*> repair;
  for (std::uint32_t e = k; e < params_.n && repair.size() < missing.size(); ++e) {
    if (chosen[e]) repair.push_back(chosen[e]);
  }
  const std::size_t m = missing.size();

  // Solve the m x m Cauchy block for the missing sources.
  std::vector<std::uint8_t> a(m * m), ainv(m * m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) a[i * m + j] = coefficient(repair[i]->efi, missing[j]);
    ainv[i * m + i] = 1;
  }
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    while (piv < m && a[piv * m + col] == 0) ++piv;
    if (piv == m) throw Error(Errc::invariant_violation, "singular decode matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < m; ++j) {
        std::swap(a[piv * m + j], a[col * m + j]);
        std::swap(ainv[piv * m + j], ainv[col * m + j]);
      }
    }
    const std::uint8_t s = gf256::inv(a[col * m + col]);
    for (std::size_t j = 0; j < m; ++j) {
      a[col * m + j] = gf256::mul(a[col * m + j], s);
      ainv[col * m + j] = gf256::mul(ainv[col * m + j], s);
    }
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint8_t f = a[i * m + col];
      if (i == col || f == 0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        a[i * m + j] ^= gf256::mul(f, a[col * m + j]);
        ainv[i * m + j] ^= gf256::mul(f, ainv[col * m + j]);
      }
    }
  }

  // y_i = repair_i minus the contribution of the known sources.
  std::vector<Bytes> y(m);
  for (std::size_t i = 0; i < m; ++i) {
    y[i] = *repair[i]->payload;
    for (std::uint32_t j = 0; j < k; ++j) {
      if (sources[j]) gf256::mul_add_region(y[i].data(), sources[j]->data(), coefficient(repair[i]->efi, j), fb);
    }
  }
  for (std::size_t b = 0; b < m; ++b) {
    auto out = std::make_shared<Bytes>(fb, 0);
    for (std::size_t i = 0; i < m; ++i) gf256::mul_add_region(out->data(), y[i].data(), ainv[b * m + i], fb);
    sources[missing[b]] = std::move(out);
  }
  return sources;
}

ObjectData ByteCodec::decode(std::span<const Fragment> fragments) const {
  const auto sources = recover_sources(fragments);
  ObjectData obj;
  obj.object = fragments.front().object;
  obj.content.reserve(frag_bytes() * params_.k);
  for (const auto& s : sources) obj.content.insert(obj.content.end(), s->begin(), s->end());
  return obj;
}

std::vector<Fragment> ByteCodec::regenerate_many(std::span<const Fragment> fragments,
                                                 std::span<const Efi> targets) const {
  for (Efi t : targets) check_efi(t);
  const auto chosen = select(fragments);
  const ObjectId object = fragments.front().object;
  std::vector<Fragment> out;
  out.reserve(targets.size());
  const bool all_present =
      std::all_of(targets.begin(), targets.end(), [&](Efi t) { return chosen[t] != nullptr; });
  if (all_present) {
    for (Efi t : targets) out.push_back(*chosen[t]);
    return out;
  }
  const auto sources = recover_sources(fragments);
  for (Efi t : targets) {
    out.push_back(Fragment{object, t, chosen[t] ? chosen[t]->payload : encode_row(sources, t)});
  }
  return out;
}

// ---- symbolic backend ----

SymbolicCodec::SymbolicCodec(CodecParams params) : Codec(params) {}

std::vector<Fragment> SymbolicCodec::encode(const ObjectData& object, std::span<const Efi> efis) const {
  std::vector<Fragment> out;
  out.reserve(efis.size());
  for (Efi e : efis) {
    check_efi(e);
    out.push_back(Fragment{object.object, e, nullptr});
  }
  return out;
}

ObjectData SymbolicCodec::decode(std::span<const Fragment> fragments) const {
  select(fragments);
  return ObjectData{fragments.front().object, {}};
}

std::vector<Fragment> SymbolicCodec::regenerate_many(std::span<const Fragment> fragments,
                                                     std::span<const Efi> targets) const {
  for (Efi t : targets) check_efi(t);
  select(fragments);
  std::vector<Fragment> out;
  out.reserve(targets.size());
  for (Efi t : targets) out.push_back(Fragment{fragments.front().object, t, nullptr});
  return out;
}

std::unique_ptr<Codec> make_codec(Backend backend, CodecParams params) {
  if (backend == Backend::byte) return std::make_unique<ByteCodec>(params);
  return std::make_unique<SymbolicCodec>(params);
}

}  // namespace lsim
