#include "lsim/cluster.hpp"

#include <algorithm>
#include <sstream>

#include "lsim/error.hpp"

namespace lsim {

namespace {

std::uint64_t add_bits(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw Error(Errc::config, "bit meter overflowed 64 bits");
  return out;
}

}  // namespace

Cluster::Cluster(const ClusterConfig& config) : cfg_(config) {
  if (cfg_.nodes == 0 || cfg_.nodes > 0xFFFFFFFFull) throw Error(Errc::config, "cluster needs 1 <= N < 2^32");
  if (cfg_.clen == 0) throw Error(Errc::config, "cluster needs clen > 0");
  if (cfg_.objects == 0) throw Error(Errc::config, "cluster needs at least one object");
  if (cfg_.codec.n >= kEmpty) throw Error(Errc::config, "cluster supports n < 65535");
  codec_ = make_codec(cfg_.backend, cfg_.codec);
  if (cfg_.codec.flen > cfg_.clen) throw Error(Errc::config, "flen exceeds node capacity");
  store_.resize(cfg_.nodes);
  slots_.assign(static_cast<std::size_t>(cfg_.objects) * cfg_.nodes, kEmpty);
  count_.assign(cfg_.nodes, 0);
  copies_.assign(static_cast<std::size_t>(cfg_.objects) * cfg_.codec.n, 0);
  distinct_.assign(cfg_.objects, 0);
  below_k_ = cfg_.objects;
  meters_.resize(cfg_.nodes);
  if (cfg_.backend == Backend::byte) truth_.resize(cfg_.objects);
}

void Cluster::check_node(NodeId node) const {
  if (node >= cfg_.nodes) throw Error(Errc::domain, "node id " + std::to_string(node) + " out of range");
}

void Cluster::check_fragment(const Fragment& f) const {
  if (f.object >= cfg_.objects) throw Error(Errc::domain, "object id " + std::to_string(f.object) + " out of range");
  if (f.efi >= cfg_.codec.n) throw Error(Errc::unknown_efi, "EFI " + std::to_string(f.efi) + " out of range");
  if (cfg_.backend == Backend::byte && (!f.payload || f.payload->size() * 8 != cfg_.codec.flen)) {
    throw Error(Errc::domain, "byte-mode fragment payload must be flen bits");
  }
}

void Cluster::add_copy(ObjectId object, Efi efi) {
  auto& c = copies_[static_cast<std::size_t>(object) * cfg_.codec.n + efi];
  if (c == 0xFF) throw Error(Errc::capacity_exceeded, "more than 255 copies of one fragment");
  if (c++ == 0) {
    if (++distinct_[object] == cfg_.codec.k) --below_k_;
  }
}

void Cluster::drop_copy(ObjectId object, Efi efi) {
  auto& c = copies_[static_cast<std::size_t>(object) * cfg_.codec.n + efi];
  if (--c == 0) {
    if (distinct_[object]-- == cfg_.codec.k) ++below_k_;
  }
}

bool Cluster::place(NodeId node, const Fragment& f) {
  check_node(node);
  check_fragment(f);
  Node& n = store_[node];
  const auto efi = static_cast<std::uint16_t>(f.efi);
  bool fresh = false;
  auto& held = slot(node, f.object);
  if (held == efi) {
    fresh = false;
  } else {
    bool in_extra = false;
    if (!n.extra.empty()) {
      auto it = n.extra.find(f.object);
      in_extra = it != n.extra.end() && std::find(it->second.begin(), it->second.end(), efi) != it->second.end();
    }
    fresh = !in_extra;
    if (fresh) {
      if ((count_[node] + 1) * cfg_.codec.flen > cfg_.clen) {
        throw Error(Errc::capacity_exceeded, "node " + std::to_string(node) + " would exceed clen storing object " +
                                                 std::to_string(f.object) + " EFI " + std::to_string(f.efi));
      }
      if (held == kEmpty) {
        held = efi;
      } else {
        n.extra[f.object].push_back(efi);
      }
      ++count_[node];
      ++changes_;
      add_copy(f.object, f.efi);
    }
  }
  if (cfg_.backend == Backend::byte) n.payload[key(f.object, f.efi)] = f.payload;
  return fresh;
}

void Cluster::log_add(std::vector<MeterRecord>& log, double time, std::uint64_t bits) {
  if (!log.empty() && log.back().time == time) {
    log.back().bits = add_bits(log.back().bits, bits);
  } else {
    log.push_back(MeterRecord{time, bits});
  }
}

void Cluster::store(NodeId node, const Fragment& fragment, double time) {
  place(node, fragment);
  const std::uint64_t b = cfg_.codec.flen;
  meters_[node].bits_written = add_bits(meters_[node].bits_written, b);
  total_written_ = add_bits(total_written_, b);
  log_add(write_log_, time, b);
}

void Cluster::preload(NodeId node, const Fragment& fragment) {
  place(node, fragment);
  preprocessing_written_ = add_bits(preprocessing_written_, cfg_.codec.flen);
}

bool Cluster::has_extra(NodeId node, ObjectId object, Efi efi) const {
  const Node& n = store_[node];
  auto it = n.extra.find(object);
  return it != n.extra.end() && std::find(it->second.begin(), it->second.end(), efi) != it->second.end();
}

std::vector<Efi> Cluster::efis_at(NodeId node, ObjectId object) const {
  std::vector<Efi> out;
  efis_at(node, object, out);
  return out;
}

void Cluster::efis_at(NodeId node, ObjectId object, std::vector<Efi>& out) const {
  check_node(node);
  out.clear();
  const Node& n = store_[node];
  if (object >= cfg_.objects) throw Error(Errc::domain, "object id " + std::to_string(object) + " out of range");
  if (slot(node, object) != kEmpty) out.push_back(slot(node, object));
  if (n.extra.empty()) return;
  if (auto it = n.extra.find(object); it != n.extra.end()) out.insert(out.end(), it->second.begin(), it->second.end());
}

Fragment Cluster::read(NodeId node, ObjectId object, Efi efi, double time) {
  if (!has(node, object, efi)) {
    throw Error(Errc::missing_fragment, "node " + std::to_string(node) + " holds no fragment (object " +
                                            std::to_string(object) + ", EFI " + std::to_string(efi) + ")");
  }
  Fragment f{object, efi, nullptr};
  if (cfg_.backend == Backend::byte) f.payload = store_[node].payload.at(key(object, efi));
  const std::uint64_t b = cfg_.codec.flen;
  InterfaceMeter& m = meters_[node];
  m.bits_read = add_bits(m.bits_read, b);
  if (cfg_.node_read_logs) log_add(m.read_log, time, b);
  total_read_ = add_bits(total_read_, b);
  log_add(read_log_, time, b);
  return f;
}

void Cluster::erase(NodeId node, ObjectId object, Efi efi) {
  if (!has(node, object, efi)) {
    throw Error(Errc::missing_fragment, "erase of a fragment node " + std::to_string(node) + " does not hold");
  }
  Node& n = store_[node];
  if (slot(node, object) == efi) {
    slot(node, object) = kEmpty;
  } else {
    auto it = n.extra.find(object);
    it->second.erase(std::find(it->second.begin(), it->second.end(), static_cast<std::uint16_t>(efi)));
    if (it->second.empty()) n.extra.erase(it);
  }
  if (cfg_.backend == Backend::byte) n.payload.erase(key(object, efi));
  --count_[node];
  ++changes_;
  drop_copy(object, efi);
}

void Cluster::fail_node(NodeId node, double /*time*/) {
  check_node(node);
  Node& n = store_[node];
  if (count_[node] == 0) return;
  ++changes_;
  for (ObjectId o = 0; o < cfg_.objects; ++o) {
    auto& held = slot(node, o);
    if (held != kEmpty) {
      drop_copy(o, held);
      held = kEmpty;
    }
  }
  for (const auto& [o, efis] : n.extra) {
    for (auto e : efis) drop_copy(o, e);
  }
  n.extra.clear();
  n.payload.clear();
  count_[node] = 0;
}

std::vector<ObjectId> Cluster::objects_below_k_list() const {
  std::vector<ObjectId> out;
  for (ObjectId o = 0; o < cfg_.objects; ++o) {
    if (distinct_[o] < cfg_.codec.k) out.push_back(o);
  }
  return out;
}

void Cluster::retain_source(const ObjectData& object) {
  if (cfg_.backend != Backend::byte) return;
  if (object.object >= cfg_.objects) throw Error(Errc::domain, "object id out of range");
  truth_[object.object] = object.content;
}

Census Cluster::census() const {
  const std::uint32_t n = cfg_.codec.n;
  std::vector<bool> seen(static_cast<std::size_t>(cfg_.objects) * n, false);
  std::vector<std::uint32_t> distinct(cfg_.objects, 0);
  // First holder of each (object, efi), for the byte-mode decode.
  std::vector<std::vector<Fragment>> frags(cfg_.backend == Backend::byte ? cfg_.objects : 0);
  auto note = [&](NodeId node, ObjectId o, Efi e) {
    const std::size_t idx = static_cast<std::size_t>(o) * n + e;
    if (seen[idx]) return;
    seen[idx] = true;
    ++distinct[o];
    if (!frags.empty()) frags[o].push_back(Fragment{o, e, store_[node].payload.at(key(o, e))});
  };
  for (ObjectId o = 0; o < cfg_.objects; ++o) {
    for (NodeId node = 0; node < cfg_.nodes; ++node) {
      if (slot(node, o) != kEmpty) note(node, o, slot(node, o));
    }
  }
  for (NodeId node = 0; node < cfg_.nodes; ++node) {
    for (const auto& [o, efis] : store_[node].extra) {
      for (auto e : efis) note(node, o, e);
    }
  }
  Census c;
  for (ObjectId o = 0; o < cfg_.objects; ++o) {
    if (distinct[o] < cfg_.codec.k) {
      c.lost.push_back(o);
      continue;
    }
    if (!frags.empty() && !truth_[o].empty()) {
      if (codec_->decode(frags[o]).content != truth_[o]) c.corrupted.push_back(o);
    }
  }
  c.recoverable = c.lost.empty() && c.corrupted.empty();
  return c;
}

MeterWindow Cluster::meter_window(double t0, double t1, double width) const {
  if (!(t0 <= t1)) throw Error(Errc::domain, "meter_window needs t0 <= t1");
  if (!(width > 0.0)) throw Error(Errc::domain, "meter_window needs a positive sliding width");
  MeterWindow w;
  auto in = [&](const MeterRecord& r) { return r.time >= t0 && r.time <= t1; };
  auto lo = std::lower_bound(read_log_.begin(), read_log_.end(), t0,
                             [](const MeterRecord& r, double t) { return r.time < t; });
  auto hi = std::upper_bound(read_log_.begin(), read_log_.end(), t1,
                             [](double t, const MeterRecord& r) { return t < r.time; });
  std::uint64_t best = 0;
  std::uint64_t running = 0;
  auto tail = lo;
  for (auto head = lo; head != hi; ++head) {
    w.bits_read += head->bits;
    // Windows start at `tail`; shrink from the left until head fits.
    running += head->bits;
    while (head->time >= tail->time + width) {
      running -= tail->bits;
      ++tail;
    }
    best = std::max(best, running);
  }
  for (const auto& r : write_log_) {
    if (in(r)) w.bits_written += r.bits;
  }
  w.avg_read_rate = t1 > t0 ? static_cast<double>(w.bits_read) / (t1 - t0) : 0.0;
  w.peak_read_rate = static_cast<double>(best) / width;
  return w;
}

std::string Cluster::snapshot() const {
  std::ostringstream out;
  out << "nodes " << cfg_.nodes << " clen " << cfg_.clen << " flen " << cfg_.codec.flen << " objects "
      << cfg_.objects << '\n';
  for (NodeId node = 0; node < cfg_.nodes; ++node) {
    out << "node " << node << " used " << used_bits(node) << " fragments " << count_[node] << '\n';
  }
  for (ObjectId o = 0; o < cfg_.objects; ++o) out << "object " << o << " distinct " << distinct_[o] << '\n';
  return out.str();
}

}  // namespace lsim
