#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "lsim/erasure.hpp"
#include "lsim/failure_gen.hpp"

namespace lsim {

struct ClusterConfig {
  std::uint64_t nodes = 0;
  std::uint64_t clen = 0;      // bits per node
  std::uint32_t objects = 0;   // object ids are 0..objects-1
  CodecParams codec;           // one fragment size for every object
  Backend backend = Backend::symbolic;
  bool node_read_logs = false;  // keep a (time, bits) log per node as well
};

struct MeterRecord {
  double time = 0.0;
  std::uint64_t bits = 0;
};

struct InterfaceMeter {
  std::uint64_t bits_read = 0;
  std::uint64_t bits_written = 0;
  std::vector<MeterRecord> read_log;  // only with node_read_logs
};

struct MeterWindow {
  std::uint64_t bits_read = 0;
  std::uint64_t bits_written = 0;
  double avg_read_rate = 0.0;
  double peak_read_rate = 0.0;
};

struct Census {
  bool recoverable = true;
  std::vector<ObjectId> lost;       // fewer than k distinct EFIs stored
  std::vector<ObjectId> corrupted;  // byte backend: decodes to the wrong bytes
};

// N node stores plus interface meters. Failed nodes are zeroed, never removed.
class Cluster {
 public:
  explicit Cluster(const ClusterConfig& config);

  std::uint64_t nodes() const { return cfg_.nodes; }
  std::uint64_t clen() const { return cfg_.clen; }
  std::uint64_t flen() const { return cfg_.codec.flen; }
  std::uint32_t objects() const { return cfg_.objects; }
  const ClusterConfig& config() const { return cfg_; }
  const Codec& codec() const { return *codec_; }

  // Repair write, metered at `time`.
  void store(NodeId node, const Fragment& fragment, double time);
  // Storer write: counted in the preprocessing bucket only.
  void preload(NodeId node, const Fragment& fragment);
  // Metered read over the node interface.
  Fragment read(NodeId node, ObjectId object, Efi efi, double time);
  bool has(NodeId node, ObjectId object, Efi efi) const {
    if (node >= cfg_.nodes) check_node(node);
    if (object >= cfg_.objects || efi >= cfg_.codec.n) return false;
    return slot(node, object) == efi || (!store_[node].extra.empty() && has_extra(node, object, efi));
  }
  // Drop a fragment without traffic (the repairer discarding a moved copy).
  void erase(NodeId node, ObjectId object, Efi efi);
  void fail_node(NodeId node, double time);

  std::uint64_t used_bits(NodeId node) const { return count_.at(node) * cfg_.codec.flen; }
  std::uint64_t fragment_count(NodeId node) const { return count_.at(node); }
  std::vector<Efi> efis_at(NodeId node, ObjectId object) const;
  void efis_at(NodeId node, ObjectId object, std::vector<Efi>& out) const;
  // Bumped by every change to stored contents; reads leave it alone.
  std::uint64_t changes() const { return changes_; }

  // Incrementally maintained census.
  std::uint32_t distinct_efis(ObjectId object) const { return distinct_.at(object); }
  std::uint32_t objects_below_k() const { return below_k_; }
  bool all_decodable() const { return below_k_ == 0; }
  std::vector<ObjectId> objects_below_k_list() const;

  // Byte backend: ground truth for the bit-compare in census().
  void retain_source(const ObjectData& object);
  // Full recount from the node stores; decodes and compares in byte mode.
  Census census() const;

  const InterfaceMeter& meter(NodeId node) const { return meters_.at(node); }
  std::uint64_t total_bits_read() const { return total_read_; }
  std::uint64_t total_bits_written() const { return total_written_; }
  std::uint64_t preprocessing_bits_written() const { return preprocessing_written_; }
  const std::vector<MeterRecord>& read_log() const { return read_log_; }

  // Reads and writes in [t0, t1]; peak is the largest read total in any
  // window [s, s + width) starting at a read, divided by width.
  MeterWindow meter_window(double t0, double t1, double width) const;

  // Per-node used capacity and per-object census, one line each.
  std::string snapshot() const;

 private:
  static constexpr std::uint16_t kEmpty = 0xFFFF;
  std::uint64_t changes_ = 0;

  struct Node {
    std::unordered_map<ObjectId, std::vector<std::uint16_t>> extra;
    std::unordered_map<std::uint64_t, Payload> payload;  // byte backend
  };

  // Object-major: the holders of one object are contiguous.
  std::uint16_t& slot(NodeId node, ObjectId object) {
    return slots_[static_cast<std::size_t>(object) * cfg_.nodes + node];
  }
  std::uint16_t slot(NodeId node, ObjectId object) const {
    return slots_[static_cast<std::size_t>(object) * cfg_.nodes + node];
  }
  static std::uint64_t key(ObjectId object, Efi efi) { return (static_cast<std::uint64_t>(object) << 16) | efi; }
  void check_node(NodeId node) const;
  bool has_extra(NodeId node, ObjectId object, Efi efi) const;
  void check_fragment(const Fragment& f) const;
  // Returns true when the fragment was not already at the node.
  bool place(NodeId node, const Fragment& f);
  void add_copy(ObjectId object, Efi efi);
  void drop_copy(ObjectId object, Efi efi);
  static void log_add(std::vector<MeterRecord>& log, double time, std::uint64_t bits);

  ClusterConfig cfg_;
  std::unique_ptr<Codec> codec_;
  std::vector<Node> store_;
  std::vector<std::uint16_t> slots_;  // one EFI per (object, node)
  std::vector<std::uint64_t> count_;
  std::vector<std::uint8_t> copies_;  // objects x n multiplicity
  std::vector<std::uint32_t> distinct_;
  std::uint32_t below_k_ = 0;
  std::vector<InterfaceMeter> meters_;
  std::vector<MeterRecord> read_log_;
  std::vector<MeterRecord> write_log_;
  std::uint64_t total_read_ = 0;
  std::uint64_t total_written_ = 0;
  std::uint64_t preprocessing_written_ = 0;
  std::vector<Bytes> truth_;
};

}  // namespace lsim
