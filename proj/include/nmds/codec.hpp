// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace nmds {

using BigCount = boost::multiprecision::cpp_int;

enum class ErrorKind {
  InvalidParameter,
  LengthMismatch,
  Undecodable,
  EnumerationBound,
  Unrecoverable,
  MissingPacket,
};

class CodeError : public std::runtime_error {
 public:
  CodeError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Geometry of the (2k, k) code: k partitions, each a systematic/parity pair.
class CodeParams {
 public:
  static constexpr int kMinK = 2;
  // partition index is stored as a 16-bit field in shard headers
  static constexpr int kMaxK = 0xFFFF;

  int k() const noexcept { return k_; }
  int n() const noexcept { return 2 * k_; }

  friend bool operator==(const CodeParams&, const CodeParams&) = default;

 private:
  explicit CodeParams(int k) : k_(k) {}
  friend CodeParams make_params(int k);
  int k_;
};

/// Throws CodeError(InvalidParameter) for k < 2 or k > kMaxK.
CodeParams make_params(int k);

enum class Role : std::uint8_t { Systematic = 0, Parity = 1 };

struct NodeId {
  int partition = 0;
  Role role = Role::Systematic;

  static NodeId systematic(int partition) { return {partition, Role::Systematic}; }
  static NodeId parity(int partition) { return {partition, Role::Parity}; }
  static NodeId from_index(int index) {
    return {index / 2, static_cast<Role>(index % 2)};
  }

  /// Dense index in canonical order: S1=0, P1=1, S2=2, ...
  int index() const noexcept { return 2 * partition + static_cast<int>(role); }
  bool is_parity() const noexcept { return role == Role::Parity; }
  NodeId related() const noexcept {
    return {partition, is_parity() ? Role::Systematic : Role::Parity};
  }
  bool valid_for(const CodeParams& p) const noexcept {
    return partition >= 0 && partition < p.k() &&
           (role == Role::Systematic || role == Role::Parity);
  }

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// One-based label as printed to users: "S1", "P3".
std::string to_string(NodeId id);
/// Parses "S1".."Sk" / "P1".."Pk" (case-insensitive role letter).
std::optional<NodeId> parse_node(std::string_view label);
std::string to_string(std::span<const NodeId> ids);

std::vector<NodeId> all_nodes(const CodeParams& params);

/// Fixed-length byte payload held by one node.
class Packet {
 public:
  Packet() = default;
  explicit Packet(std::size_t length) : bytes_(length, 0) {}
  explicit Packet(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {}
  Packet(std::initializer_list<std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t size() const noexcept { return bytes_.size(); }
  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }
  std::span<std::uint8_t> mutable_bytes() noexcept { return bytes_; }
  const std::vector<std::uint8_t>& vec() const noexcept { return bytes_; }

  bool is_zero() const noexcept;
  /// this ^= other; throws CodeError(LengthMismatch) on unequal lengths.
  Packet& operator^=(const Packet& other);

  friend bool operator==(const Packet&, const Packet&) = default;

 private:
  std::vector<std::uint8_t> bytes_;
};

Packet xor_packets(const Packet& a, const Packet& b);

/// A full codeword: 2k packets of one fragment size, indexed by NodeId.
class Stripe {
 public:
  Stripe(CodeParams params, std::vector<Packet> packets);

  const CodeParams& params() const noexcept { return params_; }
  std::size_t fragment_size() const noexcept { return packets_.front().size(); }
  const Packet& packet(NodeId id) const { return packets_.at(id.index()); }
  /// Packets in canonical NodeId order.
  const std::vector<Packet>& packets() const noexcept { return packets_; }
  std::vector<Packet> data_fragments() const;

 private:
  CodeParams params_;
  std::vector<Packet> packets_;
};

/// p_i = XOR of d_j over j != i; systematic packets stored verbatim.
Stripe encode_stripe(const CodeParams& params, std::span<const Packet> fragments);

struct StrategyI {
  int doubled_partition;
  int excluded_partition;
  friend bool operator==(const StrategyI&, const StrategyI&) = default;
};

struct StrategyII {
  int m;  // parity nodes used = 2m
  friend bool operator==(const StrategyII&, const StrategyII&) = default;
};

enum class UndecodableReason { MultipleDoubledPartitions, OddParityCountFullCover };

struct Undecodable {
  UndecodableReason reason;
  friend bool operator==(const Undecodable&, const Undecodable&) = default;
};

class RecoveryClassification {
 public:
  RecoveryClassification(StrategyI s) : tag_(Tag::I), i_(s) {}
  RecoveryClassification(StrategyII s) : tag_(Tag::II), ii_(s) {}
  RecoveryClassification(Undecodable u) : tag_(Tag::None), none_(u) {}

  bool decodable() const noexcept { return tag_ != Tag::None; }
  bool is_strategy_i() const noexcept { return tag_ == Tag::I; }
  bool is_strategy_ii() const noexcept { return tag_ == Tag::II; }
  StrategyI strategy_i() const {
    require(Tag::I);
    return i_;
  }
  StrategyII strategy_ii() const {
    require(Tag::II);
    return ii_;
  }
  Undecodable undecodable() const {
    require(Tag::None);
    return none_;
  }

  std::string describe() const;

  friend bool operator==(const RecoveryClassification& a,
                         const RecoveryClassification& b) {
    if (a.tag_ != b.tag_) return false;
    switch (a.tag_) {
      case Tag::I: return a.i_ == b.i_;
      case Tag::II: return a.ii_ == b.ii_;
      case Tag::None: return a.none_ == b.none_;
    }
    return false;
  }

 private:
  enum class Tag { I, II, None };
  void require(Tag t) const {
    if (tag_ != t) throw std::logic_error("RecoveryClassification: wrong alternative");
  }
  Tag tag_;
  StrategyI i_{};
  StrategyII ii_{};
  Undecodable none_{};
};

std::string to_string(UndecodableReason reason);

/// Structural classification of a k-subset of nodes.
RecoveryClassification classify_subset(const CodeParams& params,
                                       std::span<const NodeId> subset);

/// Rank test over GF(2) in the d_1..d_k basis, independent of classify_subset.
bool is_decodable_oracle(const CodeParams& params, std::span<const NodeId> subset);

struct Share {
  NodeId node;
  Packet packet;
};

/// Recovers d_1..d_k from exactly k shares using the structured XOR schedule.
std::vector<Packet> decode(const CodeParams& params, std::span<const Share> shares);

struct RecoveryCounts {
  BigCount strategy_i;
  BigCount strategy_ii;
  BigCount total;
};

RecoveryCounts count_recovery_sets(const CodeParams& params);

struct RecoverySet {
  std::vector<NodeId> nodes;  // canonical order
  RecoveryClassification classification;
};

/// Sets ordered by parity count, then lexicographically by node list.
bool canonical_set_less(std::span<const NodeId> a, std::span<const NodeId> b);

inline constexpr int kDefaultEnumerationBound = 12;

std::vector<RecoverySet> enumerate_recovery_sets(
    const CodeParams& params, int max_k = kDefaultEnumerationBound);

/// Picks a decodable k-subset out of the available nodes, preferring the
/// fewest parity packets. Empty when the survivors cannot recover the data.
std::optional<std::vector<NodeId>> select_recovery_set(const CodeParams& params,
                                                       std::span<const NodeId> available);

}  // namespace nmds
