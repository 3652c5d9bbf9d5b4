// SPDX-License-Identifier: Apache-2.0

#include "nmds/codec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>

#include "nmds/gf2.hpp"
#include "nmds/kernels.hpp"

namespace nmds {

CodeParams make_params(int k) {
  if (k < CodeParams::kMinK)
    throw CodeError(ErrorKind::InvalidParameter,
                    "k must be at least 2 (got " + std::to_string(k) + ")");
  if (k > CodeParams::kMaxK)
    throw CodeError(ErrorKind::InvalidParameter,
                    "k must be at most 65535 (got " + std::to_string(k) + ")");
  return CodeParams(k);
}

std::string to_string(NodeId id) {
  return (id.is_parity() ? "P" : "S") + std::to_string(id.partition + 1);
}

std::string to_string(std::span<const NodeId> ids) {
  std::string out = "{";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += to_string(ids[i]);
  }
  return out + "}";
}

std::optional<NodeId> parse_node(std::string_view label) {
  if (label.size() < 2) return std::nullopt;
  const char r = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
  if (r != 'S' && r != 'P') return std::nullopt;
  int one_based = 0;
  const auto* first = label.data() + 1;
  const auto* last = label.data() + label.size();
  auto [ptr, ec] = std::from_chars(first, last, one_based);
  if (ec != std::errc{} || ptr != last || one_based < 1) return std::nullopt;
  return NodeId{one_based - 1, r == 'S' ? Role::Systematic : Role::Parity};
}

std::vector<NodeId> all_nodes(const CodeParams& params) {
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(params.n()));
  for (int i = 0; i < params.n(); ++i) out.push_back(NodeId::from_index(i));
  return out;
}

bool Packet::is_zero() const noexcept {
  return std::all_of(bytes_.begin(), bytes_.end(), [](std::uint8_t b) { return b == 0; });
}

Packet& Packet::operator^=(const Packet& other) {
  if (other.size() != size())
    throw CodeError(ErrorKind::LengthMismatch,
                    "packet length mismatch: " + std::to_string(size()) + " vs " +
                        std::to_string(other.size()));
  kernels::xor_into(bytes_, other.bytes());
  return *this;
}

Packet xor_packets(const Packet& a, const Packet& b) {
  Packet out = a;
  out ^= b;
  return out;
}

Stripe::Stripe(CodeParams params, std::vector<Packet> packets)
    : params_(params), packets_(std::move(packets)) {
  if (packets_.size() != static_cast<std::size_t>(params_.n()))
    throw CodeError(ErrorKind::InvalidParameter, "stripe needs exactly 2k packets");
  if (packets_.front().size() == 0)
    throw CodeError(ErrorKind::LengthMismatch, "packets must be at least one byte");
  for (const auto& p : packets_)
    if (p.size() != packets_.front().size())
      throw CodeError(ErrorKind::LengthMismatch, "stripe packets differ in length");
}

std::vector<Packet> Stripe::data_fragments() const {
  std::vector<Packet> out;
  out.reserve(static_cast<std::size_t>(params_.k()));
  for (int i = 0; i < params_.k(); ++i) out.push_back(packet(NodeId::systematic(i)));
  return out;
}

Stripe encode_stripe(const CodeParams& params, std::span<const Packet> fragments) {
  const auto k = static_cast<std::size_t>(params.k());
  if (fragments.size() != k)
    throw CodeError(ErrorKind::InvalidParameter,
                    "expected " + std::to_string(k) + " fragments, got " +
                        std::to_string(fragments.size()));
  const std::size_t len = fragments.front().size();
  if (len == 0) throw CodeError(ErrorKind::LengthMismatch, "fragments must be non-empty");
  for (const auto& f : fragments)
    if (f.size() != len)
      throw CodeError(ErrorKind::LengthMismatch, "fragments differ in length");

  // p_i = sum ^ d_i, where sum is the XOR of every fragment
  Packet sum(len);
  for (const auto& f : fragments) sum ^= f;

  std::vector<Packet> packets;
  packets.reserve(2 * k);
  for (std::size_t i = 0; i < k; ++i) {
    packets.push_back(fragments[i]);
    packets.push_back(xor_packets(sum, fragments[i]));
  }
  return Stripe(params, std::move(packets));
}

std::string to_string(UndecodableReason reason) {
  switch (reason) {
    case UndecodableReason::MultipleDoubledPartitions: return "multiple-doubled-partitions";
    case UndecodableReason::OddParityCountFullCover: return "odd-parity-count-full-cover";
  }
  return "unknown";
}

std::string RecoveryClassification::describe() const {
  switch (tag_) {
    case Tag::I:
      return "strategy-i(doubled=" + std::to_string(i_.doubled_partition + 1) +
             ", excluded=" + std::to_string(i_.excluded_partition + 1) + ")";
    case Tag::II: return "strategy-ii(m=" + std::to_string(ii_.m) + ")";
    case Tag::None: return "undecodable(" + to_string(none_.reason) + ")";
  }
  return "unknown";
}

namespace {

void check_subset(const CodeParams& params, std::span<const NodeId> subset) {
  if (subset.size() != static_cast<std::size_t>(params.k()))
    throw CodeError(ErrorKind::InvalidParameter,
                    "subset must hold exactly k=" + std::to_string(params.k()) +
                        " nodes, got " + std::to_string(subset.size()));
  std::vector<bool> seen(static_cast<std::size_t>(params.n()), false);
  for (auto id : subset) {
    if (!id.valid_for(params))
      throw CodeError(ErrorKind::InvalidParameter, "node id out of range");
    if (seen[static_cast<std::size_t>(id.index())])
      throw CodeError(ErrorKind::InvalidParameter, "duplicate node " + to_string(id));
    seen[static_cast<std::size_t>(id.index())] = true;
  }
}

// Per-partition occupancy: bit 0 = systematic present, bit 1 = parity present.
std::vector<std::uint8_t> occupancy(const CodeParams& params, std::span<const NodeId> nodes) {
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(params.k()), 0);
  for (auto id : nodes)
    occ[static_cast<std::size_t>(id.partition)] |= id.is_parity() ? 2 : 1;
  return occ;
}

}  // namespace

RecoveryClassification classify_subset(const CodeParams& params,
                                       std::span<const NodeId> subset) {
  check_subset(params, subset);
  const auto occ = occupancy(params, subset);
  int doubled = -1;
  int doubled_count = 0;
  int excluded = -1;
  for (int i = 0; i < params.k(); ++i) {
    const auto o = occ[static_cast<std::size_t>(i)];
    if (o == 3) {
      ++doubled_count;
      if (doubled < 0) doubled = i;
    } else if (o == 0 && excluded < 0) {
      excluded = i;
    }
  }
  if (doubled_count > 1) return Undecodable{UndecodableReason::MultipleDoubledPartitions};
  // k nodes and one doubled partition leave exactly one partition empty
  if (doubled_count == 1) return StrategyI{doubled, excluded};

  const auto parities = std::count_if(subset.begin(), subset.end(),
                                      [](NodeId id) { return id.is_parity(); });
  if (parities % 2 != 0) return Undecodable{UndecodableReason::OddParityCountFullCover};
  return StrategyII{static_cast<int>(parities / 2)};
}

bool is_decodable_oracle(const CodeParams& params, std::span<const NodeId> subset) {
  check_subset(params, subset);
  std::vector<gf2::Vector> rows;
  rows.reserve(subset.size());
  for (auto id : subset) rows.push_back(gf2::node_row(params, id));
  return gf2::rank(rows) == static_cast<std::size_t>(params.k());
}

std::vector<Packet> decode(const CodeParams& params, std::span<const Share> shares) {
  std::vector<NodeId> ids;
  ids.reserve(shares.size());
  for (const auto& s : shares) ids.push_back(s.node);
  const auto cls = classify_subset(params, ids);
  if (!cls.decodable())
    throw CodeError(ErrorKind::Undecodable,
                    "cannot decode from " + to_string(ids) + ": " +
                        to_string(cls.undecodable().reason));

  const std::size_t len = shares.front().packet.size();
  for (const auto& s : shares)
    if (s.packet.size() != len)
      throw CodeError(ErrorKind::LengthMismatch, "shares differ in length");

  const auto k = static_cast<std::size_t>(params.k());
  std::vector<std::optional<Packet>> data(k);
  Packet sum(len);

  if (cls.is_strategy_i()) {
    const auto [doubled, excluded] = cls.strategy_i();
    for (const auto& s : shares)
      if (s.node.partition == doubled) sum ^= s.packet;
    for (const auto& s : shares) {
      if (s.node.partition == doubled) continue;
      data[static_cast<std::size_t>(s.node.partition)] =
          s.node.is_parity() ? xor_packets(sum, s.packet) : s.packet;
    }
    const auto doubled_idx = static_cast<std::size_t>(doubled);
    for (const auto& s : shares)
      if (s.node == NodeId::systematic(doubled)) data[doubled_idx] = s.packet;
    Packet rest = sum;
    for (std::size_t j = 0; j < k; ++j)
      if (data[j]) rest ^= *data[j];
    data[static_cast<std::size_t>(excluded)] = std::move(rest);
  } else {
    for (const auto& s : shares) sum ^= s.packet;
    for (const auto& s : shares) {
      data[static_cast<std::size_t>(s.node.partition)] =
          s.node.is_parity() ? xor_packets(sum, s.packet) : s.packet;
    }
  }

  std::vector<Packet> out;
  out.reserve(k);
  for (auto& d : data) out.push_back(std::move(*d));
  return out;
}

RecoveryCounts count_recovery_sets(const CodeParams& params) {
  const BigCount k = params.k();
  const BigCount pow_k2 = BigCount(1) << (params.k() - 2);
  RecoveryCounts c;
  c.strategy_i = k * (k - 1) * pow_k2;
  c.strategy_ii = pow_k2 * 2;
  c.total = pow_k2 * (k * k - k + 2);
  return c;
}

bool canonical_set_less(std::span<const NodeId> a, std::span<const NodeId> b) {
  auto parity_count = [](std::span<const NodeId> s) {
    return std::count_if(s.begin(), s.end(), [](NodeId id) { return id.is_parity(); });
  };
  const auto pa = parity_count(a);
  const auto pb = parity_count(b);
  if (pa != pb) return pa < pb;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<RecoverySet> enumerate_recovery_sets(const CodeParams& params, int max_k) {
  if (params.k() > max_k)
    throw CodeError(ErrorKind::EnumerationBound,
                    "enumeration refused for k=" + std::to_string(params.k()) +
                        " (bound " + std::to_string(max_k) + ")");
  if (params.n() > 62)
    throw CodeError(ErrorKind::EnumerationBound, "enumeration needs 2k <= 62");

  const int n = params.n();
  const int k = params.k();
  std::vector<RecoverySet> out;
  std::vector<NodeId> subset(static_cast<std::size_t>(k));
  // Gosper's hack over n-bit masks with k bits set; bit i = NodeId::from_index(i)
  std::uint64_t mask = (std::uint64_t{1} << k) - 1;
  const std::uint64_t limit = std::uint64_t{1} << n;
  while (mask < limit) {
    std::size_t pos = 0;
    for (int i = 0; i < n; ++i)
      if ((mask >> i) & 1u) subset[pos++] = NodeId::from_index(i);
    auto cls = classify_subset(params, subset);
    if (cls.decodable()) out.push_back(RecoverySet{subset, cls});
    const std::uint64_t c = mask & (~mask + 1);
    const std::uint64_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;
  }
  std::sort(out.begin(), out.end(), [](const RecoverySet& a, const RecoverySet& b) {
    return canonical_set_less(a.nodes, b.nodes);
  });
  return out;
}

std::optional<std::vector<NodeId>> select_recovery_set(const CodeParams& params,
                                                       std::span<const NodeId> available) {
  for (auto id : available)
    if (!id.valid_for(params))
      throw CodeError(ErrorKind::InvalidParameter, "node id out of range");
  const auto occ = occupancy(params, available);
  const int k = params.k();
  int first_full = -1;
  int first_dead = -1;
  int dead = 0;
  int lacking_systematic = 0;
  int first_lacking_half = -1;  // parity-only partition
  for (int i = 0; i < k; ++i) {
    const auto o = occ[static_cast<std::size_t>(i)];
    if (o == 3 && first_full < 0) first_full = i;
    if (o == 0) {
      ++dead;
      if (first_dead < 0) first_dead = i;
    }
    if (o == 2) {
      ++lacking_systematic;
      if (first_lacking_half < 0) first_lacking_half = i;
    }
  }
  if (dead > 1) return std::nullopt;

  std::vector<NodeId> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  auto single = [&](int i) {
    return (occ[static_cast<std::size_t>(i)] & 1) ? NodeId::systematic(i) : NodeId::parity(i);
  };

  if (dead == 0 && lacking_systematic % 2 == 0) {
    for (int i = 0; i < k; ++i) chosen.push_back(single(i));
    return chosen;
  }
  if (first_full < 0) return std::nullopt;
  const int doubled = first_full;
  const int excluded = dead == 1 ? first_dead
                       : first_lacking_half >= 0 ? first_lacking_half
                                                 : (doubled + 1) % k;
  for (int i = 0; i < k; ++i) {
    if (i == excluded) continue;
    if (i == doubled) {
      chosen.push_back(NodeId::systematic(i));
      chosen.push_back(NodeId::parity(i));
    } else {
      chosen.push_back(single(i));
    }
  }
  return chosen;
}

}  // namespace nmds
