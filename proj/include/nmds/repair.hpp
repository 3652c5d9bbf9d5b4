// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "nmds/codec.hpp"

namespace nmds {

using Rational = boost::rational<std::int64_t>;

enum class PlanKind {
  ThreeNode,  // related node + both nodes of another intact partition
  StrategyA,  // parity target, related systematic failed: even parity count
  StrategyB,  // systematic target, related parity failed: odd parity count
  KMinusOne,  // one node from each other partition while the related node is alive
};

std::string to_string(PlanKind kind);

/// Exact repair of one node. The schedule XORs every helper packet, in
/// helper order, to reproduce the target packet.
struct RepairPlan {
  NodeId target;
  std::vector<NodeId> helpers;  // canonical order
  PlanKind kind = PlanKind::ThreeNode;

  int cost_fragments() const noexcept { return static_cast<int>(helpers.size()); }
  std::string describe() const;
};

/// Cost, then helper count, then lexicographic helper list.
bool plan_less(const RepairPlan& a, const RepairPlan& b);

inline constexpr int kDefaultPlanEnumerationBound = 20;

/// Every ThreeNode and (k-1)-helper plan for `target` built from `alive`,
/// sorted by plan_less. Throws CodeError(Unrecoverable) when none exists.
std::vector<RepairPlan> plan_single_repairs(const CodeParams& params, NodeId target,
                                            std::span<const NodeId> alive,
                                            int max_k = kDefaultPlanEnumerationBound);

/// Same as plan_single_repairs(...).front() without enumerating; any k.
RepairPlan best_single_repair(const CodeParams& params, NodeId target,
                              std::span<const NodeId> alive);

enum class RepairScenario { RelatedAlive, StrategyA, StrategyB };

BigCount count_repair_options(const CodeParams& params, RepairScenario scenario);

enum class PartitionOrder { ParityFirst, SystematicFirst };

/// Repairs both nodes of a failed partition: a (k-1)-helper plan for the
/// first node, then a ThreeNode plan that reads the freshly repaired one.
std::pair<RepairPlan, RepairPlan> plan_partition_repair(
    const CodeParams& params, int partition, std::span<const NodeId> alive,
    PartitionOrder order = PartitionOrder::SystematicFirst);

/// Repairs failed nodes one at a time, always taking the cheapest available
/// plan (ties broken by canonical target order) and replanning after each
/// step. `targets` restricts which failed nodes get repaired (empty = all).
/// Throws CodeError(Unrecoverable) if a wanted node has no plan.
std::vector<RepairPlan> plan_cheapest_first(const CodeParams& params,
                                            std::span<const NodeId> failed,
                                            std::span<const NodeId> targets = {},
                                            std::size_t max_steps = SIZE_MAX);

using PacketLookup = std::function<const Packet*(NodeId)>;

/// Throws CodeError(MissingPacket) when a helper is absent.
Packet execute_plan(const RepairPlan& plan, const PacketLookup& lookup);
Packet execute_plan(const RepairPlan& plan, const std::map<NodeId, Packet>& lookup);

struct BandwidthReport {
  std::uint64_t bytes_downloaded = 0;
  std::int64_t fragment_units = 0;  // multiples of M/k
  int nodes_contacted = 0;          // distinct helpers per plan, summed over plans
  int distinct_nodes = 0;           // distinct helpers across the whole sequence

  /// Bandwidth as a fraction of the file size M.
  Rational of_file(const CodeParams& params) const {
    return Rational(fragment_units, params.k());
  }
};

BandwidthReport repair_bandwidth(std::span<const RepairPlan> plans,
                                 std::uint64_t fragment_size = 1);

/// "3/5 M", "2 M", "0 M".
std::string format_of_file(Rational fraction);

struct MsrBandwidth {
  Rational bytes;              // M d / (k (d - k + 1))
  std::uint64_t rounded_bytes; // ceil
};

/// Regenerating-code MSR baseline. Requires k <= d <= n - 1.
MsrBandwidth msr_repair_bandwidth(int n, int k, int d, std::uint64_t file_bytes);

/// MSR repair bandwidth in fragment units (M/k): d / (d - k + 1).
Rational msr_repair_units(int n, int k, int d);

}  // namespace nmds
