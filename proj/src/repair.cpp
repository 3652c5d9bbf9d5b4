// SPDX-License-Identifier: Apache-2.0

#include "nmds/repair.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <optional>
#include <set>

namespace nmds {

std::string to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::ThreeNode: return "three-node";
    case PlanKind::StrategyA: return "strategy-a";
    case PlanKind::StrategyB: return "strategy-b";
    case PlanKind::KMinusOne: return "k-minus-one";
  }
  return "unknown";
}

std::string RepairPlan::describe() const {
  std::string out = to_string(target) + " <-";
  for (auto h : helpers) out += " " + to_string(h);
  return out + " [" + to_string(kind) + ", " + std::to_string(cost_fragments()) + " units]";
}

bool plan_less(const RepairPlan& a, const RepairPlan& b) {
  if (a.cost_fragments() != b.cost_fragments()) return a.cost_fragments() < b.cost_fragments();
  if (a.helpers.size() != b.helpers.size()) return a.helpers.size() < b.helpers.size();
  return std::lexicographical_compare(a.helpers.begin(), a.helpers.end(), b.helpers.begin(),
                                      b.helpers.end());
}

namespace {

class AliveSet {
 public:
  AliveSet(const CodeParams& params, std::span<const NodeId> alive)
      : k_(params.k()), alive_(static_cast<std::size_t>(params.n()), false) {
    for (auto id : alive) {
      if (!id.valid_for(params))
        throw CodeError(ErrorKind::InvalidParameter, "alive node out of range");
      alive_[static_cast<std::size_t>(id.index())] = true;
    }
  }
  bool operator()(NodeId id) const { return alive_[static_cast<std::size_t>(id.index())]; }
  bool full(int partition) const {
    return (*this)(NodeId::systematic(partition)) && (*this)(NodeId::parity(partition));
  }
  bool any(int partition) const {
    return (*this)(NodeId::systematic(partition)) || (*this)(NodeId::parity(partition));
  }
  int k() const noexcept { return k_; }

 private:
  int k_;
  std::vector<bool> alive_;
};

void check_target(const CodeParams& params, NodeId target, const AliveSet& alive) {
  if (!target.valid_for(params))
    throw CodeError(ErrorKind::InvalidParameter, "repair target out of range");
  if (alive(target))
    throw CodeError(ErrorKind::InvalidParameter,
                    "repair target " + to_string(target) + " is listed as alive");
}

RepairPlan three_node_plan(NodeId target, int other) {
  RepairPlan p{target,
               {target.related(), NodeId::systematic(other), NodeId::parity(other)},
               PlanKind::ThreeNode};
  std::sort(p.helpers.begin(), p.helpers.end());
  return p;
}

PlanKind k_minus_one_kind(NodeId target, bool related_alive) {
  if (related_alive) return PlanKind::KMinusOne;
  return target.is_parity() ? PlanKind::StrategyA : PlanKind::StrategyB;
}

// A parity target needs an even number of parity helpers (the all-ones terms
// cancel); a systematic target needs an odd number (they leave d_target).
int required_parity_parity(NodeId target) { return target.is_parity() ? 0 : 1; }

std::optional<RepairPlan> cheapest_k_minus_one(const AliveSet& alive, NodeId target,
                                               bool related_alive) {
  const int a = target.partition;
  RepairPlan plan{target, {}, k_minus_one_kind(target, related_alive)};
  int parities = 0;
  int last_flippable = -1;
  for (int b = 0; b < alive.k(); ++b) {
    if (b == a) continue;
    if (!alive.any(b)) return std::nullopt;
    if (alive(NodeId::systematic(b))) {
      plan.helpers.push_back(NodeId::systematic(b));
      if (alive(NodeId::parity(b))) last_flippable = static_cast<int>(plan.helpers.size()) - 1;
    } else {
      plan.helpers.push_back(NodeId::parity(b));
      ++parities;
    }
  }
  if (parities % 2 != required_parity_parity(target)) {
    if (last_flippable < 0) return std::nullopt;
    plan.helpers[static_cast<std::size_t>(last_flippable)].role = Role::Parity;
  }
  return plan;
}

}  // namespace

std::vector<RepairPlan> plan_single_repairs(const CodeParams& params, NodeId target,
                                            std::span<const NodeId> alive_nodes, int max_k) {
  if (params.k() > max_k)
    throw CodeError(ErrorKind::EnumerationBound,
                    "plan enumeration refused for k=" + std::to_string(params.k()) +
                        " (bound " + std::to_string(max_k) + ")");
  const AliveSet alive(params, alive_nodes);
  check_target(params, target, alive);
  const int k = params.k();
  const int a = target.partition;
  const bool related_alive = alive(target.related());

  std::vector<RepairPlan> plans;
  if (related_alive) {
    for (int b = 0; b < k; ++b)
      if (b != a && alive.full(b)) plans.push_back(three_node_plan(target, b));
  }

  // one node from each other partition; bit j of `choice` picks the parity
  // of the j-th other partition
  std::vector<int> others;
  for (int b = 0; b < k; ++b)
    if (b != a) others.push_back(b);
  const auto kind = k_minus_one_kind(target, related_alive);
  const std::uint64_t choices = std::uint64_t{1} << others.size();
  for (std::uint64_t choice = 0; choice < choices; ++choice) {
    if (std::popcount(choice) % 2 != required_parity_parity(target)) continue;
    RepairPlan plan{target, {}, kind};
    bool feasible = true;
    for (std::size_t j = 0; j < others.size() && feasible; ++j) {
      const NodeId h = (choice >> j) & 1u ? NodeId::parity(others[j])
                                           : NodeId::systematic(others[j]);
      feasible = alive(h);
      plan.helpers.push_back(h);
    }
    if (feasible) plans.push_back(std::move(plan));
  }

  if (plans.empty())
    throw CodeError(ErrorKind::Unrecoverable,
                    "no repair plan for " + to_string(target) + " from the surviving nodes");
  std::sort(plans.begin(), plans.end(), plan_less);
  return plans;
}

RepairPlan best_single_repair(const CodeParams& params, NodeId target,
                              std::span<const NodeId> alive_nodes) {
  const AliveSet alive(params, alive_nodes);
  check_target(params, target, alive);
  const bool related_alive = alive(target.related());

  std::optional<RepairPlan> best = cheapest_k_minus_one(alive, target, related_alive);
  if (related_alive) {
    for (int b = 0; b < params.k(); ++b) {
      if (b == target.partition || !alive.full(b)) continue;
      auto three = three_node_plan(target, b);
      if (!best || plan_less(three, *best)) best = std::move(three);
      break;  // later partitions only sort after this one
    }
  }
  if (!best)
    throw CodeError(ErrorKind::Unrecoverable,
                    "no repair plan for " + to_string(target) + " from the surviving nodes");
  return *best;
}

BigCount count_repair_options(const CodeParams& params, RepairScenario scenario) {
  switch (scenario) {
    case RepairScenario::RelatedAlive: return BigCount(params.k() - 1);
    case RepairScenario::StrategyA:
    case RepairScenario::StrategyB: return BigCount(1) << (params.k() - 2);
  }
  return 0;
}

std::pair<RepairPlan, RepairPlan> plan_partition_repair(const CodeParams& params,
                                                        int partition,
                                                        std::span<const NodeId> alive_nodes,
                                                        PartitionOrder order) {
  if (partition < 0 || partition >= params.k())
    throw CodeError(ErrorKind::InvalidParameter, "partition out of range");
  const NodeId first = order == PartitionOrder::SystematicFirst ? NodeId::systematic(partition)
                                                                : NodeId::parity(partition);
  const NodeId second = first.related();
  const AliveSet alive(params, alive_nodes);
  if (alive(first) || alive(second))
    throw CodeError(ErrorKind::InvalidParameter,
                    "partition " + std::to_string(partition + 1) + " is not fully failed");

  auto first_plan = cheapest_k_minus_one(alive, first, false);
  if (!first_plan)
    throw CodeError(ErrorKind::Unrecoverable,
                    "no (k-1)-helper plan for " + to_string(first));

  std::optional<RepairPlan> second_plan;
  for (int b = 0; b < params.k(); ++b) {
    if (b != partition && alive.full(b)) {
      second_plan = three_node_plan(second, b);
      break;
    }
  }
  if (!second_plan)
    throw CodeError(ErrorKind::Unrecoverable,
                    "no intact partition left for the three-node repair of " + to_string(second));
  return {std::move(*first_plan), std::move(*second_plan)};
}

std::vector<RepairPlan> plan_cheapest_first(const CodeParams& params,
                                            std::span<const NodeId> failed,
                                            std::span<const NodeId> targets,
                                            std::size_t max_steps) {
  const auto n = static_cast<std::size_t>(params.n());
  std::vector<bool> down(n, false);
  for (auto id : failed) {
    if (!id.valid_for(params))
      throw CodeError(ErrorKind::InvalidParameter, "failed node out of range");
    down[static_cast<std::size_t>(id.index())] = true;
  }
  std::vector<bool> wanted(n, targets.empty());
  for (auto id : targets) {
    if (!id.valid_for(params))
      throw CodeError(ErrorKind::InvalidParameter, "repair target out of range");
    wanted[static_cast<std::size_t>(id.index())] = true;
  }

  std::vector<RepairPlan> sequence;
  while (sequence.size() < max_steps) {
    std::vector<NodeId> alive;
    std::vector<NodeId> pending;
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = NodeId::from_index(static_cast<int>(i));
      if (!down[i]) alive.push_back(id);
      else if (wanted[i]) pending.push_back(id);
    }
    if (pending.empty()) break;

    std::optional<RepairPlan> pick;
    for (auto target : pending) {
      try {
        auto plan = best_single_repair(params, target, alive);
        if (!pick || plan.cost_fragments() < pick->cost_fragments()) pick = std::move(plan);
      } catch (const CodeError& e) {
        if (e.kind() != ErrorKind::Unrecoverable) throw;
      }
    }
    if (!pick) {
      std::string names;
      for (auto id : pending) names += " " + to_string(id);
      throw CodeError(ErrorKind::Unrecoverable, "cannot repair:" + names);
    }
    down[static_cast<std::size_t>(pick->target.index())] = false;
    sequence.push_back(std::move(*pick));
  }
  return sequence;
}

Packet execute_plan(const RepairPlan& plan, const PacketLookup& lookup) {
  if (plan.helpers.empty()) throw CodeError(ErrorKind::InvalidParameter, "plan has no helpers");
  std::optional<Packet> out;
  for (auto h : plan.helpers) {
    const Packet* p = lookup(h);
    if (p == nullptr)
      throw CodeError(ErrorKind::MissingPacket,
                      "missing helper packet " + to_string(h) + " for " + to_string(plan.target));
    if (!out) out = *p;
    else *out ^= *p;
  }
  return std::move(*out);
}

Packet execute_plan(const RepairPlan& plan, const std::map<NodeId, Packet>& lookup) {
  return execute_plan(plan, [&lookup](NodeId id) -> const Packet* {
    auto it = lookup.find(id);
    return it == lookup.end() ? nullptr : &it->second;
  });
}

BandwidthReport repair_bandwidth(std::span<const RepairPlan> plans, std::uint64_t fragment_size) {
  BandwidthReport r;
  std::set<NodeId> distinct;
  for (const auto& p : plans) {
    r.fragment_units += p.cost_fragments();
    r.nodes_contacted += static_cast<int>(std::set<NodeId>(p.helpers.begin(), p.helpers.end()).size());
    distinct.insert(p.helpers.begin(), p.helpers.end());
  }
  r.distinct_nodes = static_cast<int>(distinct.size());
  r.bytes_downloaded = static_cast<std::uint64_t>(r.fragment_units) * fragment_size;
  return r;
}

std::string format_of_file(Rational fraction) {
  if (fraction.denominator() == 1) return std::to_string(fraction.numerator()) + " M";
  return std::to_string(fraction.numerator()) + "/" + std::to_string(fraction.denominator()) +
         " M";
}

namespace {

void check_msr_args(int n, int k, int d) {
  if (k < 1 || n <= k)
    throw CodeError(ErrorKind::InvalidParameter, "MSR baseline needs 1 <= k < n");
  if (d < k || d > n - 1)
    throw CodeError(ErrorKind::InvalidParameter,
                    "helper count d=" + std::to_string(d) + " outside [" + std::to_string(k) +
                        ", " + std::to_string(n - 1) + "]");
}

}  // namespace

MsrBandwidth msr_repair_bandwidth(int n, int k, int d, std::uint64_t file_bytes) {
  check_msr_args(n, k, d);
  if (file_bytes > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max() / d))
    throw CodeError(ErrorKind::InvalidParameter, "file size too large for exact arithmetic");
  const Rational exact(static_cast<std::int64_t>(file_bytes) * d,
                       static_cast<std::int64_t>(k) * (d - k + 1));
  const auto num = exact.numerator();
  const auto den = exact.denominator();
  return {exact, static_cast<std::uint64_t>((num + den - 1) / den)};
}

Rational msr_repair_units(int n, int k, int d) {
  check_msr_args(n, k, d);
  return Rational(d, d - k + 1);
}

}  // namespace nmds
