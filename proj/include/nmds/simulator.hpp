// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmds/codec.hpp"
#include "nmds/repair.hpp"

namespace nmds::sim {

enum class RepairPolicy { CheapestFirst };

/// round -> nodes that fail at the start of that round (applied to every stripe)
using FailureTrace = std::map<int, std::vector<NodeId>>;

struct SimConfig {
  int k = 5;
  int rounds = 1;
  double failure_probability = 0.0;  // per node per round; ignored with a trace
  std::optional<FailureTrace> trace;
  std::uint64_t seed = 0;
  RepairPolicy policy = RepairPolicy::CheapestFirst;
  int repairs_per_round = 0;  // 0 = unlimited
  int stripes = 1;            // independent placement groups of 2k nodes
};

/// Throws CodeError(InvalidParameter) describing the first problem.
void validate(const SimConfig& config);

struct RoundLog {
  int round = 0;
  int failures_injected = 0;
  int repairs = 0;
  std::int64_t fragment_units = 0;
  int data_loss_events = 0;
  int nodes_down = 0;  // after the round's repairs, frozen stripes included

  friend bool operator==(const RoundLog&, const RoundLog&) = default;
};

struct SimMetrics {
  std::int64_t fragment_units_downloaded = 0;
  std::int64_t repairs_completed = 0;
  std::int64_t helpers_contacted_total = 0;
  std::int64_t data_loss_events = 0;
  std::vector<RoundLog> per_round;

  friend bool operator==(const SimMetrics&, const SimMetrics&) = default;
};

/// Round-based failure/repair loop. Each round: inject failures, declare
/// data loss (and freeze the stripe) when survivors no longer span the data,
/// then run up to repairs_per_round cheapest-first repairs.
///
/// Random failures: std::mt19937_64 seeded with `seed`; one 64-bit draw per
/// (round, stripe, node) in that nesting order and canonical node order;
/// a node fails when (draw >> 11) * 2^-53 < failure_probability.
SimMetrics run_simulation(const SimConfig& config);

struct BaselineComparison {
  int k = 0;
  int d = 0;
  std::int64_t repairs = 0;
  Rational measured_units_per_repair;    // 0 when nothing was repaired
  Rational measured_helpers_per_repair;
  int single_repair_units = 0;    // cheapest plan for one failure, everything else alive
  int single_repair_helpers = 0;
  int naive_units = 0;            // k fragments = M
  int naive_helpers = 0;
  Rational msr_units;             // d / (d - k + 1)
  int msr_helpers = 0;
};

/// Requires k <= d <= 2k - 1.
BaselineComparison compare_baselines(const SimMetrics& metrics, int k, int d);

/// key = value lines: k, rounds, fail_prob, seed, repairs_per_round,
/// stripes, policy.
SimConfig parse_config(std::string_view text);

/// Lines of "<round> <node> [<node> ...]"; '#' starts a comment.
FailureTrace parse_trace(std::string_view text, const CodeParams& params);

}  // namespace nmds::sim
