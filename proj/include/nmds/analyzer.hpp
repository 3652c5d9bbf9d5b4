// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nmds/codec.hpp"

namespace nmds {

struct ErasurePattern {
  std::vector<NodeId> failed;  // canonical order
  friend bool operator==(const ErasurePattern&, const ErasurePattern&) = default;
};

struct SizeCount {
  int failures = 0;
  std::uint64_t recoverable = 0;
  std::uint64_t total = 0;  // C(2k, failures)
};

struct ToleranceReport {
  int k = 0;
  int max_all_patterns_tolerated = 0;
  std::vector<SizeCount> per_size;
  std::vector<ErasurePattern> counterexamples;  // canonical order, capped
};

struct ClaimCheck {
  bool holds = true;
  std::uint64_t patterns_checked = 0;
  std::vector<ErasurePattern> counterexamples;  // capped
};

inline constexpr int kDefaultExhaustiveNodeBound = 24;
inline constexpr std::size_t kCounterexampleCap = 32;

enum class Execution { Serial, Parallel };

/// Survivors span rank k over GF(2). Works for any k.
bool is_recoverable(const CodeParams& params, const ErasurePattern& pattern);

/// Largest t such that every pattern of at most t failures is recoverable.
int max_tolerated_failures(const CodeParams& params,
                           int node_bound = kDefaultExhaustiveNodeBound);

/// Scans f = 0..3; counterexamples are the unrecoverable 3-failure patterns.
ToleranceReport verify_three_failure_claim(const CodeParams& params,
                                           int node_bound = kDefaultExhaustiveNodeBound);

/// Every (k-1)-failure pattern with one failed node in each of k-1
/// distinct partitions.
ClaimCheck verify_distinct_partition_claim(const CodeParams& params,
                                           int node_bound = kDefaultExhaustiveNodeBound);

/// Every (k-1)-failure pattern in which at most one partition lost both nodes.
ClaimCheck verify_common_partition_claim(const CodeParams& params,
                                         int node_bound = kDefaultExhaustiveNodeBound);

/// Recoverable counts for every failure count 0..2k. Counterexamples are the
/// smallest unrecoverable patterns (size max_all_patterns_tolerated + 1).
ToleranceReport tolerance_profile(const CodeParams& params,
                                  int node_bound = kDefaultExhaustiveNodeBound,
                                  Execution exec = Execution::Parallel);

/// Visits every size-`choose` subset of {0..n-1} in lexicographic order.
/// Stops early when `visit` returns false.
void for_each_combination(int n, int choose,
                          const std::function<bool(std::span<const int>)>& visit);

std::uint64_t binomial(int n, int r);

}  // namespace nmds
