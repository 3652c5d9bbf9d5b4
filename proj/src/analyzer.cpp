// SPDX-License-Identifier: Apache-2.0

#include "nmds/analyzer.hpp"

#include <algorithm>
#include <numeric>

#include "nmds/gf2.hpp"
#include "nmds/kernels.hpp"

namespace nmds {

namespace {

void check_bound(const CodeParams& params, int node_bound) {
  const int bound = std::min(node_bound, kernels::kMaxMaskNodes - 2);
  if (params.n() > bound)
    throw CodeError(ErrorKind::EnumerationBound,
                    "exhaustive analysis refused for k=" + std::to_string(params.k()) +
                        " (2k=" + std::to_string(params.n()) + " exceeds " +
                        std::to_string(bound) + " nodes)");
}

std::uint32_t to_mask(std::span<const int> indices) {
  std::uint32_t m = 0;
  for (int i : indices) m |= std::uint32_t{1} << i;
  return m;
}

ErasurePattern to_pattern(std::span<const int> indices) {
  ErasurePattern p;
  p.failed.reserve(indices.size());
  for (int i : indices) p.failed.push_back(NodeId::from_index(i));
  return p;
}

struct SizeScan {
  SizeCount count;
  std::vector<ErasurePattern> counterexamples;
};

SizeScan scan_size(const CodeParams& params, int f, std::size_t cap) {
  SizeScan s;
  s.count.failures = f;
  for_each_combination(params.n(), f, [&](std::span<const int> c) {
    ++s.count.total;
    if (kernels::survivors_full_rank(params.k(), to_mask(c))) ++s.count.recoverable;
    else if (s.counterexamples.size() < cap) s.counterexamples.push_back(to_pattern(c));
    return true;
  });
  return s;
}

}  // namespace

std::uint64_t binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t acc = 1;
  for (int i = 1; i <= r; ++i) acc = acc * static_cast<std::uint64_t>(n - r + i) / static_cast<std::uint64_t>(i);
  return acc;
}

void for_each_combination(int n, int choose,
                          const std::function<bool(std::span<const int>)>& visit) {
  if (choose < 0 || choose > n) return;
  std::vector<int> c(static_cast<std::size_t>(choose));
  std::iota(c.begin(), c.end(), 0);
  while (true) {
    if (!visit(c)) return;
    int i = choose - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - choose + i) --i;
    if (i < 0) return;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < choose; ++j)
      c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
}

bool is_recoverable(const CodeParams& params, const ErasurePattern& pattern) {
  std::vector<bool> down(static_cast<std::size_t>(params.n()), false);
  for (auto id : pattern.failed) {
    if (!id.valid_for(params))
      throw CodeError(ErrorKind::InvalidParameter, "failed node out of range");
    down[static_cast<std::size_t>(id.index())] = true;
  }
  std::vector<gf2::Vector> rows;
  for (int i = 0; i < params.n(); ++i)
    if (!down[static_cast<std::size_t>(i)])
      rows.push_back(gf2::node_row(params, NodeId::from_index(i)));
  return gf2::rank(rows) == static_cast<std::size_t>(params.k());
}

int max_tolerated_failures(const CodeParams& params, int node_bound) {
  check_bound(params, node_bound);
  for (int f = 1; f <= params.n(); ++f) {
    bool all = true;
    for_each_combination(params.n(), f, [&](std::span<const int> c) {
      all = kernels::survivors_full_rank(params.k(), to_mask(c));
      return all;
    });
    if (!all) return f - 1;
  }
  return params.n();
}

ToleranceReport verify_three_failure_claim(const CodeParams& params, int node_bound) {
  check_bound(params, node_bound);
  ToleranceReport r;
  r.k = params.k();
  r.max_all_patterns_tolerated = max_tolerated_failures(params, node_bound);
  for (int f = 0; f <= std::min(3, params.n()); ++f) {
    auto s = scan_size(params, f, kCounterexampleCap);
    r.per_size.push_back(s.count);
    if (f == 3) r.counterexamples = std::move(s.counterexamples);
  }
  return r;
}

ClaimCheck verify_distinct_partition_claim(const CodeParams& params, int node_bound) {
  check_bound(params, node_bound);
  const int k = params.k();
  ClaimCheck out;
  // choose the untouched partition, then a role in each of the others
  for (int spared = 0; spared < k; ++spared) {
    for (std::uint32_t roles = 0; roles < (std::uint32_t{1} << (k - 1)); ++roles) {
      std::vector<int> failed;
      int bit = 0;
      for (int p = 0; p < k; ++p) {
        if (p == spared) continue;
        failed.push_back(2 * p + static_cast<int>((roles >> bit++) & 1u));
      }
      ++out.patterns_checked;
      if (!kernels::survivors_full_rank(k, to_mask(failed))) {
        out.holds = false;
        if (out.counterexamples.size() < kCounterexampleCap)
          out.counterexamples.push_back(to_pattern(failed));
      }
    }
  }
  std::sort(out.counterexamples.begin(), out.counterexamples.end(),
            [](const ErasurePattern& a, const ErasurePattern& b) { return a.failed < b.failed; });
  return out;
}

ClaimCheck verify_common_partition_claim(const CodeParams& params, int node_bound) {
  check_bound(params, node_bound);
  const int k = params.k();
  ClaimCheck out;
  for_each_combination(params.n(), k - 1, [&](std::span<const int> c) {
    int doubled = 0;
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
      if (c[i] / 2 == c[i + 1] / 2) ++doubled;
    if (doubled > 1) return true;
    ++out.patterns_checked;
    if (!kernels::survivors_full_rank(k, to_mask(c))) {
      out.holds = false;
      if (out.counterexamples.size() < kCounterexampleCap)
        out.counterexamples.push_back(to_pattern(c));
    }
    return true;
  });
  return out;
}

ToleranceReport tolerance_profile(const CodeParams& params, int node_bound, Execution exec) {
  check_bound(params, node_bound);
  const auto counts = exec == Execution::Parallel
                          ? kernels::count_recoverable_parallel(params.k())
                          : kernels::count_recoverable_serial(params.k());
  ToleranceReport r;
  r.k = params.k();
  r.max_all_patterns_tolerated = -1;
  for (int f = 0; f <= params.n(); ++f) {
    const SizeCount sc{f, counts[static_cast<std::size_t>(f)], binomial(params.n(), f)};
    r.per_size.push_back(sc);
    if (sc.recoverable < sc.total && r.max_all_patterns_tolerated < 0)
      r.max_all_patterns_tolerated = f - 1;
  }
  if (r.max_all_patterns_tolerated < 0) r.max_all_patterns_tolerated = params.n();
  const int smallest_bad = r.max_all_patterns_tolerated + 1;
  if (smallest_bad <= params.n())
    r.counterexamples = scan_size(params, smallest_bad, kCounterexampleCap).counterexamples;
  return r;
}

}  // namespace nmds
