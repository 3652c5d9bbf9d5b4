// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Expected values come from the brute-force oracles in oracle.hpp
// or from closed forms evaluated here, never from the library under test.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "nmds/analyzer.hpp"
#include "nmds/codec.hpp"
#include "nmds/repair.hpp"
#include "nmds/simulator.hpp"
#include "nmds/store.hpp"
#include "oracle.hpp"
#include "worked_lists.hpp"

namespace {

using namespace nmds;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records the first few problems; keeps the verdict.
  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || detail.tellp() < 400) detail << (pass ? "" : "; ") << what;
    pass = false;
  }
};

std::uint32_t full_mask(int k) { return (1u << (2 * k)) - 1; }

std::vector<NodeId> alive_except(const CodeParams& params, std::initializer_list<NodeId> down) {
  std::vector<NodeId> out;
  for (auto id : all_nodes(params))
    if (std::find(down.begin(), down.end(), id) == down.end()) out.push_back(id);
  return out;
}

std::map<NodeId, Packet> lookup_of(const Stripe& stripe) {
  std::map<NodeId, Packet> out;
  for (auto id : all_nodes(stripe.params())) out[id] = stripe.packet(id);
  return out;
}

// 1. recovery-set counts
void recovery_set_counts(Outcome& o) {
  const auto start = Clock::now();
  for (int k = 2; k <= 10; ++k) {
    const auto c = count_recovery_sets(make_params(k));
    const BigCount pow2 = BigCount(1) << (k - 2);
    const BigCount want_i = BigCount(k) * (k - 1) * pow2;
    const BigCount want_ii = BigCount(1) << (k - 1);
    const BigCount want_total = pow2 * (k * k - k + 2);
    o.check(c.strategy_i == want_i && c.strategy_ii == want_ii && c.total == want_total,
            "closed form mismatch at k=" + std::to_string(k));
  }
  for (int k = 2; k <= 8; ++k) {
    const auto params = make_params(k);
    std::vector<std::uint32_t> want;
    std::uint64_t want_i = 0, want_ii = 0;
    for (std::uint32_t m = 0; m <= full_mask(k); ++m) {
      if (std::popcount(m) != k || !oracle::determines_data(k, m)) continue;
      want.push_back(m);
      // a decodable set either doubles up one partition or covers them all
      bool doubled = false;
      for (int p = 0; p < k; ++p) doubled |= ((m >> (2 * p)) & 3u) == 3u;
      ++(doubled ? want_i : want_ii);
    }
    const auto sets = enumerate_recovery_sets(params);
    std::vector<std::uint32_t> got;
    std::uint64_t got_i = 0, got_ii = 0;
    for (const auto& s : sets) {
      got.push_back(oracle::mask_of(s.nodes));
      got_i += s.classification.is_strategy_i();
      got_ii += s.classification.is_strategy_ii();
    }
    std::sort(got.begin(), got.end());
    o.check(got == want, "enumerated sets differ from oracle at k=" + std::to_string(k));
    o.check(got_i == want_i && got_ii == want_ii,
            "strategy split differs from oracle at k=" + std::to_string(k));
    const auto c = count_recovery_sets(params);
    o.check(c.total == want.size() && c.strategy_i == want_i && c.strategy_ii == want_ii,
            "counts differ from oracle at k=" + std::to_string(k));
    if (k == 5) {
      o.check(want_i == 160 && want_ii == 16 && want.size() == 176 && oracle::binomial(10, 5) == 252,
              "k=5 oracle is not 160 + 16 = 176 of 252");
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  o.check(secs < 10.0, "took " + std::to_string(secs) + " s");
  if (o.pass) o.detail << "k=2..10 closed forms, k=2..8 sets equal oracle; k=5: 160+16=176 of 252";
  o.detail << " (" << std::to_string(secs).substr(0, 5) << " s)";
}

std::vector<ErasurePattern> oracle_unrecoverable(int k, int f) {
  std::vector<ErasurePattern> out;
  for (std::uint32_t failed = 0; failed <= full_mask(k); ++failed)
    if (std::popcount(failed) == f && !oracle::determines_data(k, full_mask(k) & ~failed))
      out.push_back({oracle::nodes_of(failed, 2 * k)});
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.failed < b.failed; });
  return out;
}

// 2. three-failure tolerance
void three_failures(Outcome& o) {
  double k8_secs = 0;
  for (int k = 2; k <= 8; ++k) {
    const auto start = Clock::now();
    auto r = verify_three_failure_claim(make_params(k));
    if (k == 8) k8_secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::sort(r.counterexamples.begin(), r.counterexamples.end(),
              [](const auto& a, const auto& b) { return a.failed < b.failed; });
    const auto want = oracle_unrecoverable(k, 3);
    if (k >= 4) {
      o.check(r.counterexamples.empty() && want.empty(),
              "3-failure counterexample at k=" + std::to_string(k));
    } else {
      o.check(!want.empty() && r.counterexamples == want,
              "counterexamples differ from oracle at k=" + std::to_string(k));
    }
  }
  o.check(k8_secs < 60.0, "k=8 took " + std::to_string(k8_secs) + " s");
  if (o.pass) {
    std::string k3;
    for (const auto& p : oracle_unrecoverable(3, 3)) k3 += to_string(p.failed);
    o.detail << "none for k=4..8; k=2: " << oracle_unrecoverable(2, 3).size()
             << " patterns; k=3: " << k3;
  }
  o.detail << " (k=8 " << std::to_string(k8_secs).substr(0, 5) << " s)";
}

// 3. distinct-partition tolerance
void distinct_partitions(Outcome& o) {
  std::uint64_t total = 0;
  for (int k = 2; k <= 8; ++k) {
    const auto c = verify_distinct_partition_claim(make_params(k));
    // oracle: every choice of k-1 partitions and one node in each
    std::uint64_t checked = 0;
    bool all = true;
    for (int skip = 0; skip < k; ++skip)
      for (std::uint32_t roles = 0; roles < (1u << (k - 1)); ++roles) {
        std::uint32_t failed = 0;
        int bit = 0;
        for (int p = 0; p < k; ++p) {
          if (p == skip) continue;
          failed |= 1u << (2 * p + ((roles >> bit++) & 1u));
        }
        all &= oracle::determines_data(k, full_mask(k) & ~failed);
        ++checked;
      }
    o.check(all, "oracle finds an unrecoverable pattern at k=" + std::to_string(k));
    o.check(c.holds && c.counterexamples.empty(), "analyzer reports failure at k=" + std::to_string(k));
    o.check(c.patterns_checked == checked, "pattern count differs at k=" + std::to_string(k));
    total += checked;
  }
  if (o.pass) o.detail << total << " patterns over k=2..8, all recoverable";
}

// 4. repair option counts and the published k=5 lists
void repair_options(Outcome& o) {
  for (int k = 2; k <= 8; ++k) {
    const auto params = make_params(k);
    const auto s1 = NodeId::systematic(0), p1 = NodeId::parity(0);
    const auto related = plan_single_repairs(params, s1, alive_except(params, {s1}));
    const auto three = std::count_if(related.begin(), related.end(),
                                     [](const RepairPlan& p) { return p.kind == PlanKind::ThreeNode; });
    const auto a = plan_single_repairs(params, p1, alive_except(params, {s1, p1}));
    const auto b = plan_single_repairs(params, s1, alive_except(params, {s1, p1}));
    const std::size_t pow2 = std::size_t{1} << (k - 2);
    const auto ks = std::to_string(k);
    o.check(three == k - 1, "three-node plans != k-1 at k=" + ks);
    o.check(a.size() == pow2 && b.size() == pow2, "strategy A/B plans != 2^(k-2) at k=" + ks);
    o.check(count_repair_options(params, RepairScenario::RelatedAlive) == k - 1 &&
                count_repair_options(params, RepairScenario::StrategyA) == pow2 &&
                count_repair_options(params, RepairScenario::StrategyB) == pow2,
            "count_repair_options disagrees at k=" + ks);
    // every plan really determines its target (brute force)
    for (const auto* plans : {&related, &a, &b})
      for (const auto& p : *plans)
        o.check(oracle::determines_node(k, oracle::mask_of(p.helpers), p.target.index()),
                "plan " + p.describe() + " does not determine its target");
  }

  const auto params = make_params(5);
  const auto s1 = NodeId::systematic(0), p1 = NodeId::parity(0);
  auto sets_of = [](const std::vector<RepairPlan>& plans, std::optional<PlanKind> only) {
    std::set<worked::HelperSet> out;
    for (const auto& p : plans)
      if (!only || p.kind == *only) out.insert({p.helpers.begin(), p.helpers.end()});
    return out;
  };
  const auto three = sets_of(plan_single_repairs(params, s1, alive_except(params, {s1})),
                             PlanKind::ThreeNode);
  const auto a = sets_of(plan_single_repairs(params, p1, alive_except(params, {s1, p1})), {});
  const auto b = sets_of(plan_single_repairs(params, s1, alive_except(params, {s1, p1})), {});
  o.check(three == worked::helper_sets(5, worked::kThreeNodeS1) && three.size() == 4,
          "k=5 three-node list differs");
  o.check(a == worked::helper_sets(5, worked::kParityP1) && a.size() == 8,
          "k=5 strategy A list differs");
  o.check(b == worked::helper_sets(5, worked::kSystematicS1) && b.size() == 8,
          "k=5 strategy B list differs");
  if (o.pass) o.detail << "k=2..8: k-1 / 2^(k-2) / 2^(k-2); k=5 lists 4, 8, 8 match";
}

// 5. repair bandwidth
void repair_bandwidth_units(Outcome& o) {
  for (int k = 2; k <= 8; ++k) {
    const auto params = make_params(k);
    const auto ks = std::to_string(k);
    for (auto target : all_nodes(params)) {
      std::vector<NodeId> alive;
      for (auto id : all_nodes(params))
        if (id != target) alive.push_back(id);
      for (const auto& p : plan_single_repairs(params, target, alive))
        if (p.kind == PlanKind::ThreeNode)
          o.check(p.cost_fragments() == 3, "three-node plan costs != 3 at k=" + ks);
      if (k >= 4) {
        const std::vector<NodeId> failed{target};
        const auto bw = repair_bandwidth(plan_cheapest_first(params, failed));
        o.check(bw.fragment_units == 3 && bw.of_file(params) == Rational(3, k),
                "single repair != 3M/k at k=" + ks);
      }
    }
    for (int part = 0; part < k; ++part) {
      const std::vector<NodeId> failed{NodeId::systematic(part), NodeId::parity(part)};
      const auto [x, y] = plan_partition_repair(params, part,
                                                alive_except(params, {failed[0], failed[1]}));
      const std::vector<RepairPlan> procedure{x, y};
      const auto bw = repair_bandwidth(procedure);
      o.check(bw.fragment_units == k + 2 && bw.of_file(params) == Rational(k + 2, k),
              "partition pair != (k+2)M/k at k=" + ks);
      // Greedy replanning agrees from k = 4; below that the second node's
      // (k-1)-helper read undercuts the three-node read, giving 2(k-1).
      const auto greedy = repair_bandwidth(plan_cheapest_first(params, failed)).fragment_units;
      o.check(greedy == (k >= 4 ? k + 2 : 2 * (k - 1)), "cheapest-first pair cost at k=" + ks);
    }
  }
  const auto params = make_params(5);
  const std::vector<NodeId> pair{NodeId::systematic(0), NodeId::parity(0)};
  const auto bw = repair_bandwidth(plan_cheapest_first(params, pair));
  o.check(format_of_file(bw.of_file(params)) == "7/5 M", "k=5 pair is not 7/5 M");
  o.check(Rational(bw.fragment_units, 2) == Rational(7, 2), "k=5 average is not 3.5");
  if (o.pass) o.detail << "3 units single (k>=4), k+2 units per partition pair (k=2..8); k=5: 7/5 M, 3.5 avg";
}

// 6. MSR baseline
void baselines(Outcome& o) {
  const std::uint64_t M = 1'000'000;
  o.check(msr_repair_bandwidth(10, 5, 6, M).bytes == Rational(3 * M, 5), "(10,5,6) != 3M/5");
  o.check(msr_repair_bandwidth(10, 5, 5, M).bytes == Rational(M), "(10,5,5) != M");
  // closed form M d / (k (d - k + 1)) across the admissible range
  for (int d = 5; d <= 9; ++d)
    o.check(msr_repair_bandwidth(10, 5, d, M).bytes ==
                Rational(static_cast<std::int64_t>(M) * d, 5 * (d - 5 + 1)),
            "MSR closed form differs at d=" + std::to_string(d));
  sim::SimConfig cfg;
  cfg.k = 5;
  cfg.trace = sim::FailureTrace{{0, {NodeId::systematic(0)}}};
  const auto c = sim::compare_baselines(sim::run_simulation(cfg), 5, 6);
  o.check(c.single_repair_helpers == 3 && c.msr_helpers == 6, "helper counts are not 3 vs 6");
  o.check(Rational(c.single_repair_units, 5) == Rational(3, 5) && c.msr_units / 5 == Rational(3, 5),
          "equal-bandwidth comparison is not 3M/5 on both sides");
  if (o.pass) o.detail << "3M/5 at d=6, M at d=5; (10,5): 3 helpers vs 6 at 3M/5";
}

// 7. exact repair
void exact_repair(Outcome& o) {
  std::mt19937_64 rng(0x5eed0007);
  std::uint64_t plans_run = 0;
  for (int k = 2; k <= 8; ++k) {
    const auto params = make_params(k);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto d = oracle::random_fragments(rng, k, 1 + rng() % 64);
      const auto stripe = encode_stripe(params, d);
      // the encoder itself is checked against the definition
      const auto ref = oracle::reference_parities(d);
      for (int i = 0; i < k; ++i)
        if (stripe.packet(NodeId::parity(i)) != ref[static_cast<std::size_t>(i)]) {
          o.check(false, "encoder differs from definition at k=" + std::to_string(k));
        }
      const auto lookup = lookup_of(stripe);
      const auto target = NodeId::from_index(static_cast<int>(rng() % static_cast<unsigned>(2 * k)));
      std::vector<NodeId> alive;
      for (auto id : all_nodes(params))
        if (id != target) alive.push_back(id);
      for (const auto& p : plan_single_repairs(params, target, alive)) {
        ++plans_run;
        if (execute_plan(p, lookup) != stripe.packet(target))
          o.check(false, "k=" + std::to_string(k) + " " + p.describe());
      }
    }
  }
  if (o.pass) o.detail << "7000 trials, " << plans_run << " plans executed, 0 mismatches";
}

// 8. end-to-end pipeline
void end_to_end(Outcome& o) {
  std::mt19937_64 rng(0x5eed0008);
  std::uint64_t files = 0, stripes = 0, shards_checked = 0;
  for (int k : {2, 3, 5, 8}) {
    const auto params = make_params(k);
    const int losses = k >= 4 ? 3 : k - 1;  // the most every pattern survives
    for (int f = 0; f < 100; ++f) {
      std::vector<std::uint8_t> data(rng() % (64 * 1024 + 1));
      for (auto& b : data) b = static_cast<std::uint8_t>(rng());
      const auto fragment = static_cast<std::uint32_t>(1 + rng() % 2048);
      const auto original = store::encode_file(data, k, fragment, "file" + std::to_string(f));

      for (const auto& [key, bytes] : original.shards) {
        const auto parsed = store::read_shard(bytes);
        if (store::write_shard(parsed.header, parsed.payload) != bytes)
          o.check(false, "shard does not roundtrip byte-identically");
        ++shards_checked;
      }

      auto damaged = original;
      for (std::uint64_t s = 0; s < original.manifest.stripe_count; ++s) {
        auto nodes = all_nodes(params);
        std::shuffle(nodes.begin(), nodes.end(), rng);
        for (int i = 0; i < losses; ++i) {
          auto& bytes = damaged.shards.at(store::ShardKey{s, nodes[static_cast<std::size_t>(i)]});
          if (i % 2 == 0) {
            damaged.shards.erase(store::ShardKey{s, nodes[static_cast<std::size_t>(i)]});
          } else {
            bytes[bytes.size() - 1] ^= 0x01;  // corrupt instead of delete
          }
        }
        ++stripes;
      }
      std::vector<std::uint8_t> decoded_damaged;
      try {
        decoded_damaged = store::decode_shard_set(damaged);
        store::repair_shard_set(damaged);
      } catch (const std::exception& e) {
        o.check(false, std::string("k=") + std::to_string(k) + ": " + e.what());
        continue;
      }
      o.check(decoded_damaged == data, "decode before repair differs at k=" + std::to_string(k));
      o.check(damaged.shards == original.shards, "repaired shards differ at k=" + std::to_string(k));
      o.check(store::decode_shard_set(damaged) == data, "decode after repair differs at k=" + std::to_string(k));
      ++files;
    }
  }
  if (o.pass)
    o.detail << files << " files, " << stripes << " stripes damaged and repaired, "
             << shards_checked << " shards roundtripped";
}

// 9. simulator
void simulator(Outcome& o) {
  sim::SimConfig random;
  random.k = 7;
  random.rounds = 500;
  random.failure_probability = 0.03;
  random.seed = 0x5eed0009;
  random.stripes = 4;
  random.repairs_per_round = 3;
  const auto a = sim::run_simulation(random);
  const auto b = sim::run_simulation(random);
  o.check(a == b, "same seed gave different metrics");
  o.check(a.repairs_completed > 0, "random run performed no repairs");
  std::int64_t units = 0;
  for (const auto& r : a.per_round) units += r.fragment_units;
  o.check(units == a.fragment_units_downloaded && a.helpers_contacted_total == units,
          "accounting identity broken");

  sim::SimConfig one;
  one.k = 5;
  one.trace = sim::FailureTrace{{0, {NodeId::systematic(0)}}};
  const auto m1 = sim::run_simulation(one);
  o.check(m1.fragment_units_downloaded == 3 && m1.repairs_completed == 1,
          "single-failure trace is not 3 units");
  sim::SimConfig pair = one;
  pair.trace = sim::FailureTrace{{0, {NodeId::systematic(0), NodeId::parity(0)}}};
  const auto m2 = sim::run_simulation(pair);
  o.check(m2.fragment_units_downloaded == 7 && m2.repairs_completed == 2,
          "partition-pair trace is not 7 units");
  if (o.pass)
    o.detail << "deterministic over " << a.repairs_completed << " repairs; traces: 3 and 7 units";
}

// 10. tradeoff direction at fixed storage 2M
void tradeoff(Outcome& o) {
  Rational previous(0);
  std::ostringstream shares;
  for (int k = 4; k <= 8; ++k) {
    const auto params = make_params(k);
    // storage: 2k nodes of M/k each
    const std::uint32_t fragment = 12;
    std::vector<std::uint8_t> file(static_cast<std::size_t>(k) * fragment, 0xA5);
    const auto set = store::encode_file(file, k, fragment, "m");
    std::uint64_t stored = 0;
    for (const auto& [key, bytes] : set.shards) stored += bytes.size() - store::kHeaderSize;
    o.check(stored == 2 * file.size(), "storage is not 2M at k=" + std::to_string(k));

    // every single failure, averaged, via the simulator
    std::int64_t units = 0, repairs = 0;
    for (auto id : all_nodes(params)) {
      sim::SimConfig c;
      c.k = k;
      c.trace = sim::FailureTrace{{0, {id}}};
      const auto m = sim::run_simulation(c);
      units += m.fragment_units_downloaded;
      repairs += m.repairs_completed;
    }
    const Rational of_file(units, repairs * k);
    o.check(of_file == Rational(3, k), "average single repair is not 3M/k at k=" + std::to_string(k));
    if (k > 4) o.check(of_file < previous, "not strictly decreasing at k=" + std::to_string(k));
    previous = of_file;
    shares << (k > 4 ? " > " : "") << of_file.numerator() << "/" << of_file.denominator();
  }
  if (o.pass) o.detail << "M x (" << shares.str() << ") for k=4..8";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"recovery-set counts", recovery_set_counts},
      {"three-failure tolerance", three_failures},
      {"distinct-partition tolerance", distinct_partitions},
      {"repair option counts", repair_options},
      {"repair bandwidth", repair_bandwidth_units},
      {"MSR baselines", baselines},
      {"exact repair", exact_repair},
      {"end-to-end pipeline", end_to_end},
      {"simulator determinism and accounting", simulator},
      {"tradeoff direction", tradeoff},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %2zu %s: %s -- %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.str().c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
