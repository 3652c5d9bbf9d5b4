// SPDX-License-Identifier: Apache-2.0

#include "nmds/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nmds/analyzer.hpp"
#include "nmds/codec.hpp"
#include "nmds/repair.hpp"
#include "nmds/report.hpp"
#include "nmds/simulator.hpp"
#include "nmds/store.hpp"

namespace nmds::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad arguments that CLI11 itself cannot catch (k < 2, unknown node label).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CodeParams params_or_usage(int k) {
  try {
    return make_params(k);
  } catch (const CodeError& e) {
    throw UsageError(e.what());
  }
}

std::vector<std::uint8_t> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw store::StoreError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_all(path);
  return {bytes.begin(), bytes.end()};
}

struct EncodeArgs {
  int k = 0;
  std::uint32_t fragment_size = 0;
  std::string in;
  std::string out_dir;
  std::string name;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  params_or_usage(a.k);
  if (a.fragment_size == 0) throw UsageError("--fragment-size must be at least 1");
  const auto data = read_all(a.in);
  const std::string basename = a.name.empty() ? fs::path(a.in).filename().string() : a.name;
  const auto set = store::encode_file(data, a.k, a.fragment_size, basename);
  store::save_shard_set(a.out_dir, set);
  out << "encoded " << data.size() << " bytes into " << set.manifest.stripe_count
      << " stripe(s), " << set.shards.size() << " shards (k=" << a.k
      << ", fragment size " << a.fragment_size << ")\n";
  out << "manifest: " << (fs::path(a.out_dir) / (basename + ".manifest")).string() << "\n";
  return kExitOk;
}

struct DecodeArgs {
  std::string out;
  std::string shards;
  std::string name;
};

int cmd_decode(const DecodeArgs& a, std::ostream& out) {
  const auto set = store::load_shard_set(a.shards, a.name);
  const auto data = store::decode_shard_set(set);
  std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!f) throw store::StoreError("cannot write " + a.out);
  out << "decoded " << data.size() << " bytes from " << set.manifest.stripe_count
      << " stripe(s) to " << a.out << "\n";
  return kExitOk;
}

struct RepairArgs {
  std::string shards;
  std::vector<std::string> nodes;
  std::string name;
  bool json = false;
};

int cmd_repair(const RepairArgs& a, std::ostream& out) {
  auto set = store::load_shard_set(a.shards, a.name);
  const auto params = set.manifest.params();
  std::vector<NodeId> targets;
  for (const auto& label : a.nodes) {
    const auto id = parse_node(label);
    if (!id || !id->valid_for(params))
      throw UsageError("unknown node '" + label + "' for k=" + std::to_string(params.k()));
    targets.push_back(*id);
  }

  const auto outcome = store::repair_shard_set(set, targets);
  std::vector<store::ShardKey> written;
  for (const auto& s : outcome.stripes)
    for (const auto& p : s.plans) written.push_back({s.stripe, p.target});
  store::save_shards(a.shards, set, written);

  if (a.json) {
    json stripes = json::array();
    for (const auto& s : outcome.stripes) {
      json plans = json::array();
      for (const auto& p : s.plans) plans.push_back(report::to_json(p));
      stripes.push_back({{"stripe", s.stripe},
                         {"plans", plans},
                         {"bandwidth", report::to_json(repair_bandwidth(s.plans, set.manifest.fragment_size), params)}});
    }
    out << json{{"k", params.k()},
                {"repaired_shards", written.size()},
                {"stripes", stripes},
                {"per_stripe_max", report::to_json(outcome.per_stripe_max, params)},
                {"total", report::to_json(outcome.total, params)}}
               .dump(2)
        << "\n";
    return kExitOk;
  }

  if (outcome.stripes.empty()) {
    out << "nothing to repair\n";
    return kExitOk;
  }
  for (const auto& s : outcome.stripes) {
    const auto bw = repair_bandwidth(s.plans, set.manifest.fragment_size);
    for (const auto& p : s.plans) {
      out << "stripe " << s.stripe << ": " << to_string(p.target) << " <-";
      for (auto h : p.helpers) out << " " << to_string(h);
      out << "  (" << to_string(p.kind) << ", " << p.cost_fragments() << " units)\n";
    }
    out << "stripe " << s.stripe << " bandwidth: " << bw.fragment_units << " units = "
        << format_of_file(bw.of_file(params)) << ", " << bw.nodes_contacted
        << " helper downloads\n";
  }
  out << "repaired " << written.size() << " shard(s); total " << outcome.total.fragment_units
      << " fragment units, " << outcome.total.bytes_downloaded << " bytes downloaded\n";
  return kExitOk;
}

int cmd_analyze(int k, bool as_json, std::ostream& out) {
  const auto params = params_or_usage(k);
  const auto profile = tolerance_profile(params);
  const auto three = verify_three_failure_claim(params);
  const auto distinct = verify_distinct_partition_claim(params);
  const auto common = verify_common_partition_claim(params);
  if (as_json) {
    out << json{{"profile", report::to_json(profile)},
                {"three_failure_claim",
                 {{"holds", three.counterexamples.empty()},
                  {"counterexamples", report::to_json(three)["counterexamples"]}}},
                {"distinct_partition_claim", report::to_json(distinct)},
                {"common_partition_claim", report::to_json(common)}}
               .dump(2)
        << "\n";
    return kExitOk;
  }
  out << report::table(profile);
  out << "three-failure claim: " << (three.counterexamples.empty() ? "holds" : "fails") << "\n";
  for (const auto& p : three.counterexamples) out << "  counterexample " << to_string(p.failed) << "\n";
  out << "distinct-partition claim (" << distinct.patterns_checked << " patterns): "
      << (distinct.holds ? "holds" : "fails") << "\n";
  for (const auto& p : distinct.counterexamples)
    out << "  counterexample " << to_string(p.failed) << "\n";
  out << "common-partition claim (" << common.patterns_checked << " patterns): "
      << (common.holds ? "holds" : "fails") << "\n";
  for (const auto& p : common.counterexamples) out << "  counterexample " << to_string(p.failed) << "\n";
  return kExitOk;
}

int cmd_counts(int k, bool as_json, std::ostream& out) {
  const auto params = params_or_usage(k);
  const auto c = count_recovery_sets(params);
  const auto related = count_repair_options(params, RepairScenario::RelatedAlive);
  const auto a = count_repair_options(params, RepairScenario::StrategyA);
  const auto b = count_repair_options(params, RepairScenario::StrategyB);

  json doc{{"k", k},
           {"strategy_i", c.strategy_i.str()},
           {"strategy_ii", c.strategy_ii.str()},
           {"total", c.total.str()},
           {"related_alive", related.str()},
           {"strategy_a", a.str()},
           {"strategy_b", b.str()}};
  bool consistent = true;

  if (k <= kDefaultEnumerationBound) {
    const auto sets = enumerate_recovery_sets(params);
    std::size_t si = 0;
    for (const auto& s : sets) si += s.classification.is_strategy_i() ? 1 : 0;
    doc["enumerated"] = {{"strategy_i", si},
                         {"strategy_ii", sets.size() - si},
                         {"total", sets.size()},
                         {"subsets", binomial(params.n(), k)}};
    consistent = consistent && BigCount(si) == c.strategy_i && BigCount(sets.size()) == c.total;
  }
  if (k <= kDefaultPlanEnumerationBound) {
    auto alive_without = [&](std::initializer_list<NodeId> gone) {
      std::vector<NodeId> alive;
      for (auto id : all_nodes(params))
        if (std::find(gone.begin(), gone.end(), id) == gone.end()) alive.push_back(id);
      return alive;
    };
    const auto s1 = NodeId::systematic(0);
    const auto p1 = NodeId::parity(0);
    const auto plans_s1 = plan_single_repairs(params, s1, alive_without({s1}));
    const auto three = std::count_if(plans_s1.begin(), plans_s1.end(), [](const RepairPlan& p) {
      return p.kind == PlanKind::ThreeNode;
    });
    const auto plans_a = plan_single_repairs(params, p1, alive_without({s1, p1}));
    const auto plans_b = plan_single_repairs(params, s1, alive_without({s1, p1}));
    doc["enumerated_repair"] = {{"related_alive", three},
                                {"strategy_a", plans_a.size()},
                                {"strategy_b", plans_b.size()}};
    consistent = consistent && BigCount(three) == related && BigCount(plans_a.size()) == a &&
                 BigCount(plans_b.size()) == b;
  }
  doc["consistent"] = consistent;

  if (as_json) {
    out << doc.dump(2) << "\n";
  } else {
    out << "k = " << k << " (" << params.n() << " nodes)\n";
    out << "recovery sets: strategy_i = " << c.strategy_i << ", strategy_ii = " << c.strategy_ii
        << ", total = " << c.total << "\n";
    if (doc.contains("enumerated")) {
      const auto& e = doc["enumerated"];
      out << "enumerated:    strategy_i = " << e["strategy_i"] << ", strategy_ii = "
          << e["strategy_ii"] << ", total = " << e["total"] << " of " << e["subsets"]
          << " subsets\n";
    }
    out << "repair options: related_alive = " << related << ", strategy_a = " << a
        << ", strategy_b = " << b << "\n";
    if (doc.contains("enumerated_repair")) {
      const auto& e = doc["enumerated_repair"];
      out << "enumerated:     related_alive = " << e["related_alive"] << ", strategy_a = "
          << e["strategy_a"] << ", strategy_b = " << e["strategy_b"] << "\n";
    }
    out << (consistent ? "formulas match enumeration\n" : "MISMATCH between formulas and enumeration\n");
  }
  return consistent ? kExitOk : kExitFailure;
}

struct SimulateArgs {
  std::string config;
  int k = 0;
  int rounds = -1;
  double fail_prob = -1.0;
  std::string trace;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int repairs_per_round = -1;
  int stripes = 0;
  int d = 0;
  bool json = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  sim::SimConfig config;
  try {
    if (!a.config.empty()) config = sim::parse_config(read_text(a.config));
    if (a.k != 0) config.k = a.k;
    if (a.rounds >= 0) config.rounds = a.rounds;
    if (a.fail_prob >= 0.0) config.failure_probability = a.fail_prob;
    if (a.seed_set) config.seed = a.seed;
    if (a.repairs_per_round >= 0) config.repairs_per_round = a.repairs_per_round;
    if (a.stripes > 0) config.stripes = a.stripes;
    const auto params = make_params(config.k);
    if (!a.trace.empty()) config.trace = sim::parse_trace(read_text(a.trace), params);
    sim::validate(config);
  } catch (const CodeError& e) {
    throw UsageError(e.what());
  }
  const int d = a.d != 0 ? a.d : config.k + 1;
  if (d < config.k || d > 2 * config.k - 1)
    throw UsageError("--d must lie in [k, 2k-1]");

  const auto metrics = sim::run_simulation(config);
  const auto cmp = sim::compare_baselines(metrics, config.k, d);
  if (a.json) {
    out << json{{"k", config.k},
                {"rounds", config.rounds},
                {"seed", config.seed},
                {"stripes", config.stripes},
                {"metrics", report::to_json(metrics)},
                {"baselines", report::to_json(cmp)}}
               .dump(2)
        << "\n";
  } else {
    out << "k = " << config.k << ", rounds = " << config.rounds << ", stripes = " << config.stripes
        << ", seed = " << config.seed << "\n";
    out << report::table(metrics) << "\n" << report::table(cmp);
  }
  return kExitOk;
}

int cmd_scrub(const std::string& shards, const std::string& name, std::ostream& out) {
  const auto set = store::load_shard_set(shards, name);
  const auto r = store::scrub(set);
  if (r.clean()) {
    out << "all " << set.manifest.stripe_count << " stripe(s) intact\n";
    return kExitOk;
  }
  for (const auto& [stripe, findings] : r.by_stripe) {
    out << "stripe " << stripe << ":";
    for (const auto& f : findings) out << " " << to_string(f.node) << "(" << store::to_string(f.reason) << ")";
    out << "\n";
  }
  return kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nmds: (2k,k) XOR storage code toolkit"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "split a file into stripes and write 2k shards per stripe");
  encode->add_option("--k", enc.k, "number of partitions (k >= 2)")->required();
  encode->add_option("--fragment-size", enc.fragment_size, "bytes per packet")->required();
  encode->add_option("--in", enc.in, "input file")->required();
  encode->add_option("--out-dir", enc.out_dir, "directory for shards and manifest")->required();
  encode->add_option("--name", enc.name, "shard basename (default: input file name)");

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "reassemble a file from any decodable shard subset");
  decode->add_option("--out", dec.out, "output file")->required();
  decode->add_option("--shards", dec.shards, "shard directory")->required();
  decode->add_option("--name", dec.name, "basename when the directory holds several files");

  RepairArgs rep;
  auto* repair = app.add_subcommand("repair", "regenerate missing or corrupt shards");
  repair->add_option("--shards", rep.shards, "shard directory")->required();
  repair->add_option("--node", rep.nodes, "node to repair (S1..Sk, P1..Pk); repeatable, default all damaged");
  repair->add_option("--name", rep.name, "basename when the directory holds several files");
  repair->add_flag("--json", rep.json, "machine-readable output");

  int analyze_k = 0;
  bool analyze_json = false;
  auto* analyze = app.add_subcommand("analyze", "exhaustive fault-tolerance profile (2k <= 24)");
  analyze->add_option("--k", analyze_k, "number of partitions")->required();
  analyze->add_flag("--json", analyze_json, "machine-readable output");

  int counts_k = 0;
  bool counts_json = false;
  auto* counts = app.add_subcommand("counts", "recovery-set and repair-option counts");
  counts->add_option("--k", counts_k, "number of partitions")->required();
  counts->add_flag("--json", counts_json, "machine-readable output");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "round-based failure and repair simulation");
  simulate->add_option("--config", sa.config, "key = value config file");
  simulate->add_option("--k", sa.k, "number of partitions");
  simulate->add_option("--rounds", sa.rounds, "rounds to simulate");
  auto* prob = simulate->add_option("--fail-prob", sa.fail_prob, "per-node per-round failure probability");
  auto* trace = simulate->add_option("--trace", sa.trace, "scripted failures: '<round> <node>...' lines");
  prob->excludes(trace);
  simulate->add_option("--seed", sa.seed, "64-bit RNG seed")->each([&sa](const std::string&) { sa.seed_set = true; });
  simulate->add_option("--repairs-per-round", sa.repairs_per_round, "repair budget per round (0 = unlimited)");
  simulate->add_option("--stripes", sa.stripes, "independent placement groups");
  simulate->add_option("--d", sa.d, "MSR helper count for the baseline (default k+1)");
  simulate->add_flag("--json", sa.json, "machine-readable output");

  std::string scrub_dir;
  std::string scrub_name;
  auto* scrub = app.add_subcommand("scrub", "report missing or corrupt shards");
  scrub->add_option("--shards", scrub_dir, "shard directory")->required();
  scrub->add_option("--name", scrub_name, "basename when the directory holds several files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*encode) return cmd_encode(enc, out);
    if (*decode) return cmd_decode(dec, out);
    if (*repair) return cmd_repair(rep, out);
    if (*analyze) return cmd_analyze(analyze_k, analyze_json, out);
    if (*counts) return cmd_counts(counts_k, counts_json, out);
    if (*simulate) return cmd_simulate(sa, out);
    if (*scrub) return cmd_scrub(scrub_dir, scrub_name, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace nmds::cli
