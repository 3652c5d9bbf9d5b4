// SPDX-License-Identifier: Apache-2.0

#include "nmds/simulator.hpp"

#include <charconv>
#include <random>
#include <sstream>

#include "nmds/analyzer.hpp"

namespace nmds::sim {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw CodeError(ErrorKind::InvalidParameter, what);
}

struct StripeState {
  std::vector<bool> down;
  bool frozen = false;

  std::vector<NodeId> failed() const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < down.size(); ++i)
      if (down[i]) out.push_back(NodeId::from_index(static_cast<int>(i)));
    return out;
  }
  int count_down() const {
    int c = 0;
    for (bool d : down) c += d ? 1 : 0;
    return c;
  }
};

double unit_interval(std::uint64_t draw) {
  return static_cast<double>(draw >> 11) * 0x1.0p-53;
}

}  // namespace

void validate(const SimConfig& c) {
  const auto params = make_params(c.k);
  if (c.rounds < 0) invalid("rounds must be non-negative");
  if (!(c.failure_probability >= 0.0 && c.failure_probability <= 1.0))
    invalid("failure probability must lie in [0, 1]");
  if (c.repairs_per_round < 0) invalid("repairs_per_round must be non-negative");
  if (c.stripes < 1) invalid("stripes must be at least 1");
  if (c.trace) {
    for (const auto& [round, nodes] : *c.trace) {
      if (round < 0 || round >= c.rounds)
        invalid("trace round " + std::to_string(round) + " outside [0, " +
                std::to_string(c.rounds) + ")");
      for (auto id : nodes)
        if (!id.valid_for(params))
          invalid("trace node " + to_string(id) + " does not exist for k=" + std::to_string(c.k));
    }
  }
}

SimMetrics run_simulation(const SimConfig& config) {
  validate(config);
  const auto params = make_params(config.k);
  const auto n = static_cast<std::size_t>(params.n());
  std::mt19937_64 rng(config.seed);
  std::vector<StripeState> stripes(static_cast<std::size_t>(config.stripes),
                                   StripeState{std::vector<bool>(n, false)});
  SimMetrics m;

  for (int round = 0; round < config.rounds; ++round) {
    RoundLog log;
    log.round = round;

    // inject
    for (auto& st : stripes) {
      if (config.trace) {
        auto it = config.trace->find(round);
        if (it == config.trace->end() || st.frozen) continue;
        for (auto id : it->second) {
          const auto i = static_cast<std::size_t>(id.index());
          if (!st.down[i]) ++log.failures_injected;
          st.down[i] = true;
        }
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          const bool fail = unit_interval(rng()) < config.failure_probability;
          if (fail && !st.down[i] && !st.frozen) {
            st.down[i] = true;
            ++log.failures_injected;
          }
        }
      }
    }

    // loss check
    for (auto& st : stripes) {
      if (st.frozen) continue;
      if (!is_recoverable(params, ErasurePattern{st.failed()})) {
        st.frozen = true;
        ++log.data_loss_events;
      }
    }

    // repair
    std::size_t budget = config.repairs_per_round == 0
                             ? SIZE_MAX
                             : static_cast<std::size_t>(config.repairs_per_round);
    for (auto& st : stripes) {
      if (st.frozen || budget == 0) continue;
      const auto failed = st.failed();
      if (failed.empty()) continue;
      const auto plans = plan_cheapest_first(params, failed, {}, budget);
      for (const auto& p : plans) {
        st.down[static_cast<std::size_t>(p.target.index())] = false;
        log.fragment_units += p.cost_fragments();
        m.helpers_contacted_total += static_cast<std::int64_t>(p.helpers.size());
      }
      log.repairs += static_cast<int>(plans.size());
      budget -= plans.size();
    }

    for (const auto& st : stripes) log.nodes_down += st.count_down();
    m.fragment_units_downloaded += log.fragment_units;
    m.repairs_completed += log.repairs;
    m.data_loss_events += log.data_loss_events;
    m.per_round.push_back(log);
  }
  return m;
}

BaselineComparison compare_baselines(const SimMetrics& metrics, int k, int d) {
  const auto params = make_params(k);
  BaselineComparison c;
  c.k = k;
  c.d = d;
  c.msr_units = msr_repair_units(params.n(), k, d);
  c.msr_helpers = d;
  c.naive_units = k;
  c.naive_helpers = k;
  c.repairs = metrics.repairs_completed;
  if (metrics.repairs_completed > 0) {
    c.measured_units_per_repair =
        Rational(metrics.fragment_units_downloaded, metrics.repairs_completed);
    c.measured_helpers_per_repair =
        Rational(metrics.helpers_contacted_total, metrics.repairs_completed);
  }
  std::vector<NodeId> alive;
  for (auto id : all_nodes(params))
    if (id != NodeId::systematic(0)) alive.push_back(id);
  const auto best = best_single_repair(params, NodeId::systematic(0), alive);
  c.single_repair_units = best.cost_fragments();
  c.single_repair_helpers = static_cast<int>(best.helpers.size());
  return c;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <typename T>
T number(std::string_view key, std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    invalid("bad value for " + std::string(key) + ": '" + std::string(v) + "'");
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    ++line_no;
    line = trim(line);
    if (!line.empty()) fn(line, line_no);
    pos = eol + 1;
  }
}

}  // namespace

SimConfig parse_config(std::string_view text) {
  SimConfig c;
  for_each_line(text, [&](std::string_view line, int line_no) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      invalid("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "k") c.k = number<int>(key, value);
    else if (key == "rounds") c.rounds = number<int>(key, value);
    else if (key == "fail_prob") c.failure_probability = number<double>(key, value);
    else if (key == "seed") c.seed = number<std::uint64_t>(key, value);
    else if (key == "repairs_per_round") c.repairs_per_round = number<int>(key, value);
    else if (key == "stripes") c.stripes = number<int>(key, value);
    else if (key == "policy") {
      if (value != "cheapest-first") invalid("unknown repair policy '" + std::string(value) + "'");
      c.policy = RepairPolicy::CheapestFirst;
    } else {
      invalid("unknown config key '" + std::string(key) + "'");
    }
  });
  return c;
}

FailureTrace parse_trace(std::string_view text, const CodeParams& params) {
  FailureTrace trace;
  for_each_line(text, [&](std::string_view line, int line_no) {
    std::string buf(line);
    for (auto& ch : buf)
      if (ch == ',' || ch == ':') ch = ' ';
    std::istringstream in(buf);
    std::string round_text;
    in >> round_text;
    const int round = number<int>("trace round", round_text);
    auto& nodes = trace[round];
    std::string label;
    while (in >> label) {
      const auto id = parse_node(label);
      if (!id || !id->valid_for(params))
        invalid("trace line " + std::to_string(line_no) + ": bad node '" + label + "'");
      nodes.push_back(*id);
    }
  });
  return trace;
}

}  // namespace nmds::sim
