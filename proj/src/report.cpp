// SPDX-License-Identifier: Apache-2.0

#include "nmds/report.hpp"

#include <iomanip>
#include <sstream>

namespace nmds::report {

using nlohmann::json;

std::string rational(Rational r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

json to_json(const ErasurePattern& p) {
  json out = json::array();
  for (auto id : p.failed) out.push_back(to_string(id));
  return out;
}

json to_json(const ToleranceReport& r) {
  json sizes = json::array();
  for (const auto& s : r.per_size)
    sizes.push_back({{"failures", s.failures}, {"recoverable", s.recoverable}, {"total", s.total}});
  json cex = json::array();
  for (const auto& p : r.counterexamples) cex.push_back(to_json(p));
  return {{"k", r.k},
          {"max_all_patterns_tolerated", r.max_all_patterns_tolerated},
          {"per_size", sizes},
          {"counterexamples", cex}};
}

json to_json(const ClaimCheck& c) {
  json cex = json::array();
  for (const auto& p : c.counterexamples) cex.push_back(to_json(p));
  return {{"holds", c.holds}, {"patterns_checked", c.patterns_checked}, {"counterexamples", cex}};
}

json to_json(const RepairPlan& p) {
  json helpers = json::array();
  for (auto h : p.helpers) helpers.push_back(to_string(h));
  return {{"target", to_string(p.target)},
          {"kind", to_string(p.kind)},
          {"helpers", helpers},
          {"cost_fragments", p.cost_fragments()}};
}

json to_json(const BandwidthReport& b, const CodeParams& params) {
  return {{"fragment_units", b.fragment_units},
          {"bytes_downloaded", b.bytes_downloaded},
          {"nodes_contacted", b.nodes_contacted},
          {"distinct_nodes", b.distinct_nodes},
          {"of_file", format_of_file(b.of_file(params))}};
}

json to_json(const sim::SimMetrics& m) {
  json rounds = json::array();
  for (const auto& r : m.per_round)
    rounds.push_back({{"round", r.round},
                      {"failures", r.failures_injected},
                      {"repairs", r.repairs},
                      {"fragment_units", r.fragment_units},
                      {"data_loss_events", r.data_loss_events},
                      {"nodes_down", r.nodes_down}});
  return {{"fragment_units_downloaded", m.fragment_units_downloaded},
          {"repairs_completed", m.repairs_completed},
          {"helpers_contacted_total", m.helpers_contacted_total},
          {"data_loss_events", m.data_loss_events},
          {"per_round", rounds}};
}

json to_json(const sim::BaselineComparison& c) {
  return {{"k", c.k},
          {"d", c.d},
          {"repairs", c.repairs},
          {"measured_units_per_repair", rational(c.measured_units_per_repair)},
          {"measured_helpers_per_repair", rational(c.measured_helpers_per_repair)},
          {"single_repair_units", c.single_repair_units},
          {"single_repair_helpers", c.single_repair_helpers},
          {"naive_units", c.naive_units},
          {"naive_helpers", c.naive_helpers},
          {"msr_units", rational(c.msr_units)},
          {"msr_helpers", c.msr_helpers}};
}

std::string table(const ToleranceReport& r) {
  std::ostringstream out;
  out << "k = " << r.k << " (" << 2 * r.k << " nodes)\n";
  out << "max tolerated: " << r.max_all_patterns_tolerated << "\n";
  out << std::setw(9) << "failures" << std::setw(14) << "recoverable" << std::setw(12) << "total"
      << "\n";
  for (const auto& s : r.per_size)
    out << std::setw(9) << s.failures << std::setw(14) << s.recoverable << std::setw(12)
        << s.total << "\n";
  if (!r.counterexamples.empty()) {
    out << "counterexamples (" << r.counterexamples.size() << "):\n";
    for (const auto& p : r.counterexamples) out << "  " << to_string(p.failed) << "\n";
  }
  return out.str();
}

std::string table(const sim::SimMetrics& m) {
  std::ostringstream out;
  out << "repairs completed:     " << m.repairs_completed << "\n"
      << "fragment units:        " << m.fragment_units_downloaded << "\n"
      << "helpers contacted:     " << m.helpers_contacted_total << "\n"
      << "data loss events:      " << m.data_loss_events << "\n";
  return out.str();
}

std::string table(const sim::BaselineComparison& c) {
  std::ostringstream out;
  out << std::left << std::setw(28) << "scheme" << std::setw(18) << "units/repair"
      << "helpers\n";
  out << std::setw(28) << "this code (measured)" << std::setw(18)
      << rational(c.measured_units_per_repair) << rational(c.measured_helpers_per_repair) << "\n";
  out << std::setw(28) << "this code (single failure)" << std::setw(18) << c.single_repair_units
      << c.single_repair_helpers << "\n";
  out << std::setw(28) << ("MSR (d=" + std::to_string(c.d) + ")") << std::setw(18)
      << rational(c.msr_units) << c.msr_helpers << "\n";
  out << std::setw(28) << "naive MDS" << std::setw(18) << c.naive_units << c.naive_helpers
      << "\n";
  out << "(1 unit = M/" << c.k << ")\n";
  return out.str();
}

}  // namespace nmds::report
