// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <json.hpp>

#include "nmds/analyzer.hpp"
#include "nmds/repair.hpp"
#include "nmds/simulator.hpp"

namespace nmds::report {

std::string rational(Rational r);

nlohmann::json to_json(const ErasurePattern& p);
nlohmann::json to_json(const ToleranceReport& r);
nlohmann::json to_json(const ClaimCheck& c);
nlohmann::json to_json(const RepairPlan& p);
nlohmann::json to_json(const BandwidthReport& b, const CodeParams& params);
nlohmann::json to_json(const sim::SimMetrics& m);
nlohmann::json to_json(const sim::BaselineComparison& c);

std::string table(const ToleranceReport& r);
std::string table(const sim::SimMetrics& m);
std::string table(const sim::BaselineComparison& c);

}  // namespace nmds::report
