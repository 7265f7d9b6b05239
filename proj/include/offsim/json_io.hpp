#pragma once

#include <string>

#include "json.hpp"
#include "offsim/alloc.hpp"
#include "offsim/planner.hpp"
#include "offsim/simulator.hpp"
#include "offsim/traffic.hpp"

namespace offsim {

using Json = nlohmann::ordered_json;

// All floating-point output is rounded to 6 significant digits before
// serialization so reports are byte-deterministic across runs.
double round_sig(double v, int digits = 6);

Json ledger_to_json(const TrafficLedger& ledger);
std::string ledger_to_csv(const TrafficLedger& ledger);

Json report_to_json(const SimReport& report);
Json planner_to_json(const PlannerSolution& sol);
Json alloc_to_json(const AllocPlan& plan);

// Full plan dump / reload; reloading a dumped plan and simulating it yields
// an identical report.
Json plan_to_json(const SchedulePlan& plan);
SchedulePlan plan_from_json(const Json& j);

}  // namespace offsim
