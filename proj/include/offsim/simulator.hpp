#pragma once

#include <map>
#include <string>

#include "offsim/machine.hpp"
#include "offsim/schedule.hpp"
#include "offsim/traffic.hpp"

namespace offsim {

// Execution resources. Each runs at most one task at a time, in plan order.
enum class Resource { GPU, CPU, H2D, D2H, SSD_R, SSD_W };
inline constexpr int kNumResources = 6;

const char* resource_name(Resource r);

struct SimReport {
  double iteration_time = 0.0;          // steady-state, measured on the middle
                                        // of three simulated iterations
  double throughput = 0.0;              // samples / second across all GPUs
  TrafficLedger ledger;                 // per-iteration transfer bytes
  u64 gpu_mem_needed = 0;
  u64 cpu_mem_needed = 0;
  std::map<std::string, double> utilization;  // resource -> busy fraction
  std::string bound_class;              // most-utilized resource ("compute",
                                        // "pcie_h2d", "ssd_read", ...)
};

// Runs the plan under strict in-order list scheduling: tasks start at the
// earliest time all dependencies have finished and their resource is free,
// dispatched in plan-index order. Three back-to-back iterations are chained
// through cross-iteration dependencies; the middle one is measured.
SimReport simulate(const SchedulePlan& plan, const MachineSpec& machine);

}  // namespace offsim
