#include "offsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace offsim {

const char* resource_name(Resource r) {
  switch (r) {
    case Resource::GPU: return "compute";
    case Resource::CPU: return "cpu_step";
    case Resource::H2D: return "pcie_h2d";
    case Resource::D2H: return "pcie_d2h";
    case Resource::SSD_R: return "ssd_read";
    case Resource::SSD_W: return "ssd_write";
  }
  return "?";
}

namespace {

Resource task_resource(const Task& t, const MachineSpec& machine) {
  switch (t.kind) {
    case TaskKind::FwdCompute:
    case TaskKind::RecomputeAndBwd:
    case TaskKind::FixedOps:
      return Resource::GPU;
    case TaskKind::CpuStep:
      return Resource::CPU;
    case TaskKind::Xfer:
      switch (t.link) {
        case LinkKind::PCIe_H2D: return Resource::H2D;
        case LinkKind::PCIe_D2H: return Resource::D2H;
        // A half-duplex SSD serializes reads and writes on one queue.
        case LinkKind::SSD_Read: return Resource::SSD_R;
        case LinkKind::SSD_Write:
          return machine.ssd_duplex ? Resource::SSD_W : Resource::SSD_R;
      }
  }
  return Resource::GPU;
}

double task_duration(const Task& t, const SchedulePlan& plan,
                     const MachineSpec& machine) {
  switch (t.kind) {
    case TaskKind::FwdCompute:
      return machine.fwd_compute_time_per_layer_per_mb * plan.compute_scale;
    case TaskKind::RecomputeAndBwd:
      return machine.bwd_compute_time_per_layer_per_mb * plan.compute_scale;
    case TaskKind::CpuStep:
      return optimizer_step_time(t.elements, machine);
    case TaskKind::FixedOps:
      return machine.fixed_overhead_time;
    case TaskKind::Xfer:
      return transfer_time(t.bytes, t.link, machine);
  }
  return 0.0;
}

void check_plan(const SchedulePlan& plan) {
  const int n = static_cast<int>(plan.tasks.size());
  for (int i = 0; i < n; ++i) {
    const Task& t = plan.tasks[static_cast<size_t>(i)];
    if (t.id != i) throw PlanBugError("task id does not match its position");
    for (int d : t.deps)
      if (d < 0 || d >= i)
        throw PlanBugError("dependency does not precede its task in plan order");
    if (t.cross_iter_dep < -1 || t.cross_iter_dep >= n)
      throw PlanBugError("cross-iteration dependency out of range");
  }
}

}  // namespace

SimReport simulate(const SchedulePlan& plan, const MachineSpec& machine) {
  machine.validate();
  check_plan(plan);

  SimReport report;
  report.ledger = plan_traffic(plan);
  report.gpu_mem_needed =
      plan.gpu_static_bytes +
      static_cast<u64>(std::llround(static_cast<double>(machine.gpu_working_set_bytes) *
                                    plan.compute_scale));
  report.cpu_mem_needed = plan.cpu_peak_bytes;
  if (report.gpu_mem_needed > machine.gpu_mem_bytes) {
    std::ostringstream msg;
    msg << "GPU memory exceeded: needs " << report.gpu_mem_needed << " bytes of "
        << machine.gpu_mem_bytes << "; binding consumer: " << plan.gpu_binding;
    throw InfeasibleError(msg.str());
  }
  if (report.cpu_mem_needed > machine.cpu_usable_dram_bytes) {
    std::ostringstream msg;
    msg << "CPU memory exceeded: needs " << report.cpu_mem_needed
        << " bytes of usable DRAM " << machine.cpu_usable_dram_bytes;
    throw InfeasibleError(msg.str());
  }

  const int n = static_cast<int>(plan.tasks.size());
  constexpr int kIters = 3;
  std::vector<double> finish(static_cast<size_t>(n) * kIters, 0.0);
  std::array<double, kNumResources> res_free{};
  std::array<double, kNumResources> mid_busy{};
  std::array<double, kIters> iter_end{};

  for (int it = 0; it < kIters; ++it) {
    for (int i = 0; i < n; ++i) {
      const Task& t = plan.tasks[static_cast<size_t>(i)];
      double start = 0.0;
      for (int d : t.deps)
        start = std::max(start, finish[static_cast<size_t>(it) * n + d]);
      if (it > 0 && t.cross_iter_dep >= 0)
        start = std::max(
            start, finish[static_cast<size_t>(it - 1) * n + t.cross_iter_dep]);
      Resource r = task_resource(t, machine);
      start = std::max(start, res_free[static_cast<size_t>(r)]);
      double dur = task_duration(t, plan, machine);
      double end = start + dur;
      finish[static_cast<size_t>(it) * n + i] = end;
      res_free[static_cast<size_t>(r)] = end;
      iter_end[static_cast<size_t>(it)] = std::max(iter_end[static_cast<size_t>(it)], end);
      if (it == 1) mid_busy[static_cast<size_t>(r)] += dur;
    }
  }

  report.iteration_time = iter_end[1] - iter_end[0];
  if (report.iteration_time <= 0.0)
    throw PlanBugError("non-positive steady-state iteration time");
  report.throughput = static_cast<double>(plan.samples_per_iteration) *
                      static_cast<double>(machine.num_gpus) / report.iteration_time;

  double best = -1.0;
  Resource bound = Resource::GPU;
  for (int r = 0; r < kNumResources; ++r) {
    if (!machine.ssd_duplex && static_cast<Resource>(r) == Resource::SSD_W) continue;
    double u = mid_busy[static_cast<size_t>(r)] / report.iteration_time;
    std::string name = resource_name(static_cast<Resource>(r));
    if (!machine.ssd_duplex && static_cast<Resource>(r) == Resource::SSD_R) name = "ssd";
    report.utilization[name] = u;
    // Ties go to compute: GPU is scanned first and must be strictly beaten.
    if (u > best + 1e-12) {
      best = u;
      bound = static_cast<Resource>(r);
    }
  }
  report.bound_class = resource_name(bound);
  if (!machine.ssd_duplex && bound == Resource::SSD_R) report.bound_class = "ssd";
  return report;
}

}  // namespace offsim
