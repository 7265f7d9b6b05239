#ifndef OFFSIM_MACHINE_HPP
#define OFFSIM_MACHINE_HPP

#include "offsim/types.hpp"

namespace offsim {

enum class LinkKind { PCIe_H2D, PCIe_D2H, SSD_Read, SSD_Write };

// Calibrated hardware parameters. This artifact takes benchmark numbers as
// input; it does not measure the host.
struct MachineSpec {
  u64 gpu_mem_bytes = 0;
  u64 cpu_usable_dram_bytes = 0;
  double pcie_h2d_bw = 0;  // bytes/s
  double pcie_d2h_bw = 0;
  double ssd_read_bw = 0;
  double ssd_write_bw = 0;
  double fwd_compute_time_per_layer_per_mb = 0;  // seconds
  double bwd_compute_time_per_layer_per_mb = 0;  // seconds, includes recompute
  double cpu_step_throughput = 0;                // elements/s
  double fixed_overhead_time = 0;                // embedding/head/loss, per iteration
  int num_gpus = 1;
  // Per-layer, per-micro-batch GPU activation working set. Calibrated input;
  // there is no closed-form expression for it.
  u64 gpu_working_set_bytes = 0;
  // When true, SSD reads and writes proceed on independent queues; when
  // false they serialize on one device queue. Applies to both the simulator
  // and the I/O roofline so simulated points stay under the roofline.
  bool ssd_duplex = true;

  void validate() const;
};

double transfer_time(u64 bytes, LinkKind link, const MachineSpec& machine);
double optimizer_step_time(u64 elements, const MachineSpec& machine);

const char* link_name(LinkKind link);

}  // namespace offsim

#endif  // OFFSIM_MACHINE_HPP
