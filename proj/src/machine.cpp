#include "offsim/machine.hpp"

namespace offsim {

void MachineSpec::validate() const {
  if (gpu_mem_bytes == 0) throw ValidationError("machine.gpu_mem_bytes must be > 0");
  if (cpu_usable_dram_bytes == 0)
    throw ValidationError("machine.cpu_usable_dram_bytes must be > 0");
  if (pcie_h2d_bw <= 0) throw ValidationError("machine.pcie_h2d_bw must be > 0");
  if (pcie_d2h_bw <= 0) throw ValidationError("machine.pcie_d2h_bw must be > 0");
  if (ssd_read_bw <= 0) throw ValidationError("machine.ssd_read_bw must be > 0");
  if (ssd_write_bw <= 0) throw ValidationError("machine.ssd_write_bw must be > 0");
  if (fwd_compute_time_per_layer_per_mb < 0)
    throw ValidationError("machine.fwd_compute_time_per_layer_per_mb must be >= 0");
  if (bwd_compute_time_per_layer_per_mb < 0)
    throw ValidationError("machine.bwd_compute_time_per_layer_per_mb must be >= 0");
  if (cpu_step_throughput <= 0)
    throw ValidationError("machine.cpu_step_throughput must be > 0");
  if (fixed_overhead_time < 0)
    throw ValidationError("machine.fixed_overhead_time must be >= 0");
  if (num_gpus < 1) throw ValidationError("machine.num_gpus must be >= 1");
}

double transfer_time(u64 bytes, LinkKind link, const MachineSpec& machine) {
  if (bytes == 0) return 0.0;
  double bw = 0;
  switch (link) {
    case LinkKind::PCIe_H2D: bw = machine.pcie_h2d_bw; break;
    case LinkKind::PCIe_D2H: bw = machine.pcie_d2h_bw; break;
    case LinkKind::SSD_Read: bw = machine.ssd_read_bw; break;
    case LinkKind::SSD_Write: bw = machine.ssd_write_bw; break;
    default: throw ValidationError("unknown link kind");
  }
  return static_cast<double>(bytes) / bw;
}

double optimizer_step_time(u64 elements, const MachineSpec& machine) {
  if (elements == 0) return 0.0;
  return static_cast<double>(elements) / machine.cpu_step_throughput;
}

const char* link_name(LinkKind link) {
  switch (link) {
    case LinkKind::PCIe_H2D: return "H2D";
    case LinkKind::PCIe_D2H: return "D2H";
    case LinkKind::SSD_Read: return "SSD_read";
    case LinkKind::SSD_Write: return "SSD_write";
  }
  return "?";
}

}  // namespace offsim
