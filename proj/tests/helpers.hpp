#pragma once

#include "offsim/machine.hpp"
#include "offsim/model.hpp"
#include "offsim/schedule.hpp"

namespace offsim::testing {

// Small geometry that keeps plans tiny while exercising every code path.
inline ModelSpec tiny_model(int num_layers = 4, int hidden_dim = 64,
                            int seq_len = 32, int microbatch_size = 2) {
  ModelSpec m;
  m.num_layers = num_layers;
  m.hidden_dim = hidden_dim;
  m.num_heads = 4;
  m.seq_len = seq_len;
  m.microbatch_size = microbatch_size;
  return m;
}

// Roomy machine: memory never binds, bandwidths distinct so link mixups
// change results.
inline MachineSpec roomy_machine() {
  MachineSpec mc;
  mc.gpu_mem_bytes = 1ull << 40;
  mc.cpu_usable_dram_bytes = 1ull << 44;
  mc.pcie_h2d_bw = 2.0e8;
  mc.pcie_d2h_bw = 1.5e8;
  mc.ssd_read_bw = 5.0e7;
  mc.ssd_write_bw = 4.0e7;
  mc.fwd_compute_time_per_layer_per_mb = 0.010;
  mc.bwd_compute_time_per_layer_per_mb = 0.021;
  mc.cpu_step_throughput = 2.0e8;
  mc.gpu_working_set_bytes = 1 << 20;
  return mc;
}

inline StorageSplit split_of(double c, double p, double o) {
  StorageSplit s;
  s.x_ckpt = c;
  s.x_param = p;
  s.x_opt = o;
  return s;
}

}  // namespace offsim::testing
