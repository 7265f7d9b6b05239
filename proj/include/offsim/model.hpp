#ifndef OFFSIM_MODEL_HPP
#define OFFSIM_MODEL_HPP

#include "offsim/types.hpp"

namespace offsim {

// GPT-style model geometry. Uniform Transformer layers; embedding and LM
// head are charged as a fixed additive term in MachineSpec instead of being
// modeled per layer.
struct ModelSpec {
  int num_layers = 1;       // N
  int hidden_dim = 1;       // h
  int num_heads = 1;
  int seq_len = 1;          // s
  int microbatch_size = 1;  // b
  int low_precision_bytes = 2;
  int full_precision_bytes = 4;
  int optimizer_states_per_element = 3;  // Adam: master param, momentum, variance
  int data_parallel_degree = 1;

  void validate() const;
};

// Per-layer derived sizes. Parameter count per layer is fixed at 12*h^2
// (4h^2 attention projections + 8h^2 FFN); bias/norm terms are negligible.
struct LayerSizes {
  u64 param_elements = 0;       // P = 12*h^2
  u64 param_bytes_low = 0;      // P * low_precision_bytes
  u64 grad_bytes_full = 0;      // P * full_precision_bytes
  u64 opt_state_bytes = 0;      // P * states_per_element * full_precision_bytes
  u64 ckpt_elements_per_mb = 0; // b*s*h
  u64 ckpt_bytes_per_mb = 0;    // b*s*h * low_precision_bytes
};

struct ModelTotals {
  u64 param_elements = 0;
  u64 param_bytes_low = 0;      // ms
  u64 ckpt_bytes_per_mb = 0;    // cs (aggregated over layers, one micro-batch)
  u64 opt_state_bytes = 0;
  u64 grad_bytes_full = 0;
};

LayerSizes derive_layer_sizes(const ModelSpec& spec);

// Whole-model totals: per-layer sizes times num_layers. Checkpoint bytes are
// per data-parallel replica; the aggregate system-wide checkpoint volume is
// cs * data_parallel_degree.
ModelTotals model_totals(const ModelSpec& spec);

}  // namespace offsim

#endif  // OFFSIM_MODEL_HPP
