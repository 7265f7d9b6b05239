#include "offsim/model.hpp"

namespace offsim {

namespace {
bool valid_width(int w) { return w == 1 || w == 2 || w == 4 || w == 8; }
}  // namespace

void ModelSpec::validate() const {
  if (num_layers < 1) throw ValidationError("model.num_layers must be >= 1");
  if (hidden_dim < 1) throw ValidationError("model.hidden_dim must be >= 1");
  if (num_heads < 1) throw ValidationError("model.num_heads must be >= 1");
  if (seq_len < 1) throw ValidationError("model.seq_len must be >= 1");
  if (microbatch_size < 1) throw ValidationError("model.microbatch_size must be >= 1");
  if (!valid_width(low_precision_bytes))
    throw ValidationError("model.low_precision_bytes must be one of {1,2,4,8}");
  if (!valid_width(full_precision_bytes))
    throw ValidationError("model.full_precision_bytes must be one of {1,2,4,8}");
  if (optimizer_states_per_element < 1)
    throw ValidationError("model.optimizer_states_per_element must be >= 1");
  if (data_parallel_degree < 1)
    throw ValidationError("model.data_parallel_degree must be >= 1");
}

LayerSizes derive_layer_sizes(const ModelSpec& spec) {
  spec.validate();
  LayerSizes s;
  u64 h = static_cast<u64>(spec.hidden_dim);
  s.param_elements = 12 * h * h;
  s.param_bytes_low = s.param_elements * static_cast<u64>(spec.low_precision_bytes);
  s.grad_bytes_full = s.param_elements * static_cast<u64>(spec.full_precision_bytes);
  s.opt_state_bytes = s.param_elements *
                      static_cast<u64>(spec.optimizer_states_per_element) *
                      static_cast<u64>(spec.full_precision_bytes);
  s.ckpt_elements_per_mb = static_cast<u64>(spec.microbatch_size) *
                           static_cast<u64>(spec.seq_len) * h;
  s.ckpt_bytes_per_mb = s.ckpt_elements_per_mb * static_cast<u64>(spec.low_precision_bytes);
  return s;
}

ModelTotals model_totals(const ModelSpec& spec) {
  LayerSizes layer = derive_layer_sizes(spec);
  u64 n = static_cast<u64>(spec.num_layers);
  ModelTotals t;
  t.param_elements = layer.param_elements * n;
  t.param_bytes_low = layer.param_bytes_low * n;
  t.ckpt_bytes_per_mb = layer.ckpt_bytes_per_mb * n;
  t.opt_state_bytes = layer.opt_state_bytes * n;
  t.grad_bytes_full = layer.grad_bytes_full * n;
  return t;
}

}  // namespace offsim
