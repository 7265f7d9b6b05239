#include "offsim/roofline.hpp"

#include <algorithm>
#include <limits>

namespace offsim {

double io_roofline(const ModelSpec& model, const MachineSpec& machine,
                   u64 batch_samples, double x_opt) {
  model.validate();
  machine.validate();
  if (batch_samples == 0) throw ValidationError("batch_samples must be >= 1");
  if (x_opt < 0.0 || x_opt > 1.0) throw ValidationError("x_opt must be in [0,1]");
  ModelTotals totals = model_totals(model);
  u64 ssd_bytes = ssd_portion(totals.opt_state_bytes, x_opt);
  if (ssd_bytes == 0) return std::numeric_limits<double>::infinity();
  double read = transfer_time(ssd_bytes, LinkKind::SSD_Read, machine);
  double write = transfer_time(ssd_bytes, LinkKind::SSD_Write, machine);
  double round_trip = machine.ssd_duplex ? std::max(read, write) : read + write;
  return static_cast<double>(batch_samples) * static_cast<double>(machine.num_gpus) /
         round_trip;
}

double compute_roofline(const ModelSpec& model, const MachineSpec& machine) {
  model.validate();
  machine.validate();
  double per_mb = static_cast<double>(model.num_layers) *
                  (machine.fwd_compute_time_per_layer_per_mb +
                   machine.bwd_compute_time_per_layer_per_mb);
  if (per_mb <= 0.0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(model.microbatch_size) *
         static_cast<double>(machine.num_gpus) / per_mb;
}

}  // namespace offsim
