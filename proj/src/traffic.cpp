#include "offsim/traffic.hpp"

namespace offsim {

const char* data_name(DataKind d) {
  switch (d) {
    case DataKind::Param: return "param";
    case DataKind::Ckpt: return "ckpt";
    case DataKind::GradAccum: return "grad_accum";
    case DataKind::InterlayerGrad: return "interlayer_grad";
    case DataKind::OptState: return "opt_state";
  }
  return "?";
}

namespace {

struct Common {
  u64 n, m, dp;
  u64 shard_pl, shard_gl;
  u64 ssd_pl, ssd_cl, ssd_ol;
  u64 cl;
};

Common common(const ModelSpec& model, int big_m, const StorageSplit& split) {
  model.validate();
  split.validate();
  LayerSizes l = derive_layer_sizes(model);
  Common c;
  c.n = static_cast<u64>(model.num_layers);
  c.m = static_cast<u64>(big_m);
  c.dp = static_cast<u64>(model.data_parallel_degree);
  c.shard_pl = chunk_size(l.param_bytes_low, model.data_parallel_degree, 0);
  c.shard_gl = chunk_size(l.grad_bytes_full, model.data_parallel_degree, 0);
  c.ssd_pl = ssd_portion(l.param_bytes_low, split.x_param);
  c.ssd_cl = ssd_portion(l.ckpt_bytes_per_mb, split.x_ckpt);
  c.ssd_ol = ssd_portion(l.opt_state_bytes, split.x_opt);
  c.cl = l.ckpt_bytes_per_mb;
  return c;
}

}  // namespace

TrafficLedger horizontal_traffic(const ModelSpec& model, int big_m,
                                 const StorageSplit& split) {
  Common c = common(model, big_m, split);
  TrafficLedger t;
  // Parameters stream in for every micro-batch's forward and backward.
  t.at(LinkKind::PCIe_H2D, DataKind::Param) = 2 * c.m * c.n * c.shard_pl;
  t.at(LinkKind::SSD_Read, DataKind::Param) = 2 * c.m * c.n * c.ssd_pl;
  t.at(LinkKind::SSD_Write, DataKind::Param) = c.n * c.ssd_pl;
  // Every micro-batch's checkpoints go out after forward, back for backward.
  t.at(LinkKind::PCIe_D2H, DataKind::Ckpt) = c.m * c.n * c.cl;
  t.at(LinkKind::PCIe_H2D, DataKind::Ckpt) = c.m * c.n * c.cl;
  t.at(LinkKind::SSD_Write, DataKind::Ckpt) = c.m * c.n * c.ssd_cl * c.dp;
  t.at(LinkKind::SSD_Read, DataKind::Ckpt) = c.m * c.n * c.ssd_cl * c.dp;
  // Accumulated gradients shuttle out each backward and back in for the next
  // micro-batch: 2M - 1 gradient-sized transfers per layer in total.
  t.at(LinkKind::PCIe_D2H, DataKind::GradAccum) = c.m * c.n * c.shard_gl;
  t.at(LinkKind::PCIe_H2D, DataKind::GradAccum) = (c.m - 1) * c.n * c.shard_gl;
  t.at(LinkKind::SSD_Read, DataKind::OptState) = c.n * c.ssd_ol;
  t.at(LinkKind::SSD_Write, DataKind::OptState) = c.n * c.ssd_ol;
  return t;
}

TrafficLedger vertical_traffic(const ModelSpec& model, int big_m,
                               const StorageSplit& split, double alpha) {
  if (alpha < 0.0 || alpha > 1.0)
    throw ValidationError("delay ratio alpha must be in [0,1]");
  Common c = common(model, big_m, split);
  const u64 delayed_pl = scaled_portion(c.ssd_pl, alpha);
  TrafficLedger t;
  // Parameters load once per layer per pass, independent of M.
  t.at(LinkKind::PCIe_H2D, DataKind::Param) = 2 * c.n * c.shard_pl;
  t.at(LinkKind::SSD_Read, DataKind::Param) =
      c.n * ((c.ssd_pl - delayed_pl) + c.ssd_pl);
  t.at(LinkKind::SSD_Write, DataKind::Param) = c.n * c.ssd_pl;
  // Checkpoints: all M go out each layer; reloads skip the turning-point
  // micro-batch in forward and skip layer 0 entirely.
  t.at(LinkKind::PCIe_D2H, DataKind::Ckpt) = c.n * c.m * c.cl;
  t.at(LinkKind::PCIe_H2D, DataKind::Ckpt) =
      ((c.n - 1) * (c.m - 1) + (c.n - 1) * c.m) * c.cl;
  t.at(LinkKind::SSD_Write, DataKind::Ckpt) = c.n * c.m * c.ssd_cl * c.dp;
  t.at(LinkKind::SSD_Read, DataKind::Ckpt) = (c.n - 1) * c.m * c.ssd_cl * c.dp;
  // Gradients accumulate on the GPU across all M and leave once per layer.
  t.at(LinkKind::PCIe_D2H, DataKind::GradAccum) = c.n * c.shard_gl;
  // Inter-layer activation gradients spill through CPU memory, except at the
  // snake turning point.
  t.at(LinkKind::PCIe_D2H, DataKind::InterlayerGrad) = (c.n - 1) * (c.m - 1) * c.cl;
  t.at(LinkKind::PCIe_H2D, DataKind::InterlayerGrad) = (c.n - 1) * (c.m - 1) * c.cl;
  t.at(LinkKind::SSD_Read, DataKind::OptState) = c.n * c.ssd_ol;
  t.at(LinkKind::SSD_Write, DataKind::OptState) = c.n * c.ssd_ol;
  return t;
}

TrafficLedger single_fb_traffic(const ModelSpec& model, int batch, bool extra_ckpt,
                                const StorageSplit& split) {
  if (batch < 1) throw ValidationError("single-fb traffic requires batch >= 1");
  Common c = common(model, 1, split);
  const u64 cb = static_cast<u64>(batch) * static_cast<u64>(model.seq_len) *
                 static_cast<u64>(model.hidden_dim) *
                 static_cast<u64>(model.low_precision_bytes);
  const u64 ssd_cb = ssd_portion(cb, split.x_ckpt);
  const u64 k = extra_ckpt ? 2 : 1;
  TrafficLedger t;
  t.at(LinkKind::PCIe_H2D, DataKind::Param) = 2 * c.n * c.shard_pl;
  t.at(LinkKind::SSD_Read, DataKind::Param) = 2 * c.n * c.ssd_pl;
  t.at(LinkKind::SSD_Write, DataKind::Param) = c.n * c.ssd_pl;
  t.at(LinkKind::PCIe_D2H, DataKind::Ckpt) = c.n * k * cb;
  t.at(LinkKind::PCIe_H2D, DataKind::Ckpt) = c.n * k * cb;
  t.at(LinkKind::SSD_Write, DataKind::Ckpt) = c.n * k * ssd_cb * c.dp;
  t.at(LinkKind::SSD_Read, DataKind::Ckpt) = c.n * k * ssd_cb * c.dp;
  t.at(LinkKind::PCIe_D2H, DataKind::GradAccum) = c.n * c.shard_gl;
  t.at(LinkKind::SSD_Read, DataKind::OptState) = c.n * c.ssd_ol;
  t.at(LinkKind::SSD_Write, DataKind::OptState) = c.n * c.ssd_ol;
  return t;
}

TrafficLedger plan_traffic(const SchedulePlan& plan) {
  TrafficLedger t;
  for (const Task& task : plan.tasks)
    if (task.kind == TaskKind::Xfer) t.at(task.link, task.data) += task.bytes;
  return t;
}

}  // namespace offsim
