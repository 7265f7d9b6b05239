#include "offsim/schedule.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace offsim {

void StorageSplit::validate() const {
  if (x_ckpt < 0 || x_ckpt > 1) throw ValidationError("split.x_ckpt must be in [0,1]");
  if (x_param < 0 || x_param > 1) throw ValidationError("split.x_param must be in [0,1]");
  if (x_opt < 0 || x_opt > 1) throw ValidationError("split.x_opt must be in [0,1]");
}

namespace {

// Byte quantities shared by all builders. PCIe transfers use the simulated
// GPU's shard; SSD transfers aggregate over all data-parallel replicas
// (shards of one layer sum back to the full layer).
struct Sizes {
  LayerSizes layer;
  int dp = 1;
  u64 shard_param = 0;   // per-GPU layer parameter bytes over PCIe
  u64 shard_grad = 0;    // per-GPU accumulated-gradient bytes over PCIe
  u64 ssd_param = 0;     // SSD-resident fraction of one layer's parameters
  u64 ssd_ckpt_mb = 0;   // SSD-resident fraction of one micro-batch checkpoint
  u64 ssd_opt = 0;       // SSD-resident fraction of one layer's optimizer states
  u64 cpu_ckpt_mb = 0;
  u64 cpu_param = 0;
};

Sizes compute_sizes(const ModelSpec& model, const StorageSplit& split) {
  Sizes s;
  s.layer = derive_layer_sizes(model);
  s.dp = model.data_parallel_degree;
  s.shard_param = chunk_size(s.layer.param_bytes_low, s.dp, 0);
  s.shard_grad = chunk_size(s.layer.grad_bytes_full, s.dp, 0);
  s.ssd_param = ssd_portion(s.layer.param_bytes_low, split.x_param);
  s.ssd_ckpt_mb = ssd_portion(s.layer.ckpt_bytes_per_mb, split.x_ckpt);
  s.ssd_opt = ssd_portion(s.layer.opt_state_bytes, split.x_opt);
  s.cpu_ckpt_mb = cpu_portion(s.layer.ckpt_bytes_per_mb, split.x_ckpt);
  s.cpu_param = cpu_portion(s.layer.param_bytes_low, split.x_param);
  return s;
}

class PlanBuilder {
 public:
  explicit PlanBuilder(SchedulePlan* plan) : plan_(plan) {}

  int compute(TaskKind kind, int layer, int mb, int stage, std::vector<int> deps) {
    Task t;
    t.kind = kind;
    t.layer = layer;
    t.microbatch = mb;
    t.stage = stage;
    t.deps = filter(std::move(deps));
    return push(std::move(t));
  }

  int cpu_step(int layer, int stage, u64 elements, std::vector<int> deps) {
    Task t;
    t.kind = TaskKind::CpuStep;
    t.layer = layer;
    t.stage = stage;
    t.elements = elements;
    t.deps = filter(std::move(deps));
    return push(std::move(t));
  }

  // Returns -1 (no task) when bytes == 0; zero-byte transfers never appear.
  int xfer(DataKind data, LinkKind link, u64 bytes, int layer, int mb, int stage,
           std::vector<int> deps) {
    if (bytes == 0) return -1;
    Task t;
    t.kind = TaskKind::Xfer;
    t.data = data;
    t.link = link;
    t.bytes = bytes;
    t.layer = layer;
    t.microbatch = mb;
    t.stage = stage;
    t.deps = filter(std::move(deps));
    return push(std::move(t));
  }

  Task& at(int id) { return plan_->tasks[static_cast<size_t>(id)]; }

 private:
  std::vector<int> filter(std::vector<int> deps) {
    deps.erase(std::remove(deps.begin(), deps.end(), -1), deps.end());
    std::sort(deps.begin(), deps.end());
    deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
    return deps;
  }

  int push(Task t) {
    t.id = static_cast<int>(plan_->tasks.size());
    for (int d : t.deps) assert(d >= 0 && d < t.id);
    plan_->tasks.push_back(std::move(t));
    return plan_->tasks.back().id;
  }

  SchedulePlan* plan_;
};

int gate(const std::vector<int>& stage_gate, int stage) {
  if (stage < 0 || stage >= static_cast<int>(stage_gate.size())) return -1;
  return stage_gate[static_cast<size_t>(stage)];
}

void fill_gpu_static(SchedulePlan* plan, const Sizes& s) {
  u64 params = 2 * s.shard_param;
  u64 grads = 2 * s.shard_grad;
  u64 staging = 4 * s.layer.ckpt_bytes_per_mb;
  plan->gpu_static_bytes = params + grads + staging;
  if (grads >= params && grads >= staging)
    plan->gpu_binding = "gradient accumulation buffers (2 copies)";
  else if (params >= staging)
    plan->gpu_binding = "resident layer parameters (current + prefetch)";
  else
    plan->gpu_binding = "checkpoint staging chunks";
}

// Shared emitter for the micro-batch-sequential schedules (horizontal
// accumulation and the single forward-backward pass, which is the M = 1
// case with rescaled checkpoints and compute).
SchedulePlan build_sequential(const ModelSpec& model, int num_microbatches,
                              const StorageSplit& split, int ckpts_per_layer,
                              u64 ckpt_bytes, double compute_scale, u64 samples,
                              ScheduleKind kind) {
  split.validate();
  const int n_layers = model.num_layers;
  const int big_m = num_microbatches;
  Sizes s = compute_sizes(model, split);
  const u64 ssd_ckpt = ssd_portion(ckpt_bytes, split.x_ckpt);
  const u64 cpu_ckpt = cpu_portion(ckpt_bytes, split.x_ckpt);

  SchedulePlan plan;
  plan.kind = kind;
  plan.num_microbatches = big_m;
  plan.num_layers = n_layers;
  plan.split = split;
  plan.samples_per_iteration = samples;
  plan.compute_scale = compute_scale;
  fill_gpu_static(&plan, s);
  plan.cpu_peak_bytes =
      cpu_ckpt * static_cast<u64>(ckpts_per_layer) * static_cast<u64>(n_layers) *
          static_cast<u64>(s.dp) +
      s.cpu_param * static_cast<u64>(n_layers) +
      cpu_portion(s.layer.opt_state_bytes, split.x_opt) * static_cast<u64>(n_layers) +
      s.layer.grad_bytes_full * static_cast<u64>(n_layers) +
      2 * ckpt_bytes * static_cast<u64>(s.dp) + 2 * s.layer.param_bytes_low +
      2 * s.layer.opt_state_bytes;

  PlanBuilder b(&plan);
  const int total_stages = 2 * n_layers * big_m;
  std::vector<int> stage_gate(static_cast<size_t>(total_stages), -1);

  auto idx = [n_layers](int m, int l) { return m * n_layers + l; };
  std::vector<std::vector<int>> ckpt_store(
      static_cast<size_t>(big_m * n_layers),
      std::vector<int>(static_cast<size_t>(ckpts_per_layer), -1));
  std::vector<int> ckpt_flush_last(static_cast<size_t>(big_m * n_layers), -1);
  std::vector<int> grad_off(static_cast<size_t>(big_m * n_layers), -1);
  std::vector<int> fwd_comp(static_cast<size_t>(big_m * n_layers), -1);
  std::vector<int> bwd_comp(static_cast<size_t>(big_m * n_layers), -1);
  std::vector<int> step_of_layer(static_cast<size_t>(n_layers), -1);
  std::vector<std::pair<int, int>> cross_patches;  // (task, layer): dep on prev-iter step

  int fixed_ops = b.compute(TaskKind::FixedOps, -1, kAllMicrobatches, 0, {});

  int stage = 0;
  for (int m = 0; m < big_m; ++m) {
    // Forward pass of micro-batch m, all layers.
    for (int l = 0; l < n_layers; ++l, ++stage) {
      int p_ssd = b.xfer(DataKind::Param, LinkKind::SSD_Read, s.ssd_param, l,
                         kAllMicrobatches, stage - 2, {gate(stage_gate, stage - 3)});
      int p_h2d = b.xfer(DataKind::Param, LinkKind::PCIe_H2D, s.shard_param, l,
                         kAllMicrobatches, stage - 1,
                         {p_ssd, gate(stage_gate, stage - 2)});
      if (m == 0 && p_h2d >= 0) cross_patches.emplace_back(p_h2d, l);
      int prev = l > 0 ? fwd_comp[static_cast<size_t>(idx(m, l - 1))]
                       : (m > 0 ? bwd_comp[static_cast<size_t>(idx(m - 1, 0))] : fixed_ops);
      int f = b.compute(TaskKind::FwdCompute, l, m, stage, {p_h2d, prev});
      fwd_comp[static_cast<size_t>(idx(m, l))] = f;
      for (int c = 0; c < ckpts_per_layer; ++c) {
        int st = b.xfer(DataKind::Ckpt, LinkKind::PCIe_D2H, ckpt_bytes, l, m, stage, {f});
        ckpt_store[static_cast<size_t>(idx(m, l))][static_cast<size_t>(c)] = st;
        int fl = b.xfer(DataKind::Ckpt, LinkKind::SSD_Write,
                        ssd_ckpt * static_cast<u64>(s.dp), l, m, stage + 1, {st});
        if (fl >= 0) ckpt_flush_last[static_cast<size_t>(idx(m, l))] = fl;
      }
      stage_gate[static_cast<size_t>(stage)] = f;
    }
    // Backward pass of micro-batch m, layers in reverse.
    for (int l = n_layers - 1; l >= 0; --l, ++stage) {
      int p_ssd = b.xfer(DataKind::Param, LinkKind::SSD_Read, s.ssd_param, l,
                         kAllMicrobatches, stage - 2, {gate(stage_gate, stage - 3)});
      int p_h2d = b.xfer(DataKind::Param, LinkKind::PCIe_H2D, s.shard_param, l,
                         kAllMicrobatches, stage - 1,
                         {p_ssd, gate(stage_gate, stage - 2)});
      std::vector<int> bdeps = {p_h2d};
      for (int c = 0; c < ckpts_per_layer; ++c) {
        int rd = b.xfer(DataKind::Ckpt, LinkKind::SSD_Read,
                        ssd_ckpt * static_cast<u64>(s.dp), l, m, stage - 1,
                        {ckpt_flush_last[static_cast<size_t>(idx(m, l))],
                         gate(stage_gate, stage - 2)});
        int ld = b.xfer(DataKind::Ckpt, LinkKind::PCIe_H2D, ckpt_bytes, l, m, stage,
                        {rd, ckpt_store[static_cast<size_t>(idx(m, l))][static_cast<size_t>(c)]});
        bdeps.push_back(ld);
      }
      if (m > 0) {
        int gf = b.xfer(DataKind::GradAccum, LinkKind::PCIe_H2D, s.shard_grad, l,
                        kAllMicrobatches, stage, {grad_off[static_cast<size_t>(idx(m - 1, l))]});
        bdeps.push_back(gf);
      }
      bdeps.push_back(l < n_layers - 1 ? bwd_comp[static_cast<size_t>(idx(m, l + 1))]
                                       : fwd_comp[static_cast<size_t>(idx(m, n_layers - 1))]);
      int bw = b.compute(TaskKind::RecomputeAndBwd, l, m, stage, std::move(bdeps));
      bwd_comp[static_cast<size_t>(idx(m, l))] = bw;
      grad_off[static_cast<size_t>(idx(m, l))] =
          b.xfer(DataKind::GradAccum, LinkKind::PCIe_D2H, s.shard_grad, l,
                 kAllMicrobatches, stage + 1, {bw});
      if (m == big_m - 1) {
        // Optimizer step for layer l overlaps the remaining backward layers
        // of this (final) micro-batch.
        int os_r = b.xfer(DataKind::OptState, LinkKind::SSD_Read, s.ssd_opt, l,
                          kAllMicrobatches, stage + 1, {bw});
        int step = b.cpu_step(l, stage + 2, s.layer.param_elements,
                              {grad_off[static_cast<size_t>(idx(m, l))], os_r});
        step_of_layer[static_cast<size_t>(l)] = step;
        b.xfer(DataKind::OptState, LinkKind::SSD_Write, s.ssd_opt, l,
               kAllMicrobatches, stage + 3, {step});
        b.xfer(DataKind::Param, LinkKind::SSD_Write, s.ssd_param, l,
               kAllMicrobatches, stage + 3, {step});
      }
      stage_gate[static_cast<size_t>(stage)] = bw;
    }
  }
  for (auto [task, layer] : cross_patches)
    b.at(task).cross_iter_dep = step_of_layer[static_cast<size_t>(layer)];
  return plan;
}

}  // namespace

SchedulePlan build_horizontal(const ModelSpec& model, int num_microbatches,
                              const StorageSplit& split) {
  model.validate();
  if (num_microbatches < 1)
    throw ValidationError("horizontal schedule requires at least 1 micro-batch");
  LayerSizes layer = derive_layer_sizes(model);
  ScheduleKind kind;
  kind.variant = ScheduleVariant::Horizontal;
  u64 samples = static_cast<u64>(num_microbatches) * static_cast<u64>(model.microbatch_size);
  return build_sequential(model, num_microbatches, split, 1, layer.ckpt_bytes_per_mb,
                          1.0, samples, kind);
}

SchedulePlan build_single_fb(const ModelSpec& model, int batch, bool extra_ckpt,
                             const StorageSplit& split) {
  model.validate();
  if (batch < 1) throw ValidationError("single-fb schedule requires batch >= 1");
  u64 ckpt_bytes = static_cast<u64>(batch) * static_cast<u64>(model.seq_len) *
                   static_cast<u64>(model.hidden_dim) *
                   static_cast<u64>(model.low_precision_bytes);
  ScheduleKind kind;
  kind.variant = ScheduleVariant::SingleFB;
  kind.extra_ckpt = extra_ckpt;
  double scale = static_cast<double>(batch) / static_cast<double>(model.microbatch_size);
  SchedulePlan plan =
      build_sequential(model, 1, split, extra_ckpt ? 2 : 1, ckpt_bytes, scale,
                       static_cast<u64>(batch), kind);
  // The single pass holds the working set of the largest operator scaled to
  // the full batch; that is the binding GPU memory consumer.
  plan.gpu_binding = "activation working set of the largest operator";
  return plan;
}

SchedulePlan build_vertical(const ModelSpec& model, int num_microbatches,
                            const StorageSplit& split, double alpha) {
  model.validate();
  split.validate();
  if (num_microbatches < 1)
    throw ValidationError("vertical schedule requires at least 1 micro-batch");
  if (alpha < 0.0 || alpha > 1.0)
    throw ValidationError("delay ratio alpha must be in [0,1]");

  const int n_layers = model.num_layers;
  const int big_m = num_microbatches;
  Sizes s = compute_sizes(model, split);

  // Delayed-step residency: retained full-precision gradients must fit in
  // memory reclaimed from consumed CPU-resident parameters and checkpoints.
  double retained = alpha * static_cast<double>(s.layer.grad_bytes_full) * n_layers;
  double reclaimed =
      alpha * static_cast<double>(s.cpu_param) * n_layers +
      static_cast<double>(s.cpu_ckpt_mb) * big_m * n_layers;
  if (retained > reclaimed + 0.5 + 1e-9 * reclaimed) {
    std::ostringstream msg;
    msg << "delayed-step gradients (" << static_cast<u64>(retained)
        << " bytes) exceed reclaimable CPU memory (" << static_cast<u64>(reclaimed)
        << " bytes); reduce alpha or raise CPU residency of params/checkpoints";
    throw InfeasibleError(msg.str());
  }

  // alpha-fraction splits of SSD-resident state, rounded once and reused so
  // immediate + delayed always sums to the whole.
  const u64 delayed_opt = scaled_portion(s.ssd_opt, alpha);
  const u64 imm_opt = s.ssd_opt - delayed_opt;
  const u64 delayed_param = scaled_portion(s.ssd_param, alpha);
  const u64 imm_param = s.ssd_param - delayed_param;
  const u64 delayed_elems = scaled_portion(s.layer.param_elements, alpha);
  const u64 imm_elems = s.layer.param_elements - delayed_elems;

  SchedulePlan plan;
  plan.kind.variant = ScheduleVariant::Vertical;
  plan.kind.delay_ratio = alpha;
  plan.num_microbatches = big_m;
  plan.num_layers = n_layers;
  plan.split = split;
  plan.samples_per_iteration =
      static_cast<u64>(big_m) * static_cast<u64>(model.microbatch_size);
  plan.compute_scale = 1.0;
  fill_gpu_static(&plan, s);
  plan.cpu_peak_bytes =
      s.cpu_ckpt_mb * static_cast<u64>(big_m) * static_cast<u64>(n_layers) *
          static_cast<u64>(s.dp) +
      s.cpu_param * static_cast<u64>(n_layers) +
      cpu_portion(s.layer.opt_state_bytes, split.x_opt) * static_cast<u64>(n_layers) +
      s.layer.grad_bytes_full * static_cast<u64>(n_layers) +
      2 * static_cast<u64>(big_m) * s.layer.ckpt_bytes_per_mb * static_cast<u64>(s.dp) +
      2 * s.layer.param_bytes_low + 2 * s.layer.opt_state_bytes;

  PlanBuilder b(&plan);
  const int total_stages = 2 * n_layers;
  std::vector<int> stage_gate(static_cast<size_t>(total_stages), -1);

  auto order_mb = [&](int st, int k) {  // k-th micro-batch of a stage in snake order
    return (st % 2 == 0) ? k : big_m - 1 - k;
  };
  auto first_mb = [&](int st) { return order_mb(st, 0); };
  auto last_mb = [&](int st) { return order_mb(st, big_m - 1); };

  std::vector<std::vector<int>> fwd_comp(static_cast<size_t>(n_layers),
                                         std::vector<int>(static_cast<size_t>(big_m), -1));
  std::vector<std::vector<int>> bwd_comp(fwd_comp);
  std::vector<std::vector<int>> ckpt_store(fwd_comp);
  std::vector<std::vector<int>> ilg_store(fwd_comp);
  std::vector<int> ckpt_flush(static_cast<size_t>(n_layers), -1);
  std::vector<int> grad_off(static_cast<size_t>(n_layers), -1);
  std::vector<int> step_imm(static_cast<size_t>(n_layers), -1);
  // (task, layer) pairs whose cross-iteration dep is filled after backward
  // emission: delayed-step tasks wait on the previous iteration's gradient
  // offload; parameter fetches wait on the previous immediate step.
  std::vector<std::pair<int, int>> wait_prev_grad;
  std::vector<std::pair<int, int>> wait_prev_step;
  // Prefetched immediate-slice optimizer reads wait on the previous
  // iteration's optimizer write for the same layer.
  std::vector<int> opt_write(static_cast<size_t>(n_layers), -1);
  std::vector<std::pair<int, int>> wait_prev_optw;

  int fixed_ops = b.compute(TaskKind::FixedOps, -1, kAllMicrobatches, 0, {});

  // ---- Forward phase (one stage per layer), with the delayed alpha-slice
  // of the PREVIOUS iteration's optimizer step threaded three/two stages
  // ahead of each layer's forward.
  for (int l = 0; l < n_layers; ++l) {
    const int st = l;
    int step_d = -1;
    if (delayed_elems > 0 || delayed_opt > 0 || delayed_param > 0) {
      int os_rd = b.xfer(DataKind::OptState, LinkKind::SSD_Read, delayed_opt, l,
                         kAllMicrobatches, st - 3, {gate(stage_gate, st - 4)});
      if (os_rd >= 0) wait_prev_grad.emplace_back(os_rd, l);
      step_d = b.cpu_step(l, st - 2, delayed_elems, {os_rd, gate(stage_gate, st - 3)});
      wait_prev_grad.emplace_back(step_d, l);
      b.xfer(DataKind::OptState, LinkKind::SSD_Write, delayed_opt, l,
             kAllMicrobatches, st - 1, {step_d});
      b.xfer(DataKind::Param, LinkKind::SSD_Write, delayed_param, l,
             kAllMicrobatches, st - 1, {step_d});
    }
    int p_ssd = b.xfer(DataKind::Param, LinkKind::SSD_Read, imm_param, l,
                       kAllMicrobatches, st - 2, {gate(stage_gate, st - 3)});
    int last_chunk = -1;
    for (int j = 0; j < big_m; ++j) {
      u64 bytes = chunk_size(s.shard_param, big_m, j);
      int dep_prev = last_chunk >= 0 ? last_chunk : -1;
      int h2d = b.xfer(DataKind::Param, LinkKind::PCIe_H2D, bytes, l,
                       kAllMicrobatches, st - 1,
                       {p_ssd, dep_prev, j == 0 ? step_d : -1,
                        j == 0 ? gate(stage_gate, st - 2) : -1});
      if (h2d >= 0) {
        if (j == 0) wait_prev_step.emplace_back(h2d, l);
        last_chunk = h2d;
      }
    }
    int prev_in_stage = -1;
    for (int k = 0; k < big_m; ++k) {
      int m = order_mb(st, k);
      int ck_load = -1;
      if (l > 0 && m != first_mb(st)) {
        // Input checkpoint produced by the previous layer; the snake-order
        // turning point keeps the first micro-batch's input in GPU memory.
        ck_load = b.xfer(DataKind::Ckpt, LinkKind::PCIe_H2D, s.layer.ckpt_bytes_per_mb,
                         l, m, st, {ckpt_store[static_cast<size_t>(l - 1)][static_cast<size_t>(m)]});
      }
      std::vector<int> deps = {last_chunk, ck_load, prev_in_stage};
      if (l > 0) deps.push_back(fwd_comp[static_cast<size_t>(l - 1)][static_cast<size_t>(m)]);
      if (l == 0 && k == 0) deps.push_back(fixed_ops);
      int f = b.compute(TaskKind::FwdCompute, l, m, st, std::move(deps));
      fwd_comp[static_cast<size_t>(l)][static_cast<size_t>(m)] = f;
      ckpt_store[static_cast<size_t>(l)][static_cast<size_t>(m)] =
          b.xfer(DataKind::Ckpt, LinkKind::PCIe_D2H, s.layer.ckpt_bytes_per_mb, l, m,
                 st, {f});
      prev_in_stage = f;
    }
    // SSD flush of the whole layer's checkpoints, staged through the CPU
    // double buffer and overlapped with the next stage.
    std::vector<int> flush_deps;
    for (int m = 0; m < big_m; ++m)
      flush_deps.push_back(ckpt_store[static_cast<size_t>(l)][static_cast<size_t>(m)]);
    ckpt_flush[static_cast<size_t>(l)] =
        b.xfer(DataKind::Ckpt, LinkKind::SSD_Write,
               s.ssd_ckpt_mb * static_cast<u64>(big_m) * static_cast<u64>(s.dp), l,
               kAllMicrobatches, st + 1, std::move(flush_deps));
    stage_gate[static_cast<size_t>(st)] = prev_in_stage;
  }

  // ---- Backward phase (one stage per layer, reverse order) overlapped with
  // the immediate (1 - alpha) slice of the optimizer step.
  for (int l = n_layers - 1; l >= 0; --l) {
    const int st = 2 * n_layers - 1 - l;
    int p_ssd = b.xfer(DataKind::Param, LinkKind::SSD_Read, s.ssd_param, l,
                       kAllMicrobatches, st - 2, {gate(stage_gate, st - 3)});
    int last_chunk = -1;
    for (int j = 0; j < big_m; ++j) {
      u64 bytes = chunk_size(s.shard_param, big_m, j);
      int h2d = b.xfer(DataKind::Param, LinkKind::PCIe_H2D, bytes, l,
                       kAllMicrobatches, st - 1,
                       {p_ssd, last_chunk, j == 0 ? gate(stage_gate, st - 2) : -1});
      if (h2d >= 0) last_chunk = h2d;
    }
    int ck_ssd = -1;
    if (l > 0) {
      ck_ssd = b.xfer(DataKind::Ckpt, LinkKind::SSD_Read,
                      s.ssd_ckpt_mb * static_cast<u64>(big_m) * static_cast<u64>(s.dp),
                      l, kAllMicrobatches, st - 1,
                      {ckpt_flush[static_cast<size_t>(l - 1)], gate(stage_gate, st - 2)});
    }
    // Prefetch the immediate-slice optimizer states while this layer's
    // backward runs; only the CPU step itself needs the gradients.
    int os_r = b.xfer(DataKind::OptState, LinkKind::SSD_Read, imm_opt, l,
                      kAllMicrobatches, st - 1, {gate(stage_gate, st - 2)});
    if (os_r >= 0) wait_prev_optw.emplace_back(os_r, l);
    int prev_in_stage = -1;
    for (int k = 0; k < big_m; ++k) {
      int m = order_mb(st, k);
      std::vector<int> deps = {last_chunk, prev_in_stage};
      if (l > 0) {
        // Recompute input: the checkpoint written by layer l-1 in forward.
        int ck_load = b.xfer(DataKind::Ckpt, LinkKind::PCIe_H2D,
                             s.layer.ckpt_bytes_per_mb, l, m, st,
                             {ck_ssd, ckpt_store[static_cast<size_t>(l - 1)][static_cast<size_t>(m)]});
        deps.push_back(ck_load);
      }
      if (l < n_layers - 1) {
        deps.push_back(bwd_comp[static_cast<size_t>(l + 1)][static_cast<size_t>(m)]);
        if (m != first_mb(st)) {
          int ilg = b.xfer(DataKind::InterlayerGrad, LinkKind::PCIe_H2D,
                           s.layer.ckpt_bytes_per_mb, l, m, st,
                           {ilg_store[static_cast<size_t>(l + 1)][static_cast<size_t>(m)]});
          deps.push_back(ilg);
        }
      } else if (k == 0) {
        deps.push_back(fwd_comp[static_cast<size_t>(n_layers - 1)]
                               [static_cast<size_t>(last_mb(n_layers - 1))]);
      }
      int bw = b.compute(TaskKind::RecomputeAndBwd, l, m, st, std::move(deps));
      bwd_comp[static_cast<size_t>(l)][static_cast<size_t>(m)] = bw;
      if (l > 0 && m != last_mb(st)) {
        // Gradient w.r.t. this layer's input, handed to layer l-1 through
        // CPU memory; the boundary micro-batch stays in GPU memory.
        ilg_store[static_cast<size_t>(l)][static_cast<size_t>(m)] =
            b.xfer(DataKind::InterlayerGrad, LinkKind::PCIe_D2H,
                   s.layer.ckpt_bytes_per_mb, l, m, st, {bw});
      }
      prev_in_stage = bw;
    }
    std::vector<int> goff_deps;
    for (int m = 0; m < big_m; ++m)
      goff_deps.push_back(bwd_comp[static_cast<size_t>(l)][static_cast<size_t>(m)]);
    grad_off[static_cast<size_t>(l)] =
        b.xfer(DataKind::GradAccum, LinkKind::PCIe_D2H, s.shard_grad, l,
               kAllMicrobatches, st + 1, std::move(goff_deps));
    if (imm_elems > 0 || imm_opt > 0 || imm_param > 0) {
      int step = b.cpu_step(l, st + 2, imm_elems, {grad_off[static_cast<size_t>(l)], os_r});
      step_imm[static_cast<size_t>(l)] = step;
      opt_write[static_cast<size_t>(l)] =
          b.xfer(DataKind::OptState, LinkKind::SSD_Write, imm_opt, l, kAllMicrobatches,
                 st + 3, {step});
      b.xfer(DataKind::Param, LinkKind::SSD_Write, imm_param, l, kAllMicrobatches,
             st + 3, {step});
    }
    stage_gate[static_cast<size_t>(st)] = prev_in_stage;
  }

  for (auto [task, layer] : wait_prev_grad)
    b.at(task).cross_iter_dep = grad_off[static_cast<size_t>(layer)];
  for (auto [task, layer] : wait_prev_step) {
    int dep = step_imm[static_cast<size_t>(layer)];
    if (dep < 0) dep = grad_off[static_cast<size_t>(layer)];
    b.at(task).cross_iter_dep = dep;
  }
  for (auto [task, layer] : wait_prev_optw)
    if (opt_write[static_cast<size_t>(layer)] >= 0)
      b.at(task).cross_iter_dep = opt_write[static_cast<size_t>(layer)];
  return plan;
}

long long overlap_window(const SchedulePlan& plan) {
  long long n = plan.num_layers;
  long long m = plan.num_microbatches;
  switch (plan.kind.variant) {
    case ScheduleVariant::Horizontal:
    case ScheduleVariant::SingleFB:
      return n - 1;
    case ScheduleVariant::Vertical: {
      long long base = (n - 1) * m;
      return base + std::llround(plan.kind.delay_ratio * static_cast<double>(base));
    }
  }
  return 0;
}

}  // namespace offsim
