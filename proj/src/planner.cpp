#include "offsim/planner.hpp"

#include <algorithm>
#include <cmath>

#include "offsim/simplex.hpp"

namespace offsim {

namespace {

// Per-layer byte quantities and machine rates used by both the LP rows and
// the exact stage-time recomputation.
struct Quantities {
  double pl, cl, ol, gl;        // params, ckpt per micro-batch, opt states, grads
  double shard_pl, shard_gl;    // per-GPU PCIe shards
  double P;                     // parameter elements per layer
  double M, N, dp;
  double rbw, wbw, h2d, d2h, thr, tf, tb;
  bool duplex;
};

Quantities gather(const ModelSpec& model, const MachineSpec& machine, int big_m) {
  LayerSizes l = derive_layer_sizes(model);
  Quantities q;
  q.pl = static_cast<double>(l.param_bytes_low);
  q.cl = static_cast<double>(l.ckpt_bytes_per_mb);
  q.ol = static_cast<double>(l.opt_state_bytes);
  q.gl = static_cast<double>(l.grad_bytes_full);
  q.shard_pl = static_cast<double>(chunk_size(l.param_bytes_low, model.data_parallel_degree, 0));
  q.shard_gl = static_cast<double>(chunk_size(l.grad_bytes_full, model.data_parallel_degree, 0));
  q.P = static_cast<double>(l.param_elements);
  q.M = static_cast<double>(big_m);
  q.N = static_cast<double>(model.num_layers);
  q.dp = static_cast<double>(model.data_parallel_degree);
  q.rbw = machine.ssd_read_bw;
  q.wbw = machine.ssd_write_bw;
  q.h2d = machine.pcie_h2d_bw;
  q.d2h = machine.pcie_d2h_bw;
  q.thr = machine.cpu_step_throughput;
  q.tf = machine.fwd_compute_time_per_layer_per_mb;
  q.tb = machine.bwd_compute_time_per_layer_per_mb;
  q.duplex = machine.ssd_duplex;
  return q;
}

// Exact per-layer stage times for a given split: the maximum over the GPU,
// CPU-step, PCIe and SSD occupancy of one pipeline stage.
void stage_times(const Quantities& q, double alpha, const StorageSplit& x,
                 double* t_fwd, double* t_bwd) {
  double read_f = (1 - alpha) * (1 - x.x_param) * q.pl + alpha * (1 - x.x_opt) * q.ol;
  double write_f = (1 - x.x_ckpt) * q.M * q.cl * q.dp +
                   alpha * ((1 - x.x_opt) * q.ol + (1 - x.x_param) * q.pl);
  double ssd_f = q.duplex ? std::max(read_f / q.rbw, write_f / q.wbw)
                          : read_f / q.rbw + write_f / q.wbw;
  *t_fwd = std::max({q.M * q.tf, alpha * q.P / q.thr,
                     (q.shard_pl + (q.M - 1) * q.cl) / q.h2d,
                     q.M * q.cl / q.d2h, ssd_f});

  double read_b = (1 - x.x_param) * q.pl + (1 - x.x_ckpt) * q.M * q.cl * q.dp +
                  (1 - alpha) * (1 - x.x_opt) * q.ol;
  double write_b = (1 - alpha) * ((1 - x.x_opt) * q.ol + (1 - x.x_param) * q.pl);
  double ssd_b = q.duplex ? std::max(read_b / q.rbw, write_b / q.wbw)
                          : read_b / q.rbw + write_b / q.wbw;
  *t_bwd = std::max({q.M * q.tb, (1 - alpha) * q.P / q.thr,
                     (q.shard_pl + (2 * q.M - 1) * q.cl) / q.h2d,
                     (q.shard_gl + (q.M - 1) * q.cl) / q.d2h, ssd_b});
}

}  // namespace

PlannerSolution solve_config(const ModelSpec& model, const MachineSpec& machine,
                             int big_m, double alpha) {
  model.validate();
  machine.validate();
  if (big_m < 1) throw ValidationError("num_microbatches must be >= 1");
  if (alpha < 0.0 || alpha > 1.0)
    throw ValidationError("delay ratio alpha must be in [0,1]");

  PlannerSolution sol;
  sol.num_microbatches = big_m;
  sol.alpha = alpha;

  Quantities q = gather(model, machine, big_m);

  // GPU residency is split-independent for this schedule; reject up front.
  double gpu_need = 2 * q.shard_pl + 2 * q.shard_gl + 4 * q.cl +
                    static_cast<double>(machine.gpu_working_set_bytes);
  if (gpu_need > static_cast<double>(machine.gpu_mem_bytes)) return sol;

  // Variables: x_ckpt, x_param, x_opt, t_fwd, t_bwd.
  enum { XC = 0, XP = 1, XO = 2, TF = 3, TB = 4, NV = 5 };
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  auto row = [&](std::initializer_list<std::pair<int, double>> coeffs, double rhs) {
    std::vector<double> r(NV, 0.0);
    for (auto [j, v] : coeffs) r[static_cast<size_t>(j)] += v;
    A.push_back(std::move(r));
    b.push_back(rhs);
  };

  row({{XC, 1.0}}, 1.0);
  row({{XP, 1.0}}, 1.0);
  row({{XO, 1.0}}, 1.0);

  // Forward stage lower bounds (constants).
  row({{TF, -1.0}}, -q.M * q.tf);
  row({{TF, -1.0}}, -alpha * q.P / q.thr);
  row({{TF, -1.0}}, -(q.shard_pl + (q.M - 1) * q.cl) / q.h2d);
  row({{TF, -1.0}}, -q.M * q.cl / q.d2h);
  // Backward stage lower bounds (constants).
  row({{TB, -1.0}}, -q.M * q.tb);
  row({{TB, -1.0}}, -(1 - alpha) * q.P / q.thr);
  row({{TB, -1.0}}, -(q.shard_pl + (2 * q.M - 1) * q.cl) / q.h2d);
  row({{TB, -1.0}}, -(q.shard_gl + (q.M - 1) * q.cl) / q.d2h);

  // SSD occupancy rows; bytes depend linearly on the split.
  double rf_c = (1 - alpha) * q.pl;                 // read_f = rf_c - rf_c*x_p ...
  double wf_ck = q.M * q.cl * q.dp;
  if (q.duplex) {
    row({{XP, -rf_c / q.rbw}, {XO, -alpha * q.ol / q.rbw}, {TF, -1.0}},
        -(rf_c + alpha * q.ol) / q.rbw);
    row({{XC, -wf_ck / q.wbw}, {XO, -alpha * q.ol / q.wbw}, {XP, -alpha * q.pl / q.wbw}, {TF, -1.0}},
        -(wf_ck + alpha * q.ol + alpha * q.pl) / q.wbw);
    row({{XP, -q.pl / q.rbw}, {XC, -wf_ck / q.rbw}, {XO, -(1 - alpha) * q.ol / q.rbw}, {TB, -1.0}},
        -(q.pl + wf_ck + (1 - alpha) * q.ol) / q.rbw);
    row({{XO, -(1 - alpha) * q.ol / q.wbw}, {XP, -(1 - alpha) * q.pl / q.wbw}, {TB, -1.0}},
        -((1 - alpha) * (q.ol + q.pl)) / q.wbw);
  } else {
    row({{XP, -(rf_c / q.rbw + alpha * q.pl / q.wbw)},
         {XO, -(alpha * q.ol / q.rbw + alpha * q.ol / q.wbw)},
         {XC, -wf_ck / q.wbw},
         {TF, -1.0}},
        -((rf_c + alpha * q.ol) / q.rbw + (wf_ck + alpha * q.ol + alpha * q.pl) / q.wbw));
    row({{XP, -(q.pl / q.rbw + (1 - alpha) * q.pl / q.wbw)},
         {XC, -wf_ck / q.rbw},
         {XO, -((1 - alpha) * q.ol / q.rbw + (1 - alpha) * q.ol / q.wbw)},
         {TB, -1.0}},
        -((q.pl + wf_ck + (1 - alpha) * q.ol) / q.rbw +
          (1 - alpha) * (q.ol + q.pl) / q.wbw));
  }

  // CPU memory: resident fractions plus fixed buffers fit in usable DRAM.
  double mem_const = q.N * q.gl + 2 * q.M * q.cl * q.dp + 2 * q.pl + 2 * q.ol;
  row({{XC, q.M * q.cl * q.N * q.dp}, {XP, q.pl * q.N}, {XO, q.ol * q.N}},
      static_cast<double>(machine.cpu_usable_dram_bytes) - mem_const);

  // Delayed-step gradients must fit in CPU memory reclaimed from consumed
  // parameters and checkpoints.
  // The small margin keeps the returned split clear of the boundary once the
  // plan builder rounds per-layer byte portions to integers.
  row({{XP, -alpha * q.N * q.pl}, {XC, -q.M * q.N * q.cl}},
      -alpha * q.N * q.gl * (1.0 + 1e-6));

  // Objective: stage times plus a small penalty on SSD-resident bytes, with
  // a lexicographic nudge preferring to keep opt states, then params, then
  // checkpoints in CPU memory.
  double offloadable = q.M * q.N * q.cl * q.dp + q.N * q.pl + q.N * q.ol;
  double lambda = 1.0 / (1e6 * offloadable);
  std::vector<double> c(NV, 0.0);
  c[XC] = -lambda * q.M * q.N * q.cl * q.dp - 1e-10;
  c[XP] = -lambda * q.N * q.pl - 2e-10;
  c[XO] = -lambda * q.N * q.ol - 3e-10;
  c[TF] = 1.0;
  c[TB] = 1.0;

  LpResult lp = solve_lp(A, b, c);
  if (!lp.feasible || !lp.bounded) return sol;

  sol.split.x_ckpt = std::clamp(lp.x[XC], 0.0, 1.0);
  sol.split.x_param = std::clamp(lp.x[XP], 0.0, 1.0);
  sol.split.x_opt = std::clamp(lp.x[XO], 0.0, 1.0);
  stage_times(q, alpha, sol.split, &sol.t_fwd_stage, &sol.t_bwd_stage);
  sol.iteration_estimate =
      q.N * (sol.t_fwd_stage + sol.t_bwd_stage) + machine.fixed_overhead_time;
  sol.throughput_estimate = q.M * static_cast<double>(model.microbatch_size) *
                            static_cast<double>(machine.num_gpus) /
                            sol.iteration_estimate;
  sol.feasible = true;
  return sol;
}

PlannerSolution find_optimal_config(const ModelSpec& model, const MachineSpec& machine) {
  constexpr int kMaxMicrobatches = 1024;
  PlannerSolution best;
  for (int m = 1; m <= kMaxMicrobatches; ++m) {
    PlannerSolution cur;
    for (int a = 1; a <= 50; ++a) {
      PlannerSolution s = solve_config(model, machine, m, a / 100.0);
      if (s.feasible &&
          (!cur.feasible || s.throughput_estimate > cur.throughput_estimate))
        cur = s;
    }
    if (!cur.feasible) break;
    if (!best.feasible || cur.throughput_estimate > 1.01 * best.throughput_estimate)
      best = cur;
    else
      break;
  }
  return best;
}

PlannerSolution grid_search_config(const ModelSpec& model, const MachineSpec& machine,
                                   int big_m, double alpha, int steps) {
  model.validate();
  machine.validate();
  if (steps < 1) throw ValidationError("grid steps must be >= 1");
  PlannerSolution best;
  best.num_microbatches = big_m;
  best.alpha = alpha;
  Quantities q = gather(model, machine, big_m);
  double gpu_need = 2 * q.shard_pl + 2 * q.shard_gl + 4 * q.cl +
                    static_cast<double>(machine.gpu_working_set_bytes);
  if (gpu_need > static_cast<double>(machine.gpu_mem_bytes)) return best;

  double mem_const = q.N * q.gl + 2 * q.M * q.cl * q.dp + 2 * q.pl + 2 * q.ol;
  double dram = static_cast<double>(machine.cpu_usable_dram_bytes);
  double best_t = 0.0;
  for (int ic = 0; ic <= steps; ++ic)
    for (int ip = 0; ip <= steps; ++ip)
      for (int io = 0; io <= steps; ++io) {
        StorageSplit x;
        x.x_ckpt = static_cast<double>(ic) / steps;
        x.x_param = static_cast<double>(ip) / steps;
        x.x_opt = static_cast<double>(io) / steps;
        double mem = mem_const + x.x_ckpt * q.M * q.cl * q.N * q.dp +
                     x.x_param * q.pl * q.N + x.x_opt * q.ol * q.N;
        if (mem > dram) continue;
        if (alpha * q.N * q.gl >
            alpha * x.x_param * q.N * q.pl + x.x_ckpt * q.M * q.N * q.cl + 1e-9)
          continue;
        double tf = 0, tb = 0;
        stage_times(q, alpha, x, &tf, &tb);
        if (!best.feasible || tf + tb < best_t) {
          best.feasible = true;
          best_t = tf + tb;
          best.split = x;
          best.t_fwd_stage = tf;
          best.t_bwd_stage = tb;
        }
      }
  if (best.feasible) {
    best.iteration_estimate =
        q.N * (best.t_fwd_stage + best.t_bwd_stage) + machine.fixed_overhead_time;
    best.throughput_estimate = q.M * static_cast<double>(model.microbatch_size) *
                               static_cast<double>(machine.num_gpus) /
                               best.iteration_estimate;
  }
  return best;
}

double whole_model_projection(const PlannerSolution& sol, const ModelSpec& model,
                               const MachineSpec& machine) {
  return static_cast<double>(model.num_layers) * (sol.t_fwd_stage + sol.t_bwd_stage) +
         machine.fixed_overhead_time;
}

}  // namespace offsim
