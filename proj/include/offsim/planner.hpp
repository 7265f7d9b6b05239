#pragma once

#include "offsim/machine.hpp"
#include "offsim/model.hpp"
#include "offsim/schedule.hpp"

namespace offsim {

// Analytical estimate of one configuration of the vertical schedule: the
// storage split that minimizes the per-layer overlapped stage times, plus
// the resulting iteration-time and throughput projections.
struct PlannerSolution {
  bool feasible = false;
  int num_microbatches = 0;
  double alpha = 0.0;
  StorageSplit split;
  double t_fwd_stage = 0.0;   // forward time per layer, all micro-batches
  double t_bwd_stage = 0.0;   // backward time per layer, all micro-batches
  double iteration_estimate = 0.0;
  double throughput_estimate = 0.0;  // samples / second across all GPUs
};

// Solves the storage-split linear program for fixed micro-batch count and
// delay ratio. The LP minimizes t_fwd + t_bwd plus a small regularizer that
// prefers keeping bytes off the SSD when time is unaffected; the reported
// stage times are recomputed exactly from the chosen split.
PlannerSolution solve_config(const ModelSpec& model, const MachineSpec& machine,
                             int num_microbatches, double alpha);

// Searches micro-batch counts 1, 2, ... and a delay-ratio grid
// {0.01, ..., 0.50}; stops when doubling effort no longer improves projected
// throughput by more than 1%, returning the last configuration that did.
PlannerSolution find_optimal_config(const ModelSpec& model, const MachineSpec& machine);

// Independent cross-check of the LP: evaluates the exact stage times over a
// regular grid of storage splits (default step 0.01 in each coordinate,
// restricted to CPU-memory-feasible points) and returns the best one.
PlannerSolution grid_search_config(const ModelSpec& model, const MachineSpec& machine,
                                   int num_microbatches, double alpha,
                                   int steps = 100);

// Projects a solution to a full-model iteration time (all layers plus the
// fixed per-iteration overhead).
double whole_model_projection(const PlannerSolution& sol, const ModelSpec& model,
                              const MachineSpec& machine);

}  // namespace offsim
