#ifndef OFFSIM_SCHEDULE_HPP
#define OFFSIM_SCHEDULE_HPP

#include <string>
#include <vector>

#include "offsim/machine.hpp"
#include "offsim/model.hpp"

namespace offsim {

enum class ScheduleVariant { SingleFB, Horizontal, Vertical };

struct ScheduleKind {
  ScheduleVariant variant = ScheduleVariant::Vertical;
  bool extra_ckpt = false;  // SingleFB only: checkpoint attention/FFN boundary too
  double delay_ratio = 0.0; // Vertical only: alpha in [0,1]
};

// Fractions of each data kind resident in CPU memory; the remainder lives on
// SSD. Gradients are always fully CPU-resident.
struct StorageSplit {
  double x_ckpt = 0.0;
  double x_param = 0.0;
  double x_opt = 0.0;

  void validate() const;
};

enum class TaskKind {
  FwdCompute,
  RecomputeAndBwd,
  CpuStep,
  Xfer,
  FixedOps,  // embedding/head/loss lump, one per iteration on the GPU
};

enum class DataKind { Param, Ckpt, GradAccum, InterlayerGrad, OptState };

constexpr int kAllMicrobatches = -1;

struct Task {
  int id = 0;
  TaskKind kind = TaskKind::Xfer;
  int layer = -1;
  int microbatch = kAllMicrobatches;
  int stage = 0;
  DataKind data = DataKind::Param;  // Xfer only
  LinkKind link = LinkKind::PCIe_H2D;
  u64 bytes = 0;      // Xfer only, always > 0
  u64 elements = 0;   // CpuStep only
  std::vector<int> deps;
  // Dependency on a task id in the previous iteration instance
  // (delayed optimizer work, parameter freshness); -1 if none.
  int cross_iter_dep = -1;
};

struct SchedulePlan {
  ScheduleKind kind;
  int num_microbatches = 1;  // M (1 for SingleFB)
  int num_layers = 1;
  StorageSplit split;
  std::vector<Task> tasks;

  // Metadata the simulator needs without re-deriving the model.
  u64 samples_per_iteration = 0;   // per GPU
  double compute_scale = 1.0;      // scales per-layer compute and working set
  u64 gpu_static_bytes = 0;        // params + gradient copies + ckpt staging
  u64 cpu_peak_bytes = 0;          // resident splits + gradient buffer + staging
  std::string gpu_binding = "";    // largest GPU memory consumer, for cap errors
};

SchedulePlan build_horizontal(const ModelSpec& model, int num_microbatches,
                              const StorageSplit& split);

// alpha is the delay ratio: the fraction of each layer's optimizer step
// deferred into the next iteration's forward pass. Rejects plans whose
// retained-gradient footprint exceeds the reclaimable CPU memory.
SchedulePlan build_vertical(const ModelSpec& model, int num_microbatches,
                            const StorageSplit& split, double alpha);

SchedulePlan build_single_fb(const ModelSpec& model, int batch, bool extra_ckpt,
                             const StorageSplit& split);

// Layer*microbatch units of GPU compute that can hide the optimizer step.
long long overlap_window(const SchedulePlan& plan);

}  // namespace offsim

#endif  // OFFSIM_SCHEDULE_HPP
