#pragma once

#include "offsim/machine.hpp"
#include "offsim/model.hpp"

namespace offsim {

// Upper bound on samples/second from SSD bandwidth alone: the optimizer
// states not resident in CPU memory (fraction 1 - x_opt; default all on SSD)
// must make a full round trip every iteration. Returns +infinity when no
// bytes touch the SSD.
double io_roofline(const ModelSpec& model, const MachineSpec& machine,
                   u64 batch_samples, double x_opt = 0.0);

// Upper bound on samples/second from GPU compute alone: every sample passes
// through all layers' forward and recompute-plus-backward kernels.
double compute_roofline(const ModelSpec& model, const MachineSpec& machine);

}  // namespace offsim
