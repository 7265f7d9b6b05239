#pragma once

#include <vector>

#include "offsim/types.hpp"

namespace offsim {

// Pinned host memory is granted in power-of-two blocks; a request for any
// size is rounded up to the next power of two. Grouping several equal-size
// buffers into one request can waste far less than rounding each buffer
// individually.
struct AllocRequest {
  int buffer_count = 0;   // buffers packed into this request
  u64 requested_bytes = 0;  // buffer_count * buffer_bytes
  u64 granted_bytes = 0;    // requested rounded up to a power of two
};

struct AllocPlan {
  std::vector<AllocRequest> requests;
  u64 total_requested = 0;
  u64 total_granted = 0;
};

u64 next_pow2(u64 v);

// Optimal grouping of `count` buffers of `buffer_bytes` each into requests,
// minimizing total granted bytes (ties broken toward fewer requests), by
// dynamic programming over the number of buffers still to place.
AllocPlan plan_alloc(int count, u64 buffer_bytes);

}  // namespace offsim
