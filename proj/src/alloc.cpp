#include "offsim/alloc.hpp"

#include <bit>
#include <limits>

namespace offsim {

u64 next_pow2(u64 v) {
  if (v == 0) return 0;
  return std::bit_ceil(v);
}

AllocPlan plan_alloc(int count, u64 buffer_bytes) {
  if (count < 1) throw ValidationError("plan_alloc: count must be >= 1");
  if (buffer_bytes == 0) throw ValidationError("plan_alloc: buffer_bytes must be > 0");

  const size_t n = static_cast<size_t>(count);
  // best[k]: minimal granted bytes for k buffers; reqs[k]: fewest requests
  // achieving it; pick[k]: buffers in the last request of that optimum.
  std::vector<u64> best(n + 1, std::numeric_limits<u64>::max());
  std::vector<int> reqs(n + 1, 0);
  std::vector<int> pick(n + 1, 0);
  best[0] = 0;
  for (size_t k = 1; k <= n; ++k) {
    for (size_t j = 1; j <= k; ++j) {
      u64 grant = next_pow2(static_cast<u64>(j) * buffer_bytes);
      u64 cand = best[k - j] + grant;
      int cand_reqs = reqs[k - j] + 1;
      if (cand < best[k] || (cand == best[k] && cand_reqs < reqs[k])) {
        best[k] = cand;
        reqs[k] = cand_reqs;
        pick[k] = static_cast<int>(j);
      }
    }
  }

  AllocPlan plan;
  plan.total_requested = static_cast<u64>(count) * buffer_bytes;
  plan.total_granted = best[n];
  for (size_t k = n; k > 0; k -= static_cast<size_t>(pick[k])) {
    AllocRequest r;
    r.buffer_count = pick[k];
    r.requested_bytes = static_cast<u64>(pick[k]) * buffer_bytes;
    r.granted_bytes = next_pow2(r.requested_bytes);
    plan.requests.push_back(r);
  }
  return plan;
}

}  // namespace offsim
