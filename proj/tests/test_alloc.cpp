#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "offsim/alloc.hpp"

using namespace offsim;

namespace {

// Independent reference: enumerate every partition of n (non-increasing part
// lists) and take the cheapest total grant, ties toward fewer parts.
void enumerate(int remaining, int max_part, u64 bytes, u64 cost, int parts,
               u64* best_cost, int* best_parts) {
  if (remaining == 0) {
    if (cost < *best_cost || (cost == *best_cost && parts < *best_parts)) {
      *best_cost = cost;
      *best_parts = parts;
    }
    return;
  }
  for (int p = std::min(remaining, max_part); p >= 1; --p)
    enumerate(remaining - p, p, bytes,
              cost + next_pow2(static_cast<u64>(p) * bytes), parts + 1,
              best_cost, best_parts);
}

}  // namespace

TEST_CASE("next_pow2 rounds up to powers of two") {
  CHECK(next_pow2(0) == 0);
  CHECK(next_pow2(1) == 1);
  CHECK(next_pow2(2) == 2);
  CHECK(next_pow2(3) == 4);
  CHECK(next_pow2(4096) == 4096);
  CHECK(next_pow2(4097) == 8192);
}

TEST_CASE("a 4.1 GiB buffer is granted a full 8 GiB block") {
  u64 bytes = static_cast<u64>(4.1 * (1ull << 30));
  AllocPlan plan = plan_alloc(1, bytes);
  REQUIRE(plan.requests.size() == 1);
  CHECK(plan.total_granted == (1ull << 33));  // 8 GiB
  CHECK(plan.total_requested == bytes);
}

TEST_CASE("grouping can eliminate padding entirely") {
  // 4 buffers of 3 units: one request of 4 (12 -> 16) beats four of
  // 1 (4 * 4 = 16)? Equal bytes, so fewer requests wins; but pairing
  // (2 * 6 -> 2 * 8 = 16) also ties. The plan must pick a single request.
  AllocPlan plan = plan_alloc(4, 3);
  CHECK(plan.total_granted == 16);
  CHECK(plan.requests.size() == 1);
}

TEST_CASE("power-of-two buffer sizes never pad") {
  AllocPlan plan = plan_alloc(13, 4096);
  CHECK(plan.total_granted == plan.total_requested);
}

TEST_CASE("the DP matches exhaustive partition search for n <= 20") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<u64> size_d(1, 1 << 20);
  for (int trial = 0; trial < 50; ++trial) {
    u64 bytes = size_d(rng);
    for (int n : {1, 2, 3, 5, 8, 13, 20}) {
      CAPTURE(bytes);
      CAPTURE(n);
      u64 best_cost = ~0ull;
      int best_parts = 1 << 30;
      enumerate(n, n, bytes, 0, 0, &best_cost, &best_parts);
      AllocPlan plan = plan_alloc(n, bytes);
      CHECK(plan.total_granted == best_cost);
      CHECK(static_cast<int>(plan.requests.size()) == best_parts);
      // Internal consistency of the reported plan.
      u64 sum_granted = 0;
      int sum_buffers = 0;
      for (const AllocRequest& r : plan.requests) {
        CHECK(r.granted_bytes == next_pow2(r.requested_bytes));
        CHECK(r.requested_bytes == static_cast<u64>(r.buffer_count) * bytes);
        sum_granted += r.granted_bytes;
        sum_buffers += r.buffer_count;
      }
      CHECK(sum_granted == plan.total_granted);
      CHECK(sum_buffers == n);
    }
  }
}

TEST_CASE("invalid requests are rejected") {
  CHECK_THROWS_AS(plan_alloc(0, 16), ValidationError);
  CHECK_THROWS_AS(plan_alloc(4, 0), ValidationError);
}
