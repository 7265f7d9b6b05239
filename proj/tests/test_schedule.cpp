#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "helpers.hpp"
#include "offsim/json_io.hpp"
#include "offsim/schedule.hpp"
#include "offsim/traffic.hpp"

using namespace offsim;
using offsim::testing::split_of;
using offsim::testing::tiny_model;

namespace {

void check_well_formed(const SchedulePlan& plan) {
  int n = static_cast<int>(plan.tasks.size());
  for (int i = 0; i < n; ++i) {
    const Task& t = plan.tasks[static_cast<size_t>(i)];
    REQUIRE(t.id == i);
    for (int d : t.deps) {
      REQUIRE(d >= 0);
      REQUIRE(d < i);  // emission order is a topological order
    }
    REQUIRE(t.cross_iter_dep >= -1);
    REQUIRE(t.cross_iter_dep < n);
    if (t.kind == TaskKind::Xfer) REQUIRE(t.bytes > 0);
  }
}

}  // namespace

TEST_CASE("built plans sum to the closed-form ledgers exactly") {
  int verified_delayed = 0;
  for (int n : {1, 2, 3, 4, 8}) {
    for (int big_m : {1, 2, 3, 4, 8}) {
      for (StorageSplit sp : {split_of(0, 0, 0), split_of(1, 1, 1),
                              split_of(0.3, 0.7, 0.5), split_of(0.123, 0.01, 0.999)}) {
        ModelSpec m = tiny_model(n, 64, 128);
        CAPTURE(n);
        CAPTURE(big_m);
        CAPTURE(sp.x_ckpt);
        SchedulePlan h = build_horizontal(m, big_m, sp);
        check_well_formed(h);
        CHECK(plan_traffic(h) == horizontal_traffic(m, big_m, sp));
        for (double alpha : {0.0, 0.25, 0.5, 1.0}) {
          CAPTURE(alpha);
          SchedulePlan v;
          try {
            v = build_vertical(m, big_m, sp, alpha);
          } catch (const InfeasibleError&) {
            continue;  // delayed gradients can't be re-housed for this combo
          }
          check_well_formed(v);
          CHECK(plan_traffic(v) == vertical_traffic(m, big_m, sp, alpha));
          if (alpha > 0) ++verified_delayed;
        }
      }
    }
  }
  CHECK(verified_delayed > 50);  // the grid must actually exercise alpha > 0
}

TEST_CASE("single-pass plans sum to their ledger, including boundary ckpts") {
  ModelSpec m = tiny_model(4);
  for (int batch : {1, 2, 3, 6}) {
    for (bool extra : {false, true}) {
      SchedulePlan p = build_single_fb(m, batch, extra, split_of(0.2, 0.4, 0));
      check_well_formed(p);
      CHECK(plan_traffic(p) == single_fb_traffic(m, batch, extra, split_of(0.2, 0.4, 0)));
      CHECK(p.compute_scale ==
            doctest::Approx(static_cast<double>(batch) / m.microbatch_size));
      CHECK(p.samples_per_iteration == static_cast<u64>(batch));
    }
  }
}

TEST_CASE("sharded plans also match their ledgers") {
  ModelSpec m = tiny_model(3, 64, 512);
  m.data_parallel_degree = 3;
  for (int big_m : {1, 4}) {
    StorageSplit sp = split_of(0.5, 0.5, 0.5);
    CHECK(plan_traffic(build_vertical(m, big_m, sp, 0.2)) ==
          vertical_traffic(m, big_m, sp, 0.2));
    CHECK(plan_traffic(build_horizontal(m, big_m, sp)) ==
          horizontal_traffic(m, big_m, sp));
  }
}

TEST_CASE("plan construction is deterministic") {
  ModelSpec m = tiny_model(4, 64, 256);
  SchedulePlan a = build_vertical(m, 3, split_of(0.3, 0.3, 0.3), 0.2);
  SchedulePlan b = build_vertical(m, 3, split_of(0.3, 0.3, 0.3), 0.2);
  CHECK(plan_to_json(a).dump() == plan_to_json(b).dump());
}

TEST_CASE("overlap windows count layer*micro-batch compute slots") {
  ModelSpec m = tiny_model(6, 64, 64);
  StorageSplit sp = split_of(1, 1, 1);
  CHECK(overlap_window(build_horizontal(m, 4, sp)) == 5);       // N-1
  CHECK(overlap_window(build_vertical(m, 4, sp, 0.0)) == 20);   // (N-1)*M
  CHECK(overlap_window(build_vertical(m, 4, sp, 0.5)) == 30);   // +alpha*(N-1)*M
  CHECK(overlap_window(build_single_fb(m, 2, false, sp)) == 5);
  CHECK(overlap_window(build_vertical(tiny_model(1), 4, sp, 0.0)) == 0);
}

TEST_CASE("alpha=0 emits no delayed-step tasks") {
  ModelSpec m = tiny_model(4);
  SchedulePlan v = build_vertical(m, 2, split_of(0, 0, 0), 0.0);
  int cpu_steps = 0;
  for (const Task& t : v.tasks)
    if (t.kind == TaskKind::CpuStep) ++cpu_steps;
  CHECK(cpu_steps == m.num_layers);  // one immediate step per layer, no more
}

TEST_CASE("delayed gradients that cannot be re-housed are rejected") {
  ModelSpec m = tiny_model(4);
  // All-SSD split reclaims nothing; retained gradients have nowhere to live.
  CHECK_THROWS_AS(build_vertical(m, 2, split_of(0, 0, 0), 0.5), InfeasibleError);
  // CPU-resident parameters and checkpoints reclaim enough space: per layer,
  // 0.5 * grad (98304 B) <= 0.5 * params (49152 B) + M * ckpt (8192 B each).
  CHECK_THROWS_AS(build_vertical(m, 2, split_of(1, 1, 0), 0.5), InfeasibleError);
  CHECK_NOTHROW(build_vertical(m, 6, split_of(1, 1, 0), 0.5));
}

TEST_CASE("cross-iteration dependencies appear only with a delay ratio") {
  ModelSpec m = tiny_model(4, 64, 128);
  auto count_cross = [](const SchedulePlan& p) {
    int c = 0;
    for (const Task& t : p.tasks)
      if (t.cross_iter_dep >= 0) ++c;
    return c;
  };
  SchedulePlan eager = build_vertical(m, 2, split_of(1, 1, 1), 0.0);
  SchedulePlan delayed = build_vertical(m, 2, split_of(1, 1, 1), 0.5);
  CHECK(count_cross(delayed) > count_cross(eager));
  CHECK(count_cross(eager) == m.num_layers);  // parameter-freshness edges only
}

TEST_CASE("memory metadata responds to the split") {
  ModelSpec m = tiny_model(4);
  SchedulePlan ssd = build_vertical(m, 2, split_of(0, 0, 0), 0.0);
  SchedulePlan cpu = build_vertical(m, 2, split_of(1, 1, 1), 0.0);
  CHECK(cpu.cpu_peak_bytes > ssd.cpu_peak_bytes);
  CHECK(cpu.gpu_static_bytes == ssd.gpu_static_bytes);  // split lives off-GPU
  CHECK(!ssd.gpu_binding.empty());
}

TEST_CASE("builders reject invalid arguments") {
  ModelSpec m = tiny_model(4);
  CHECK_THROWS_AS(build_vertical(m, 0, split_of(0, 0, 0), 0.0), ValidationError);
  CHECK_THROWS_AS(build_vertical(m, 2, split_of(0, 0, 0), -0.1), ValidationError);
  CHECK_THROWS_AS(build_horizontal(m, 2, split_of(0, 2, 0)), ValidationError);
  CHECK_THROWS_AS(build_single_fb(m, 0, false, split_of(0, 0, 0)), ValidationError);
}
