#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "offsim/roofline.hpp"
#include "offsim/simulator.hpp"

using namespace offsim;
using offsim::testing::roomy_machine;
using offsim::testing::split_of;
using offsim::testing::tiny_model;

TEST_CASE("half-duplex opt-state round trip matches 2*(3*4*P)/bw") {
  ModelSpec m = tiny_model(80, 8192, 2048, 8);
  MachineSpec mc = roomy_machine();
  mc.ssd_read_bw = 3e9;
  mc.ssd_write_bw = 3e9;
  mc.ssd_duplex = false;
  u64 p_total = 80ull * 12 * 8192 * 8192;
  double round_trip = 2.0 * (3.0 * 4.0 * static_cast<double>(p_total)) / 3e9;
  CHECK(io_roofline(m, mc, 16) == doctest::Approx(16.0 / round_trip));
}

TEST_CASE("full-duplex round trip is the slower direction alone") {
  ModelSpec m = tiny_model(4, 512, 64);
  MachineSpec mc = roomy_machine();  // write bw (4e7) < read bw (5e7)
  ModelTotals t = model_totals(m);
  double write = static_cast<double>(t.opt_state_bytes) / mc.ssd_write_bw;
  CHECK(io_roofline(m, mc, 8) == doctest::Approx(8.0 / write));
}

TEST_CASE("CPU-resident optimizer states raise or remove the I/O ceiling") {
  ModelSpec m = tiny_model(4, 512, 64);
  MachineSpec mc = roomy_machine();
  double all_ssd = io_roofline(m, mc, 8, 0.0);
  double half = io_roofline(m, mc, 8, 0.5);
  CHECK(half == doctest::Approx(2 * all_ssd));
  CHECK(std::isinf(io_roofline(m, mc, 8, 1.0)));
}

TEST_CASE("compute roofline is b*num_gpus / (N*(tf+tb))") {
  ModelSpec m = tiny_model(10, 256, 64, 4);
  MachineSpec mc = roomy_machine();
  mc.num_gpus = 3;
  double expect = 4.0 * 3 / (10 * (0.010 + 0.021));
  CHECK(compute_roofline(m, mc) == doctest::Approx(expect));
}

TEST_CASE("io roofline scales linearly with the batch") {
  ModelSpec m = tiny_model(4, 512, 64);
  MachineSpec mc = roomy_machine();
  CHECK(io_roofline(m, mc, 32) == doctest::Approx(4 * io_roofline(m, mc, 8)));
}

TEST_CASE("simulated points never exceed either roofline") {
  ModelSpec m = tiny_model(4, 256, 64);
  for (bool duplex : {true, false}) {
    MachineSpec mc = roomy_machine();
    mc.ssd_duplex = duplex;
    for (StorageSplit sp : {split_of(0, 0, 0), split_of(1, 1, 0), split_of(0.5, 0.5, 0.5)}) {
      for (int big_m : {1, 2, 8, 32}) {
        CAPTURE(duplex);
        CAPTURE(big_m);
        SimReport rep = simulate(build_vertical(m, big_m, sp, 0.0), mc);
        u64 batch = static_cast<u64>(big_m) * static_cast<u64>(m.microbatch_size);
        double io = io_roofline(m, mc, batch, sp.x_opt);
        double comp = compute_roofline(m, mc);
        CHECK(rep.throughput <= io * (1 + 1e-9));
        CHECK(rep.throughput <= comp * (1 + 1e-9));
      }
    }
  }
}

TEST_CASE("rooflines reject bad input") {
  ModelSpec m = tiny_model();
  MachineSpec mc = roomy_machine();
  CHECK_THROWS_AS(io_roofline(m, mc, 0), ValidationError);
  CHECK_THROWS_AS(io_roofline(m, mc, 4, 1.5), ValidationError);
}
