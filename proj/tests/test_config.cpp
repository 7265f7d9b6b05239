#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "offsim/config.hpp"

using namespace offsim;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& text) {
    static int counter = 0;
    path = "test_config_tmp_" + std::to_string(counter++) + ".ini";
    std::ofstream out(path);
    out << text;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

const char* kMinimal =
    "[model]\n"
    "num_layers = 4\nhidden_dim = 64\nnum_heads = 4\nseq_len = 32\n"
    "microbatch_size = 2\n"
    "[machine]\n"
    "gpu_mem_bytes = 1000000000\ncpu_usable_dram_bytes = 2000000000\n"
    "pcie_h2d_bw = 1e9\npcie_d2h_bw = 1e9\nssd_read_bw = 1e8\nssd_write_bw = 1e8\n"
    "fwd_compute_time_per_layer_per_mb = 0.01\n"
    "bwd_compute_time_per_layer_per_mb = 0.02\n"
    "cpu_step_throughput = 1e8\n";

}  // namespace

TEST_CASE("minimal config applies defaults and leaves the split for the planner") {
  TempFile f(kMinimal);
  RunConfig cfg = parse_config(f.path);
  CHECK(cfg.model.num_layers == 4);
  CHECK(cfg.model.low_precision_bytes == 2);      // default
  CHECK(cfg.machine.num_gpus == 1);               // default
  CHECK(cfg.machine.fixed_overhead_time == 0.0);  // default
  CHECK(cfg.machine.ssd_duplex);                  // default
  CHECK(cfg.schedule.delay_ratio == 0.0);         // default alpha
  CHECK(!cfg.split.has_value());                  // planner's job
  CHECK(cfg.format == OutputFormat::Json);
}

TEST_CASE("the bundled demo config parses to the 65B geometry") {
  RunConfig cfg = parse_config(CONFIG_DIR "/gpt65b-a100.example");
  CHECK(cfg.model.num_layers == 80);
  CHECK(cfg.model.num_heads == 64);
  CHECK(cfg.model.hidden_dim == 8192);
  CHECK(cfg.schedule.variant == ScheduleVariant::Vertical);
}

TEST_CASE("missing fields are named") {
  TempFile f(
      "[model]\nnum_layers = 4\n[machine]\ngpu_mem_bytes = 1\n");
  CHECK_THROWS_WITH_AS(parse_config(f.path),
                       "missing required field model.hidden_dim",
                       ValidationError);
}

TEST_CASE("out-of-range split fractions are named") {
  TempFile f(std::string(kMinimal) + "[schedule]\nx_ckpt = 1.5\n");
  CHECK_THROWS_WITH_AS(parse_config(f.path),
                       "field schedule.x_ckpt must be in [0,1]", ValidationError);
}

TEST_CASE("type mismatches report the expected type") {
  TempFile f(std::string(kMinimal) + "[schedule]\nmicrobatches = lots\n");
  CHECK_THROWS_WITH_AS(parse_config(f.path),
                       "field schedule.microbatches must be a integer, got 'lots'",
                       ValidationError);
}

TEST_CASE("unknown fields are rejected") {
  TempFile f(std::string(kMinimal) + "[schedule]\nwarp_factor = 9\n");
  CHECK_THROWS_AS(parse_config(f.path), ValidationError);
}

TEST_CASE("a partial split counts as a split") {
  TempFile f(std::string(kMinimal) + "[schedule]\nx_param = 0.5\n");
  RunConfig cfg = parse_config(f.path);
  REQUIRE(cfg.split.has_value());
  CHECK(cfg.split->x_param == 0.5);
  CHECK(cfg.split->x_ckpt == 0.0);
}

TEST_CASE("comments and blank lines are ignored") {
  TempFile f(std::string("# leading comment\n\n; alt comment\n") + kMinimal);
  CHECK_NOTHROW(parse_config(f.path));
}

TEST_CASE("missing file and missing sections fail cleanly") {
  CHECK_THROWS_AS(parse_config("does_not_exist.ini"), ValidationError);
  TempFile f("[model]\nnum_layers = 4\n");
  CHECK_THROWS_AS(parse_config(f.path), ValidationError);
}
