#pragma once

#include <array>
#include <string>

#include "offsim/model.hpp"
#include "offsim/schedule.hpp"
#include "offsim/types.hpp"

namespace offsim {

// Per-iteration traffic in bytes, broken down by link and by data kind.
// Rows are LinkKind (H2D, D2H, SSD read, SSD write); columns are DataKind.
struct TrafficLedger {
  static constexpr int kLinks = 4;
  static constexpr int kData = 5;
  std::array<std::array<u64, kData>, kLinks> bytes{};

  u64& at(LinkKind link, DataKind data) {
    return bytes[static_cast<size_t>(link)][static_cast<size_t>(data)];
  }
  u64 at(LinkKind link, DataKind data) const {
    return bytes[static_cast<size_t>(link)][static_cast<size_t>(data)];
  }
  u64 link_total(LinkKind link) const {
    u64 t = 0;
    for (u64 v : bytes[static_cast<size_t>(link)]) t += v;
    return t;
  }
  u64 total() const {
    u64 t = 0;
    for (int l = 0; l < kLinks; ++l) t += link_total(static_cast<LinkKind>(l));
    return t;
  }
  bool operator==(const TrafficLedger&) const = default;
};

const char* data_name(DataKind d);

// Closed-form per-iteration traffic for a schedule shape. Independent of the
// task-graph builders; the simulator's summed ledger must match these exactly.
TrafficLedger horizontal_traffic(const ModelSpec& model, int num_microbatches,
                                 const StorageSplit& split);
TrafficLedger vertical_traffic(const ModelSpec& model, int num_microbatches,
                               const StorageSplit& split, double alpha);
TrafficLedger single_fb_traffic(const ModelSpec& model, int batch, bool extra_ckpt,
                                const StorageSplit& split);

// Sums transfer-task bytes of a built plan into a ledger (one iteration).
TrafficLedger plan_traffic(const SchedulePlan& plan);

}  // namespace offsim
