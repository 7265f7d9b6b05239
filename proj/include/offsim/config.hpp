#pragma once

#include <optional>
#include <string>

#include "offsim/machine.hpp"
#include "offsim/model.hpp"
#include "offsim/schedule.hpp"

namespace offsim {

enum class OutputFormat { Json, Csv };

// A full run description loaded from an INI-style config file with sections
// [model], [machine] and optional [schedule] / [output].
struct RunConfig {
  ModelSpec model;
  MachineSpec machine;
  ScheduleKind schedule;
  int num_microbatches = 1;
  int batch = 1;  // SingleFB only
  std::optional<StorageSplit> split;  // planner fills this when absent
  OutputFormat format = OutputFormat::Json;
  std::string out_path;  // empty = stdout
};

// Parses and validates a config file. Throws ValidationError naming the
// offending section/field on any missing or malformed entry.
RunConfig parse_config(const std::string& path);

}  // namespace offsim
