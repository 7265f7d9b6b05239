#ifndef OFFSIM_TYPES_HPP
#define OFFSIM_TYPES_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace offsim {

using u64 = std::uint64_t;

// Bad user input (config files, CLI arguments, spec fields out of range).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A schedule or configuration that cannot be executed on the given machine
// (memory caps, delay-ratio residency, no feasible storage split).
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal inconsistency in a generated plan (cycle, dangling dependency).
class PlanBugError : public std::logic_error {
 public:
  explicit PlanBugError(const std::string& msg) : std::logic_error(msg) {}
};

// Byte-splitting helpers shared by the closed-form ledgers and the schedule
// builders. Both sides must round identically or the exact-equality oracle
// between them breaks.
inline u64 cpu_portion(u64 bytes, double cpu_fraction) {
  if (cpu_fraction <= 0.0) return 0;
  if (cpu_fraction >= 1.0) return bytes;
  u64 part = static_cast<u64>(std::llround(cpu_fraction * static_cast<double>(bytes)));
  return part > bytes ? bytes : part;
}

inline u64 ssd_portion(u64 bytes, double cpu_fraction) {
  return bytes - cpu_portion(bytes, cpu_fraction);
}

// Size of chunk `index` when `total` is divided into `parts` near-equal
// pieces; chunk sizes sum to `total` exactly.
inline u64 chunk_size(u64 total, int parts, int index) {
  u64 p = static_cast<u64>(parts);
  u64 base = total / p;
  u64 rem = total % p;
  return base + (static_cast<u64>(index) < rem ? 1 : 0);
}

inline u64 scaled_portion(u64 bytes, double fraction) {
  if (fraction <= 0.0) return 0;
  if (fraction >= 1.0) return bytes;
  u64 part = static_cast<u64>(std::llround(fraction * static_cast<double>(bytes)));
  return part > bytes ? bytes : part;
}

}  // namespace offsim

#endif  // OFFSIM_TYPES_HPP
