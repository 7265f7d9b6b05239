#include "offsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace offsim {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t z = s.find_last_not_of(" \t\r\n");
  return s.substr(a, z - a + 1);
}

using Section = std::map<std::string, std::string>;
using Ini = std::map<std::string, Section>;

Ini parse_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  Ini ini;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      ini[section];
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": expected key = value";
      throw ValidationError(msg.str());
    }
    if (section.empty()) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": key before any [section]";
      throw ValidationError(msg.str());
    }
    ini[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return ini;
}

// Typed field access with errors naming section.field and the expected type.
class Fields {
 public:
  Fields(const std::string& name, const Section& sec) : name_(name), sec_(sec) {}

  const std::string* find(const std::string& key) const {
    auto it = sec_.find(key);
    return it == sec_.end() ? nullptr : &it->second;
  }

  std::string raw(const std::string& key) const {
    const std::string* v = find(key);
    if (!v)
      throw ValidationError("missing required field " + name_ + "." + key);
    return *v;
  }

  template <typename T>
  T parse(const std::string& key, const std::string& raw_value,
          const char* type_name) const {
    std::istringstream in(raw_value);
    T value{};
    in >> value;
    std::string rest;
    if (!in || (in >> rest, !rest.empty()))
      throw ValidationError("field " + name_ + "." + key + " must be a " +
                            type_name + ", got '" + raw_value + "'");
    return value;
  }

  long long integer(const std::string& key) const {
    return parse<long long>(key, raw(key), "integer");
  }
  long long integer(const std::string& key, long long def) const {
    const std::string* v = find(key);
    return v ? parse<long long>(key, *v, "integer") : def;
  }
  double real(const std::string& key) const {
    return parse<double>(key, raw(key), "number");
  }
  double real(const std::string& key, double def) const {
    const std::string* v = find(key);
    return v ? parse<double>(key, *v, "number") : def;
  }
  bool boolean(const std::string& key, bool def) const {
    const std::string* v = find(key);
    if (!v) return def;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ValidationError("field " + name_ + "." + key +
                          " must be a boolean (true/false), got '" + *v + "'");
  }

  void reject_unknown(std::initializer_list<const char*> known) const {
    for (const auto& [key, value] : sec_) {
      (void)value;
      if (std::find_if(known.begin(), known.end(), [&](const char* k) {
            return key == k;
          }) == known.end())
        throw ValidationError("unknown field " + name_ + "." + key);
    }
  }

 private:
  std::string name_;
  const Section& sec_;
};

}  // namespace

RunConfig parse_config(const std::string& path) {
  Ini ini = parse_ini(path);
  if (!ini.count("model")) throw ValidationError("missing [model] section");
  if (!ini.count("machine")) throw ValidationError("missing [machine] section");

  RunConfig cfg;
  {
    Fields f("model", ini["model"]);
    f.reject_unknown({"num_layers", "hidden_dim", "num_heads", "seq_len",
                      "microbatch_size", "low_precision_bytes",
                      "full_precision_bytes", "optimizer_states_per_element",
                      "data_parallel_degree"});
    cfg.model.num_layers = static_cast<int>(f.integer("num_layers"));
    cfg.model.hidden_dim = static_cast<int>(f.integer("hidden_dim"));
    cfg.model.num_heads = static_cast<int>(f.integer("num_heads"));
    cfg.model.seq_len = static_cast<int>(f.integer("seq_len"));
    cfg.model.microbatch_size = static_cast<int>(f.integer("microbatch_size"));
    cfg.model.low_precision_bytes =
        static_cast<int>(f.integer("low_precision_bytes", 2));
    cfg.model.full_precision_bytes =
        static_cast<int>(f.integer("full_precision_bytes", 4));
    cfg.model.optimizer_states_per_element =
        static_cast<int>(f.integer("optimizer_states_per_element", 3));
    cfg.model.data_parallel_degree =
        static_cast<int>(f.integer("data_parallel_degree", 1));
    cfg.model.validate();
  }
  {
    Fields f("machine", ini["machine"]);
    f.reject_unknown({"gpu_mem_bytes", "cpu_usable_dram_bytes", "pcie_h2d_bw",
                      "pcie_d2h_bw", "ssd_read_bw", "ssd_write_bw",
                      "fwd_compute_time_per_layer_per_mb",
                      "bwd_compute_time_per_layer_per_mb", "cpu_step_throughput",
                      "fixed_overhead_time", "num_gpus", "gpu_working_set_bytes",
                      "ssd_duplex"});
    cfg.machine.gpu_mem_bytes = static_cast<u64>(f.integer("gpu_mem_bytes"));
    cfg.machine.cpu_usable_dram_bytes =
        static_cast<u64>(f.integer("cpu_usable_dram_bytes"));
    cfg.machine.pcie_h2d_bw = f.real("pcie_h2d_bw");
    cfg.machine.pcie_d2h_bw = f.real("pcie_d2h_bw");
    cfg.machine.ssd_read_bw = f.real("ssd_read_bw");
    cfg.machine.ssd_write_bw = f.real("ssd_write_bw");
    cfg.machine.fwd_compute_time_per_layer_per_mb =
        f.real("fwd_compute_time_per_layer_per_mb");
    cfg.machine.bwd_compute_time_per_layer_per_mb =
        f.real("bwd_compute_time_per_layer_per_mb");
    cfg.machine.cpu_step_throughput = f.real("cpu_step_throughput");
    cfg.machine.fixed_overhead_time = f.real("fixed_overhead_time", 0.0);
    cfg.machine.num_gpus = static_cast<int>(f.integer("num_gpus", 1));
    cfg.machine.gpu_working_set_bytes =
        static_cast<u64>(f.integer("gpu_working_set_bytes", 0));
    cfg.machine.ssd_duplex = f.boolean("ssd_duplex", true);
    cfg.machine.validate();
  }
  if (ini.count("schedule")) {
    Fields f("schedule", ini["schedule"]);
    f.reject_unknown({"variant", "microbatches", "alpha", "batch", "extra_ckpt",
                      "x_ckpt", "x_param", "x_opt"});
    std::string variant = f.find("variant") ? f.raw("variant") : "vertical";
    if (variant == "horizontal") cfg.schedule.variant = ScheduleVariant::Horizontal;
    else if (variant == "vertical") cfg.schedule.variant = ScheduleVariant::Vertical;
    else if (variant == "single-fb") cfg.schedule.variant = ScheduleVariant::SingleFB;
    else
      throw ValidationError(
          "field schedule.variant must be one of horizontal|vertical|single-fb, got '" +
          variant + "'");
    cfg.num_microbatches = static_cast<int>(f.integer("microbatches", 1));
    if (cfg.num_microbatches < 1)
      throw ValidationError("field schedule.microbatches must be >= 1");
    cfg.schedule.delay_ratio = f.real("alpha", 0.0);
    if (cfg.schedule.delay_ratio < 0.0 || cfg.schedule.delay_ratio > 1.0)
      throw ValidationError("field schedule.alpha must be in [0,1]");
    cfg.batch = static_cast<int>(f.integer("batch", 1));
    cfg.schedule.extra_ckpt = f.boolean("extra_ckpt", false);
    bool any = f.find("x_ckpt") || f.find("x_param") || f.find("x_opt");
    if (any) {
      StorageSplit split;
      split.x_ckpt = f.real("x_ckpt", 0.0);
      split.x_param = f.real("x_param", 0.0);
      split.x_opt = f.real("x_opt", 0.0);
      if (split.x_ckpt < 0 || split.x_ckpt > 1)
        throw ValidationError("field schedule.x_ckpt must be in [0,1]");
      if (split.x_param < 0 || split.x_param > 1)
        throw ValidationError("field schedule.x_param must be in [0,1]");
      if (split.x_opt < 0 || split.x_opt > 1)
        throw ValidationError("field schedule.x_opt must be in [0,1]");
      cfg.split = split;
    }
  }
  if (ini.count("output")) {
    Fields f("output", ini["output"]);
    f.reject_unknown({"format", "path"});
    std::string fmt = f.find("format") ? f.raw("format") : "json";
    if (fmt == "json") cfg.format = OutputFormat::Json;
    else if (fmt == "csv") cfg.format = OutputFormat::Csv;
    else
      throw ValidationError("field output.format must be json or csv, got '" +
                            fmt + "'");
    if (f.find("path")) cfg.out_path = f.raw("path");
  }
  return cfg;
}

}  // namespace offsim
