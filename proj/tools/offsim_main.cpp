#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "offsim/config.hpp"
#include "offsim/json_io.hpp"
#include "offsim/planner.hpp"
#include "offsim/roofline.hpp"
#include "offsim/simulator.hpp"
#include "offsim/traffic.hpp"

namespace {

using namespace offsim;

struct Options {
  std::string config_path;
  std::string out_path;
  std::string format;
  std::string schedule_override;
  std::string split_override;
  std::string m_range = "1..8";
  std::vector<std::string> schedules;
  std::string emit_plan_path;
  std::string from_plan_path;
  int microbatches = -1;
  double alpha = -1.0;
  bool oracle = false;
  int alloc_count = 0;
  std::string alloc_size;
};

void write_output(const RunConfig& cfg, const Options& opt, const std::string& text) {
  std::string path = !opt.out_path.empty() ? opt.out_path : cfg.out_path;
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open output path: " + path);
  out << text;
}

OutputFormat effective_format(const RunConfig& cfg, const Options& opt) {
  if (opt.format == "json") return OutputFormat::Json;
  if (opt.format == "csv") return OutputFormat::Csv;
  return cfg.format;
}

// Applies CLI overrides on top of the config file and fills a missing
// storage split: the planner's LP chooses it for vertical schedules, and the
// all-SSD split is used otherwise.
RunConfig load(const Options& opt, bool plan_fills_split = true) {
  RunConfig cfg = parse_config(opt.config_path);
  if (!opt.schedule_override.empty()) {
    if (opt.schedule_override == "horizontal")
      cfg.schedule.variant = ScheduleVariant::Horizontal;
    else if (opt.schedule_override == "vertical")
      cfg.schedule.variant = ScheduleVariant::Vertical;
    else if (opt.schedule_override == "single-fb")
      cfg.schedule.variant = ScheduleVariant::SingleFB;
    else
      throw ValidationError("--schedule must be horizontal|vertical|single-fb");
  }
  if (opt.microbatches >= 0) {
    if (opt.microbatches < 1) throw ValidationError("--microbatches must be >= 1");
    cfg.num_microbatches = opt.microbatches;
  }
  if (opt.alpha >= 0.0) {
    if (opt.alpha > 1.0) throw ValidationError("--alpha must be in [0,1]");
    cfg.schedule.delay_ratio = opt.alpha;
  }
  if (!opt.split_override.empty()) {
    StorageSplit s;
    char comma1 = 0, comma2 = 0;
    std::istringstream in(opt.split_override);
    if (!(in >> s.x_ckpt >> comma1 >> s.x_param >> comma2 >> s.x_opt) ||
        comma1 != ',' || comma2 != ',')
      throw ValidationError("--split must be x_ckpt,x_param,x_opt");
    s.validate();
    cfg.split = s;
  }
  if (!cfg.split && plan_fills_split) {
    if (cfg.schedule.variant == ScheduleVariant::Vertical) {
      PlannerSolution sol = solve_config(cfg.model, cfg.machine,
                                         cfg.num_microbatches,
                                         cfg.schedule.delay_ratio);
      if (!sol.feasible)
        throw InfeasibleError("no feasible storage split for this configuration");
      cfg.split = sol.split;
    } else {
      cfg.split = StorageSplit{};
    }
  }
  return cfg;
}

SchedulePlan build_plan(const RunConfig& cfg) {
  switch (cfg.schedule.variant) {
    case ScheduleVariant::Horizontal:
      return build_horizontal(cfg.model, cfg.num_microbatches, *cfg.split);
    case ScheduleVariant::Vertical:
      return build_vertical(cfg.model, cfg.num_microbatches, *cfg.split,
                            cfg.schedule.delay_ratio);
    case ScheduleVariant::SingleFB:
      return build_single_fb(cfg.model, cfg.batch, cfg.schedule.extra_ckpt,
                             *cfg.split);
  }
  throw ValidationError("unknown schedule variant");
}

std::string key_value_csv(const Json& j) {
  std::ostringstream out;
  out << "key,value\n";
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it->is_structured()) continue;
    out << it.key() << "," << it->dump() << "\n";
  }
  return out.str();
}

int cmd_simulate(const Options& opt) {
  RunConfig cfg = load(opt);
  SchedulePlan plan;
  if (!opt.from_plan_path.empty()) {
    std::ifstream in(opt.from_plan_path);
    if (!in) throw ValidationError("cannot open plan JSON: " + opt.from_plan_path);
    Json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("bad plan JSON: ") + e.what());
    }
    plan = plan_from_json(j);
  } else {
    plan = build_plan(cfg);
  }
  if (!opt.emit_plan_path.empty()) {
    std::ofstream out(opt.emit_plan_path);
    if (!out) throw ValidationError("cannot open --emit-plan path");
    out << plan_to_json(plan).dump(2) << "\n";
  }
  SimReport report = simulate(plan, cfg.machine);
  Json j = report_to_json(report);
  if (effective_format(cfg, opt) == OutputFormat::Csv)
    write_output(cfg, opt, key_value_csv(j));
  else
    write_output(cfg, opt, j.dump(2) + "\n");
  return 0;
}

struct Range {
  int lo = 1, hi = 1;
};

Range parse_range(const std::string& s) {
  Range r;
  size_t dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoi(s);
    } else {
      r.lo = std::stoi(s.substr(0, dots));
      r.hi = std::stoi(s.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw ValidationError("--m-range must be a..b with integers");
  }
  if (r.lo < 1 || r.hi < r.lo) throw ValidationError("--m-range must satisfy 1 <= a <= b");
  return r;
}

std::string sweep_row(const RunConfig& cfg, int m) {
  RunConfig c = cfg;
  c.num_microbatches = m;
  std::ostringstream row;
  u64 batch = static_cast<u64>(m) * static_cast<u64>(c.model.microbatch_size);
  if (c.schedule.variant == ScheduleVariant::SingleFB) {
    c.batch = m;
    batch = static_cast<u64>(m);
  }
  double io = io_roofline(c.model, c.machine, batch, c.split->x_opt);
  double comp = compute_roofline(c.model, c.machine) ;
  row << m << "," << batch << ",";
  try {
    SimReport rep = simulate(build_plan(c), c.machine);
    row << round_sig(rep.throughput) << "," << round_sig(io) << ","
        << round_sig(comp) << "," << rep.bound_class << ",ok";
  } catch (const InfeasibleError& e) {
    row << ",," << round_sig(comp) << ",infeasible," << e.what();
  }
  return row.str();
}

int cmd_sweep(const Options& opt) {
  RunConfig cfg = load(opt);
  Range r = parse_range(opt.m_range);
  std::ostringstream out;
  out << "M,batch,throughput,io_limit,compute_limit,bound_class,note\n";
  for (int m = r.lo; m <= r.hi; ++m) out << sweep_row(cfg, m) << "\n";
  write_output(cfg, opt, out.str());
  return 0;
}

// Schedule tokens: horizontal | vertical | single-fb, with an optional
// @alpha suffix for vertical (e.g. vertical@0.3).
RunConfig apply_token(RunConfig cfg, const std::string& token) {
  std::string name = token;
  size_t at = token.find('@');
  if (at != std::string::npos) {
    name = token.substr(0, at);
    try {
      cfg.schedule.delay_ratio = std::stod(token.substr(at + 1));
    } catch (const std::exception&) {
      throw ValidationError("bad alpha in schedule token: " + token);
    }
    if (cfg.schedule.delay_ratio < 0 || cfg.schedule.delay_ratio > 1)
      throw ValidationError("alpha in schedule token must be in [0,1]");
  }
  if (name == "horizontal") cfg.schedule.variant = ScheduleVariant::Horizontal;
  else if (name == "vertical") cfg.schedule.variant = ScheduleVariant::Vertical;
  else if (name == "single-fb") cfg.schedule.variant = ScheduleVariant::SingleFB;
  else throw ValidationError("unknown schedule token: " + token);
  return cfg;
}

int cmd_compare(const Options& opt) {
  if (opt.schedules.size() < 2)
    throw ValidationError("--schedules needs at least two entries");
  RunConfig base = load(opt);
  Range r = parse_range(opt.m_range);
  std::ostringstream out;
  out << "schedule";
  for (int m = r.lo; m <= r.hi; ++m) out << ",M=" << m;
  out << "\n";
  std::vector<std::vector<double>> matrix;
  for (const std::string& token : opt.schedules) {
    RunConfig cfg = apply_token(base, token);
    out << token;
    std::vector<double> row;
    for (int m = r.lo; m <= r.hi; ++m) {
      RunConfig c = cfg;
      c.num_microbatches = m;
      if (c.schedule.variant == ScheduleVariant::SingleFB) c.batch = m;
      double tp = 0.0;
      try {
        tp = simulate(build_plan(c), c.machine).throughput;
      } catch (const InfeasibleError&) {
        tp = 0.0;  // infeasible points show as zero throughput
      }
      row.push_back(tp);
      out << ",";
      if (tp > 0) out << round_sig(tp);
      else out << "infeasible";
    }
    matrix.push_back(std::move(row));
    out << "\n";
  }
  out << "ratio(last/first)";
  for (size_t i = 0; i < matrix.back().size(); ++i) {
    out << ",";
    if (matrix.front()[i] > 0 && matrix.back()[i] > 0)
      out << round_sig(matrix.back()[i] / matrix.front()[i]);
    else
      out << "n/a";
  }
  out << "\n";
  write_output(base, opt, out.str());
  return 0;
}

int cmd_plan(const Options& opt) {
  RunConfig cfg = load(opt, /*plan_fills_split=*/false);
  PlannerSolution sol = find_optimal_config(cfg.model, cfg.machine);
  if (!sol.feasible)
    throw InfeasibleError(
        "no feasible configuration at any micro-batch count; GPU or CPU memory "
        "capacity is the binding constraint");
  Json j = planner_to_json(sol);
  if (opt.oracle) {
    PlannerSolution grid = grid_search_config(cfg.model, cfg.machine,
                                              sol.num_microbatches, sol.alpha);
    double dev = 0.0;
    if (grid.feasible) {
      double a = sol.t_fwd_stage + sol.t_bwd_stage;
      double b = grid.t_fwd_stage + grid.t_bwd_stage;
      dev = std::abs(a - b) / std::max(b, 1e-300);
    }
    j["oracle_max_deviation"] = round_sig(dev);
  }
  if (effective_format(cfg, opt) == OutputFormat::Csv)
    write_output(cfg, opt, key_value_csv(j));
  else
    write_output(cfg, opt, j.dump(2) + "\n");
  return 0;
}

int cmd_traffic(const Options& opt) {
  RunConfig cfg = load(opt);
  TrafficLedger ledger;
  switch (cfg.schedule.variant) {
    case ScheduleVariant::Horizontal:
      ledger = horizontal_traffic(cfg.model, cfg.num_microbatches, *cfg.split);
      break;
    case ScheduleVariant::Vertical:
      ledger = vertical_traffic(cfg.model, cfg.num_microbatches, *cfg.split,
                                cfg.schedule.delay_ratio);
      break;
    case ScheduleVariant::SingleFB:
      ledger = single_fb_traffic(cfg.model, cfg.batch, cfg.schedule.extra_ckpt,
                                 *cfg.split);
      break;
  }
  if (effective_format(cfg, opt) == OutputFormat::Json)
    write_output(cfg, opt, ledger_to_json(ledger).dump(2) + "\n");
  else
    write_output(cfg, opt, ledger_to_csv(ledger));
  return 0;
}

int cmd_alloc_plan(const Options& opt) {
  u64 size = 0;
  try {
    size = std::stoull(opt.alloc_size);
  } catch (const std::exception&) {
    throw ValidationError("--size must be a positive integer (bytes)");
  }
  AllocPlan plan = plan_alloc(opt.alloc_count, size);
  std::cout << alloc_to_json(plan).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and planner for SSD-offloaded training schedules"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    if (needs_config)
      sub->add_option("config", opt.config_path, "run config file")->required();
    sub->add_option("--out", opt.out_path, "write output to this path");
    sub->add_option("--format", opt.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate one configuration");
  add_common(sim);
  sim->add_option("--schedule", opt.schedule_override, "horizontal|vertical|single-fb");
  sim->add_option("--microbatches", opt.microbatches, "micro-batch count M");
  sim->add_option("--alpha", opt.alpha, "optimizer-step delay ratio");
  sim->add_option("--split", opt.split_override, "x_ckpt,x_param,x_opt");
  sim->add_option("--emit-plan", opt.emit_plan_path, "dump the task plan as JSON");
  sim->add_option("--from-plan", opt.from_plan_path, "simulate a dumped plan JSON");

  CLI::App* sweep = app.add_subcommand("sweep", "sweep micro-batch counts");
  add_common(sweep);
  sweep->add_option("--m-range", opt.m_range, "a..b inclusive")->required();
  sweep->add_option("--schedule", opt.schedule_override, "horizontal|vertical|single-fb");
  sweep->add_option("--alpha", opt.alpha, "optimizer-step delay ratio");
  sweep->add_option("--split", opt.split_override, "x_ckpt,x_param,x_opt");

  CLI::App* compare = app.add_subcommand("compare", "compare schedules across M");
  add_common(compare);
  compare->add_option("--schedules", opt.schedules, "two or more schedule tokens")
      ->required()
      ->expected(-2);
  compare->add_option("--m-range", opt.m_range, "a..b inclusive");
  compare->add_option("--split", opt.split_override, "x_ckpt,x_param,x_opt");

  CLI::App* plan = app.add_subcommand("plan", "search for the best configuration");
  add_common(plan);
  plan->add_flag("--oracle", opt.oracle, "cross-check the LP against grid search");

  CLI::App* traffic = app.add_subcommand("traffic", "print the closed-form traffic ledger");
  add_common(traffic);
  traffic->add_option("--schedule", opt.schedule_override, "horizontal|vertical|single-fb");
  traffic->add_option("--microbatches", opt.microbatches, "micro-batch count M");
  traffic->add_option("--alpha", opt.alpha, "optimizer-step delay ratio");
  traffic->add_option("--split", opt.split_override, "x_ckpt,x_param,x_opt");

  CLI::App* alloc = app.add_subcommand("alloc-plan", "pack pinned buffers into requests");
  alloc->add_option("--count", opt.alloc_count, "number of buffers")->required();
  alloc->add_option("--size", opt.alloc_size, "bytes per buffer")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (compare->parsed()) return cmd_compare(opt);
    if (plan->parsed()) return cmd_plan(opt);
    if (traffic->parsed()) return cmd_traffic(opt);
    if (alloc->parsed()) return cmd_alloc_plan(opt);
  } catch (const offsim::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const offsim::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
