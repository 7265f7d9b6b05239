#include "offsim/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace offsim {

double round_sig(double v, int digits) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

Json ledger_to_json(const TrafficLedger& ledger) {
  Json j;
  for (int d = 0; d < TrafficLedger::kData; ++d) {
    Json row;
    for (int l = 0; l < TrafficLedger::kLinks; ++l)
      row[link_name(static_cast<LinkKind>(l))] =
          ledger.at(static_cast<LinkKind>(l), static_cast<DataKind>(d));
    j[data_name(static_cast<DataKind>(d))] = std::move(row);
  }
  return j;
}

std::string ledger_to_csv(const TrafficLedger& ledger) {
  std::ostringstream out;
  out << "data_kind";
  for (int l = 0; l < TrafficLedger::kLinks; ++l)
    out << "," << link_name(static_cast<LinkKind>(l));
  out << "\n";
  for (int d = 0; d < TrafficLedger::kData; ++d) {
    out << data_name(static_cast<DataKind>(d));
    for (int l = 0; l < TrafficLedger::kLinks; ++l)
      out << "," << ledger.at(static_cast<LinkKind>(l), static_cast<DataKind>(d));
    out << "\n";
  }
  return out.str();
}

Json report_to_json(const SimReport& report) {
  Json j;
  j["iteration_time"] = round_sig(report.iteration_time);
  j["throughput"] = round_sig(report.throughput);
  j["bound_class"] = report.bound_class;
  j["gpu_mem_needed"] = report.gpu_mem_needed;
  j["cpu_mem_needed"] = report.cpu_mem_needed;
  Json util;
  for (const auto& [name, value] : report.utilization)
    util[name] = round_sig(value);
  j["utilization"] = std::move(util);
  j["traffic"] = ledger_to_json(report.ledger);
  return j;
}

Json planner_to_json(const PlannerSolution& sol) {
  Json j;
  j["feasible"] = sol.feasible;
  j["microbatches"] = sol.num_microbatches;
  j["alpha"] = round_sig(sol.alpha);
  j["x_ckpt"] = round_sig(sol.split.x_ckpt);
  j["x_param"] = round_sig(sol.split.x_param);
  j["x_opt"] = round_sig(sol.split.x_opt);
  j["t_fwd_stage"] = round_sig(sol.t_fwd_stage);
  j["t_bwd_stage"] = round_sig(sol.t_bwd_stage);
  j["iteration_estimate"] = round_sig(sol.iteration_estimate);
  j["throughput_estimate"] = round_sig(sol.throughput_estimate);
  return j;
}

Json alloc_to_json(const AllocPlan& plan) {
  Json j;
  j["total_requested"] = plan.total_requested;
  j["total_granted"] = plan.total_granted;
  Json reqs = Json::array();
  for (const AllocRequest& r : plan.requests) {
    Json jr;
    jr["buffer_count"] = r.buffer_count;
    jr["requested_bytes"] = r.requested_bytes;
    jr["granted_bytes"] = r.granted_bytes;
    reqs.push_back(std::move(jr));
  }
  j["requests"] = std::move(reqs);
  return j;
}

namespace {

const char* variant_name(ScheduleVariant v) {
  switch (v) {
    case ScheduleVariant::SingleFB: return "single-fb";
    case ScheduleVariant::Horizontal: return "horizontal";
    case ScheduleVariant::Vertical: return "vertical";
  }
  return "?";
}

ScheduleVariant variant_from(const std::string& s) {
  if (s == "single-fb") return ScheduleVariant::SingleFB;
  if (s == "horizontal") return ScheduleVariant::Horizontal;
  if (s == "vertical") return ScheduleVariant::Vertical;
  throw ValidationError("unknown schedule variant in plan JSON: " + s);
}

const char* task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::FwdCompute: return "fwd";
    case TaskKind::RecomputeAndBwd: return "bwd";
    case TaskKind::CpuStep: return "cpu_step";
    case TaskKind::Xfer: return "xfer";
    case TaskKind::FixedOps: return "fixed_ops";
  }
  return "?";
}

TaskKind task_kind_from(const std::string& s) {
  if (s == "fwd") return TaskKind::FwdCompute;
  if (s == "bwd") return TaskKind::RecomputeAndBwd;
  if (s == "cpu_step") return TaskKind::CpuStep;
  if (s == "xfer") return TaskKind::Xfer;
  if (s == "fixed_ops") return TaskKind::FixedOps;
  throw ValidationError("unknown task kind in plan JSON: " + s);
}

LinkKind link_from(const std::string& s) {
  for (int l = 0; l < 4; ++l)
    if (s == link_name(static_cast<LinkKind>(l))) return static_cast<LinkKind>(l);
  throw ValidationError("unknown link in plan JSON: " + s);
}

DataKind data_from(const std::string& s) {
  for (int d = 0; d < TrafficLedger::kData; ++d)
    if (s == data_name(static_cast<DataKind>(d))) return static_cast<DataKind>(d);
  throw ValidationError("unknown data kind in plan JSON: " + s);
}

}  // namespace

Json plan_to_json(const SchedulePlan& plan) {
  Json j;
  j["variant"] = variant_name(plan.kind.variant);
  j["extra_ckpt"] = plan.kind.extra_ckpt;
  j["alpha"] = plan.kind.delay_ratio;
  j["microbatches"] = plan.num_microbatches;
  j["num_layers"] = plan.num_layers;
  j["x_ckpt"] = plan.split.x_ckpt;
  j["x_param"] = plan.split.x_param;
  j["x_opt"] = plan.split.x_opt;
  j["samples_per_iteration"] = plan.samples_per_iteration;
  j["compute_scale"] = plan.compute_scale;
  j["gpu_static_bytes"] = plan.gpu_static_bytes;
  j["cpu_peak_bytes"] = plan.cpu_peak_bytes;
  j["gpu_binding"] = plan.gpu_binding;
  Json tasks = Json::array();
  for (const Task& t : plan.tasks) {
    Json jt;
    jt["id"] = t.id;
    jt["kind"] = task_kind_name(t.kind);
    jt["layer"] = t.layer;
    jt["microbatch"] = t.microbatch;
    jt["stage"] = t.stage;
    if (t.kind == TaskKind::Xfer) {
      jt["data"] = data_name(t.data);
      jt["link"] = link_name(t.link);
      jt["bytes"] = t.bytes;
    }
    if (t.kind == TaskKind::CpuStep) jt["elements"] = t.elements;
    jt["deps"] = t.deps;
    if (t.cross_iter_dep >= 0) jt["cross_iter_dep"] = t.cross_iter_dep;
    tasks.push_back(std::move(jt));
  }
  j["tasks"] = std::move(tasks);
  return j;
}

SchedulePlan plan_from_json(const Json& j) {
  SchedulePlan plan;
  try {
    plan.kind.variant = variant_from(j.at("variant").get<std::string>());
    plan.kind.extra_ckpt = j.at("extra_ckpt").get<bool>();
    plan.kind.delay_ratio = j.at("alpha").get<double>();
    plan.num_microbatches = j.at("microbatches").get<int>();
    plan.num_layers = j.at("num_layers").get<int>();
    plan.split.x_ckpt = j.at("x_ckpt").get<double>();
    plan.split.x_param = j.at("x_param").get<double>();
    plan.split.x_opt = j.at("x_opt").get<double>();
    plan.samples_per_iteration = j.at("samples_per_iteration").get<u64>();
    plan.compute_scale = j.at("compute_scale").get<double>();
    plan.gpu_static_bytes = j.at("gpu_static_bytes").get<u64>();
    plan.cpu_peak_bytes = j.at("cpu_peak_bytes").get<u64>();
    plan.gpu_binding = j.at("gpu_binding").get<std::string>();
    for (const Json& jt : j.at("tasks")) {
      Task t;
      t.id = jt.at("id").get<int>();
      t.kind = task_kind_from(jt.at("kind").get<std::string>());
      t.layer = jt.at("layer").get<int>();
      t.microbatch = jt.at("microbatch").get<int>();
      t.stage = jt.at("stage").get<int>();
      if (t.kind == TaskKind::Xfer) {
        t.data = data_from(jt.at("data").get<std::string>());
        t.link = link_from(jt.at("link").get<std::string>());
        t.bytes = jt.at("bytes").get<u64>();
      }
      if (t.kind == TaskKind::CpuStep) t.elements = jt.at("elements").get<u64>();
      t.deps = jt.at("deps").get<std::vector<int>>();
      if (jt.contains("cross_iter_dep")) t.cross_iter_dep = jt.at("cross_iter_dep").get<int>();
      plan.tasks.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed plan JSON: ") + e.what());
  }
  return plan;
}

}  // namespace offsim
