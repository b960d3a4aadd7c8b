#include "fusim/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fusim/errors.hpp"

namespace fusim {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json consistency_to_json(const ConsistencyReport& rep) {
  return {{"lambda_max", rep.lambda_max}, {"ci", rep.ci},   {"ri", rep.ri},
          {"cr", rep.cr},                 {"pass", rep.pass}};
}

ConsistencyReport consistency_from_json(const json& j) {
  ConsistencyReport rep;
  rep.lambda_max = j.at("lambda_max").get<double>();
  rep.ci = j.at("ci").get<double>();
  rep.ri = j.at("ri").get<double>();
  rep.cr = j.at("cr").get<double>();
  rep.pass = j.at("pass").get<bool>();
  return rep;
}

}  // namespace

json affinity_to_json(const AffinityMatrix& affinity) {
  json out;
  out["slow_sensors"] = json::object();
  for (const auto& [slow_id, entry] : affinity.slow) {
    json e;
    e["criterion"] = to_string(entry.criterion);
    e["weights"] = entry.weights;
    e["in_view"] = entry.in_view;
    e["cosine_split"] = entry.cosine_split;
    e["evidence"] = json::object();
    for (const auto& [fast_id, ev] : entry.evidence)
      e["evidence"][fast_id] = {{"cosine", ev.cosine}, {"fov_iou", ev.fov_iou}};
    e["consistency"] = json::object();
    for (const auto& [name, rep] : entry.checks)
      e["consistency"][name] = consistency_to_json(rep);
    out["slow_sensors"][slow_id] = std::move(e);
  }
  return out;
}

AffinityMatrix affinity_from_json(const json& j) {
  AffinityMatrix affinity;
  try {
    for (const auto& [slow_id, e] : j.at("slow_sensors").items()) {
      SlowSensorAffinity entry;
      entry.criterion = criterion_from_string(e.at("criterion").get<std::string>());
      entry.weights = e.at("weights").get<std::map<std::string, double>>();
      entry.in_view = e.at("in_view").get<std::vector<std::string>>();
      entry.cosine_split = e.value("cosine_split", 0.0);
      if (e.contains("evidence")) {
        for (const auto& [fast_id, ev] : e.at("evidence").items()) {
          entry.evidence[fast_id] = PairEvidence{ev.at("cosine").get<double>(),
                                                 ev.at("fov_iou").get<double>()};
        }
      }
      if (e.contains("consistency")) {
        for (const auto& [name, rep] : e.at("consistency").items())
          entry.checks[name] = consistency_from_json(rep);
      }
      affinity.slow[slow_id] = std::move(entry);
    }
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("affinity report: ") + ex.what());
  }
  return affinity;
}

json plan_to_json(const FusionPlan& plan) {
  json selected = json::array();
  for (const auto& [id, w] : plan.selected)
    selected.push_back({{"id", id}, {"weight", w}});
  return {{"slow_id", plan.slow_id},
          {"criterion", to_string(plan.criterion)},
          {"selected", std::move(selected)},
          {"k", plan.k},
          {"objective", plan.objective}};
}

FusionPlan plan_from_json(const json& j) {
  FusionPlan plan;
  try {
    plan.slow_id = j.at("slow_id").get<std::string>();
    plan.criterion = criterion_from_string(j.at("criterion").get<std::string>());
    plan.k = j.at("k").get<int>();
    plan.objective = j.at("objective").get<double>();
    for (const auto& e : j.at("selected"))
      plan.selected.emplace_back(e.at("id").get<std::string>(),
                                 e.at("weight").get<double>());
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("fusion plan: ") + ex.what());
  }
  return plan;
}

json metrics_to_json(const ScenarioMetrics& metrics) {
  json out;
  out["policy"] = to_string(metrics.policy);
  out["seed"] = metrics.seed;
  out["mean_latency_ms"] = metrics.mean_latency_ms;
  out["p95_latency_ms"] = metrics.p95_latency_ms;
  out["total_latency_ms"] = metrics.total_latency_ms;
  out["mean_quality"] = metrics.mean_quality;
  out["ticks"] = json::array();
  for (const auto& tm : metrics.ticks) {
    json t;
    t["tick"] = tm.tick;
    t["latency_ms"] = tm.latency_ms;
    t["slow"] = json::array();
    for (const auto& rec : tm.slow_records) {
      json r;
      r["id"] = rec.slow_id;
      r["r"] = rec.r;
      r["r_used"] = rec.r_used;
      r["imputer"] = to_string(rec.imputer);
      r["k"] = rec.k;
      r["selected"] = rec.selected;
      r["objective"] = rec.objective;
      if (rec.mse) r["mse"] = *rec.mse;
      if (rec.chamfer) r["chamfer"] = *rec.chamfer;
      if (rec.mmd) r["mmd"] = *rec.mmd;
      t["slow"].push_back(std::move(r));
    }
    out["ticks"].push_back(std::move(t));
  }
  return out;
}

std::string metrics_to_csv(const ScenarioMetrics& metrics) {
  std::ostringstream out;
  out << "tick,slow_id,latency_ms,missing_rate,missing_rate_used,imputer,k,selected,"
         "objective,mse,chamfer,mmd\n";
  for (const auto& tm : metrics.ticks) {
    for (const auto& rec : tm.slow_records) {
      out << tm.tick << "," << rec.slow_id << "," << fmt_double(tm.latency_ms) << ","
          << fmt_double(rec.r) << "," << fmt_double(rec.r_used) << ","
          << to_string(rec.imputer) << "," << rec.k << ",";
      for (size_t i = 0; i < rec.selected.size(); ++i) {
        if (i) out << "|";
        out << rec.selected[i];
      }
      out << "," << fmt_double(rec.objective) << ",";
      if (rec.mse) out << fmt_double(*rec.mse);
      out << ",";
      if (rec.chamfer) out << fmt_double(*rec.chamfer);
      out << ",";
      if (rec.mmd) out << fmt_double(*rec.mmd);
      out << "\n";
    }
  }
  return out.str();
}

json scenario_to_json(const Scenario& scenario) {
  json out;
  out["bandwidth_mbps"] = scenario.bandwidth_mbps;
  out["policy"] = to_string(scenario.policy);
  if (scenario.deadline.kind == DeadlineKind::OnFastestArrival) {
    out["deadline"] = {{"kind", "on_fastest_arrival"}};
  } else {
    out["deadline"] = {{"kind", "fixed_budget"}, {"budget_ms", scenario.deadline.budget_ms}};
  }
  if (!scenario.frame_bytes_override.empty())
    out["frame_bytes_override"] = scenario.frame_bytes_override;
  if (scenario.window_s) out["window_s"] = *scenario.window_s;
  out["impute_cost_ms"] = scenario.impute_cost_ms;
  out["seed"] = scenario.seed;
  return out;
}

Scenario scenario_from_json(const json& j) {
  Scenario sc;
  try {
    sc.bandwidth_mbps = j.value("bandwidth_mbps", 100.0);
    if (j.contains("policy")) sc.policy = policy_from_string(j.at("policy").get<std::string>());
    if (j.contains("deadline")) {
      const auto& d = j.at("deadline");
      const auto kind = d.at("kind").get<std::string>();
      if (kind == "on_fastest_arrival") {
        sc.deadline.kind = DeadlineKind::OnFastestArrival;
      } else if (kind == "fixed_budget") {
        sc.deadline.kind = DeadlineKind::FixedBudget;
        sc.deadline.budget_ms = d.at("budget_ms").get<double>();
      } else {
        throw ValidationError("scenario: unknown deadline kind '" + kind + "'");
      }
    }
    if (j.contains("frame_bytes_override"))
      sc.frame_bytes_override =
          j.at("frame_bytes_override").get<std::map<std::string, std::uint64_t>>();
    if (j.contains("window_s")) sc.window_s = j.at("window_s").get<double>();
    sc.impute_cost_ms = j.value("impute_cost_ms", 0.0);
    sc.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("scenario config: ") + ex.what());
  }
  return sc;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ValidationError(path.string() + ": " + ex.what());
  }
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

}  // namespace fusim
