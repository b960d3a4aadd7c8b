#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fusim/ahp.hpp"
#include "fusim/dataset.hpp"
#include "fusim/errors.hpp"
#include "fusim/impute.hpp"
#include "fusim/select.hpp"
#include "fusim/serialize.hpp"
#include "fusim/sim.hpp"
#include "fusim/sne.hpp"
#include "fusim/synthetic.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

void vlog(const GlobalOptions& g, const std::string& msg) {
  if (g.verbose) std::cerr << "[fusim] " << msg << "\n";
}

fusim::EmbeddingConfig embedding_from_config(const json& cfg) {
  fusim::EmbeddingConfig ec;
  if (!cfg.contains("embedding")) return ec;
  const auto& e = cfg.at("embedding");
  ec.target_dim = e.value("target_dim", ec.target_dim);
  ec.iterations = e.value("iterations", ec.iterations);
  ec.perplexity = e.value("perplexity", ec.perplexity);
  ec.adam.learning_rate = e.value("learning_rate", ec.adam.learning_rate);
  ec.adam.beta1 = e.value("beta1", ec.adam.beta1);
  ec.adam.beta2 = e.value("beta2", ec.adam.beta2);
  ec.adam.epsilon = e.value("epsilon", ec.adam.epsilon);
  ec.seed = e.value("seed", ec.seed);
  return ec;
}

fusim::AhpConfig ahp_from_config(const json& cfg) {
  fusim::AhpConfig ac;
  if (!cfg.contains("ahp")) return ac;
  const auto& a = cfg.at("ahp");
  ac.criteria_importance = a.value("criteria_importance", ac.criteria_importance);
  ac.cr_threshold = a.value("cr_threshold", ac.cr_threshold);
  ac.cosine_split_threshold = a.value("cosine_split_threshold", ac.cosine_split_threshold);
  return ac;
}

fusim::PairwiseComparisonMatrix matrix_from_json(const json& rows,
                                                 std::vector<std::string> labels) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = rows.at(static_cast<size_t>(i)).at(static_cast<size_t>(j)).get<double>();
  if (labels.empty())
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back("alt" + std::to_string(i));
  return fusim::PairwiseComparisonMatrix(m, labels);
}

// Bundled demo hierarchy: cosine dominates FOV 7:1 at the criteria layer, with
// three candidate sensors compared under each criterion.
json builtin_bypass_config() {
  return json{
      {"criteria", {{1.0, 7.0}, {1.0 / 7.0, 1.0}}},
      {"criteria_labels", {"cosine", "fov"}},
      {"alternative_labels", {"sensor1", "sensor2", "sensor3"}},
      {"alternatives",
       {{{1.0, 2.0, 5.0}, {0.5, 1.0, 2.0}, {0.2, 0.5, 1.0}},
        {{1.0, 1.0 / 3.0, 1.0 / 8.0}, {3.0, 1.0, 1.0 / 3.0}, {8.0, 3.0, 1.0}}}}};
}

int cmd_gen(const GlobalOptions& g, const std::string& out_dir, int ticks, int dim,
            int fast_count, double noise_sigma) {
  fusim::SyntheticParams params;
  params.ticks = static_cast<std::uint64_t>(ticks);
  params.dim = dim;
  params.noise_sigma = noise_sigma;
  params.temporal_rho = 0.98;
  if (fast_count == 1) {
    params.coupling = {1.0};
  } else {
    // one dominant forward parent, weaker side sensors, and a rear camera
    // outside the slow sensor's view (couples to nothing it can see)
    params.coupling.assign(static_cast<size_t>(fast_count), 0.0);
    params.coupling[0] = 0.9;
    for (int k = 1; k + 1 < fast_count; ++k)
      params.coupling[static_cast<size_t>(k)] = 0.1 / static_cast<double>(fast_count - 2);
    params.slow_fov = fusim::AngularInterval{0.0, 240.0};
    params.fast_fovs.clear();
    for (int k = 0; k + 1 < fast_count; ++k)
      params.fast_fovs.push_back({30.0 * k, 30.0 * k + 120.0});
    params.fast_fovs.push_back({250.0, 350.0});
  }
  const auto ds = fusim::make_linear_dataset(params, g.seed.value_or(0));
  fusim::save_dataset(ds, out_dir);
  vlog(g, "wrote dataset to " + out_dir);
  return kExitOk;
}

int cmd_fit(const GlobalOptions& g, const std::string& dataset_dir,
            const std::string& out_dir) {
  const auto ds = fusim::load_dataset(dataset_dir);
  const auto store = fusim::fit_projections(ds);
  store.save(out_dir);
  vlog(g, "fitted " + std::to_string(store.entries().size()) + " projections");
  return kExitOk;
}

int cmd_affinity(const GlobalOptions& g, const std::string& dataset_dir,
                 const std::string& config_path, const std::string& out_path,
                 bool bypass, const std::string& trace_dir) {
  json cfg = json::object();
  if (!config_path.empty()) cfg = fusim::load_json_file(config_path);

  if (bypass) {
    const json bp = cfg.contains("ahp_bypass") ? cfg.at("ahp_bypass") : builtin_bypass_config();
    auto criteria_labels = bp.value("criteria_labels", std::vector<std::string>{});
    auto alt_labels = bp.value("alternative_labels", std::vector<std::string>{});
    const auto criteria = matrix_from_json(bp.at("criteria"), criteria_labels);
    std::vector<fusim::PairwiseComparisonMatrix> alternatives;
    for (const auto& rows : bp.at("alternatives"))
      alternatives.push_back(matrix_from_json(rows, alt_labels));

    std::map<std::string, fusim::ConsistencyReport> checks;
    const Eigen::VectorXd w =
        fusim::compose_hierarchy(criteria, alternatives, 0.1, &checks);
    const Eigen::VectorXd w1 = fusim::priority_vector(criteria);

    json report;
    report["bypass"] = true;
    report["labels"] = alternatives.front().labels();
    report["w1"] = std::vector<double>(w1.data(), w1.data() + w1.size());
    json w2 = json::array();
    for (const auto& alt : alternatives) {
      const Eigen::VectorXd col = fusim::priority_vector(alt);
      w2.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
    report["w2"] = std::move(w2);
    report["w"] = std::vector<double>(w.data(), w.data() + w.size());
    json cj = json::object();
    for (const auto& [name, rep] : checks)
      cj[name] = {{"lambda_max", rep.lambda_max}, {"ci", rep.ci}, {"ri", rep.ri},
                  {"cr", rep.cr},                 {"pass", rep.pass}};
    report["consistency"] = std::move(cj);
    report["version"] = kVersion;
    fusim::write_text_file(out_path, report.dump(2) + "\n");
    return kExitOk;
  }

  const auto ds = fusim::load_dataset(dataset_dir);
  auto ec = embedding_from_config(cfg);
  if (g.seed) ec.seed = *g.seed;
  const auto ac = ahp_from_config(cfg);
  std::map<std::string, std::vector<double>> traces;
  const auto affinity = fusim::build_affinity_matrix(
      ds, ec, ac, trace_dir.empty() ? nullptr : &traces);
  for (const auto& [pair, trace] : traces) {
    auto name = pair;
    std::replace(name.begin(), name.end(), '/', '_');
    std::ostringstream csv;
    csv << "iteration,kl\n";
    for (size_t i = 0; i < trace.size(); ++i) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", trace[i]);
      csv << i << "," << buf << "\n";
    }
    fusim::write_text_file(std::filesystem::path(trace_dir) / (name + "_trace.csv"),
                           csv.str());
  }

  json report = fusim::affinity_to_json(affinity);
  report["config"] = {{"criteria_importance", ac.criteria_importance},
                      {"cr_threshold", ac.cr_threshold},
                      {"embedding",
                       {{"target_dim", ec.target_dim},
                        {"iterations", ec.iterations},
                        {"perplexity", ec.perplexity},
                        {"learning_rate", ec.adam.learning_rate},
                        {"seed", ec.seed}}}};
  report["version"] = kVersion;
  fusim::write_text_file(out_path, report.dump(2) + "\n");
  vlog(g, "wrote affinity report to " + out_path);
  return kExitOk;
}

int cmd_select(const GlobalOptions& g, const std::string& affinity_path,
               const std::string& slow_id, double missing_rate,
               const std::string& out_path) {
  if (missing_rate < 0.0 || missing_rate > 1.0)
    throw fusim::ValidationError("select: missing rate must be in [0, 1]");
  const auto affinity = fusim::affinity_from_json(fusim::load_json_file(affinity_path));
  const auto plan =
      fusim::select_subgraph(affinity, slow_id, fusim::MissingRate{missing_rate});
  json out = fusim::plan_to_json(plan);
  out["version"] = kVersion;
  fusim::write_text_file(out_path, out.dump(2) + "\n");
  vlog(g, "selected " + std::to_string(plan.k) + " sensors for " + slow_id);
  return kExitOk;
}

int cmd_simulate(const GlobalOptions& g, const std::string& dataset_dir,
                 const std::string& scenario_path, const std::string& out_path,
                 const std::vector<std::string>& policies,
                 const std::string& affinity_path, const std::string& projections_dir,
                 const std::string& csv_path) {
  const auto ds = fusim::load_dataset(dataset_dir);
  auto scenario = fusim::scenario_from_json(fusim::load_json_file(scenario_path));
  if (g.seed) scenario.seed = *g.seed;

  std::vector<fusim::Policy> sweep;
  if (policies.empty()) {
    sweep.push_back(scenario.policy);
  } else {
    for (const auto& p : policies) sweep.push_back(fusim::policy_from_string(p));
  }

  std::optional<fusim::AffinityMatrix> affinity;
  if (!affinity_path.empty())
    affinity = fusim::affinity_from_json(fusim::load_json_file(affinity_path));
  std::optional<fusim::ProjectionStore> projections;
  if (!projections_dir.empty())
    projections = fusim::ProjectionStore::load(projections_dir);

  const bool needs_adaptive =
      std::any_of(sweep.begin(), sweep.end(),
                  [](fusim::Policy p) { return p == fusim::Policy::Adaptive; });
  if (needs_adaptive && !affinity)
    throw fusim::ValidationError(
        "simulate: the adaptive policy needs --affinity <report.json>; run `fusim "
        "affinity` first");
  if (needs_adaptive && !projections)
    throw fusim::ValidationError(
        "simulate: the adaptive policy needs --projections <dir>; run `fusim fit` first");

  json out;
  out["scenario"] = fusim::scenario_to_json(scenario);
  out["version"] = kVersion;
  out["policies"] = json::object();
  for (const auto policy : sweep) {
    auto sc = scenario;
    sc.policy = policy;
    const auto metrics = fusim::run(ds, sc, affinity ? &*affinity : nullptr,
                                    projections ? &*projections : nullptr);
    out["policies"][fusim::to_string(policy)] = fusim::metrics_to_json(metrics);
    if (!csv_path.empty()) {
      const auto path = sweep.size() == 1
                            ? std::filesystem::path(csv_path)
                            : std::filesystem::path(csv_path)
                                  .replace_extension(fusim::to_string(policy) + ".csv");
      fusim::write_text_file(path, fusim::metrics_to_csv(metrics));
    }
  }
  fusim::write_text_file(out_path, out.dump(2) + "\n");
  vlog(g, "wrote metrics to " + out_path);
  return kExitOk;
}

int cmd_report(const GlobalOptions& g, const std::string& dataset_dir,
               const std::string& scenario_path, const std::string& config_path,
               const std::string& out_path) {
  const auto ds = fusim::load_dataset(dataset_dir);
  json cfg = json::object();
  if (!config_path.empty()) cfg = fusim::load_json_file(config_path);
  auto ec = embedding_from_config(cfg);
  if (g.seed) ec.seed = *g.seed;
  const auto ac = ahp_from_config(cfg);

  auto scenario = fusim::scenario_from_json(fusim::load_json_file(scenario_path));
  if (g.seed) scenario.seed = *g.seed;

  vlog(g, "building affinity matrix");
  const auto affinity = fusim::build_affinity_matrix(ds, ec, ac);
  vlog(g, "fitting projections");
  const auto projections = fusim::fit_projections(ds);

  json out;
  out["version"] = kVersion;
  out["seed"] = scenario.seed;
  out["config"] = {{"scenario", fusim::scenario_to_json(scenario)},
                   {"criteria_importance", ac.criteria_importance},
                   {"embedding_iterations", ec.iterations}};
  out["affinity"] = fusim::affinity_to_json(affinity);
  out["policies"] = json::object();
  for (const auto policy : {fusim::Policy::Block, fusim::Policy::Drop,
                            fusim::Policy::NearestTick, fusim::Policy::Adaptive}) {
    auto sc = scenario;
    sc.policy = policy;
    const auto metrics = fusim::run(ds, sc, &affinity, &projections);
    out["policies"][fusim::to_string(policy)] = fusim::metrics_to_json(metrics);
  }
  fusim::write_text_file(out_path, out.dump(2) + "\n");
  vlog(g, "wrote run report to " + out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affinity-guided scheduling and imputation simulator for "
               "asynchronous multi-sensor streams"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();  // global --seed/--verbose may follow the subcommand

  GlobalOptions g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Override every configured seed");
  app.add_flag("--verbose", g.verbose, "Log progress to stderr");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic linear-mixture dataset");
  std::string gen_out;
  int gen_ticks = 240, gen_dim = 16, gen_fast = 2;
  double gen_noise = 0.01;
  gen->add_option("--out", gen_out, "Output dataset directory")->required();
  gen->add_option("--ticks", gen_ticks, "Number of ticks");
  gen->add_option("--dim", gen_dim, "Feature dimension");
  gen->add_option("--fast", gen_fast, "Number of fast sensors");
  gen->add_option("--noise", gen_noise, "Generative noise sigma");

  auto* fit = app.add_subcommand("fit", "Fit per-pair least-squares projections");
  std::string fit_dataset, fit_out;
  fit->add_option("dataset", fit_dataset, "Dataset directory")->required();
  fit->add_option("--out", fit_out, "Projection store directory")->required();

  auto* aff = app.add_subcommand("affinity", "Build the normalized affinity matrix");
  std::string aff_dataset, aff_config, aff_out, aff_trace;
  bool aff_bypass = false;
  aff->add_option("dataset", aff_dataset, "Dataset directory");
  aff->add_option("--config", aff_config, "JSON config (embedding + ahp keys)");
  aff->add_option("--out", aff_out, "Output report path")->required();
  aff->add_option("--trace-out", aff_trace,
                  "Directory for per-pair embedding cost traces (CSV)");
  aff->add_flag("--bypass-ahp-example", aff_bypass,
                "Compose prepared comparison matrices instead of dataset evidence");

  auto* sel = app.add_subcommand("select", "Select the fusion sub-graph for one slow sensor");
  std::string sel_affinity, sel_slow, sel_out;
  double sel_rate = 0.5;
  sel->add_option("--affinity", sel_affinity, "Affinity report JSON")->required();
  sel->add_option("--slow", sel_slow, "Slow sensor id")->required();
  sel->add_option("--missing-rate", sel_rate, "Missing rate in [0, 1]")->required();
  sel->add_option("--out", sel_out, "Output plan path")->required();

  auto* sim = app.add_subcommand("simulate", "Run the event-driven scenario simulation");
  std::string sim_dataset, sim_scenario, sim_out, sim_affinity, sim_projections, sim_csv;
  std::vector<std::string> sim_policies;
  sim->add_option("dataset", sim_dataset, "Dataset directory")->required();
  sim->add_option("--scenario", sim_scenario, "Scenario config JSON")->required();
  sim->add_option("--out", sim_out, "Output metrics JSON")->required();
  sim->add_option("--policy", sim_policies,
                  "Policy override; repeat to sweep (block/drop/nearest_tick/adaptive)");
  sim->add_option("--affinity", sim_affinity, "Affinity report (needed by adaptive)");
  sim->add_option("--projections", sim_projections, "Projection store dir (needed by adaptive)");
  sim->add_option("--csv", sim_csv, "Also write per-tick CSV here");

  auto* rep = app.add_subcommand("report", "Full pipeline: affinity, fit, 4-policy sweep");
  std::string rep_dataset, rep_scenario, rep_config, rep_out;
  rep->add_option("dataset", rep_dataset, "Dataset directory")->required();
  rep->add_option("--scenario", rep_scenario, "Scenario config JSON")->required();
  rep->add_option("--config", rep_config, "JSON config (embedding + ahp keys)");
  rep->add_option("--out", rep_out, "Output report path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  if (*seed_opt) g.seed = seed_value;

  try {
    if (gen->parsed()) return cmd_gen(g, gen_out, gen_ticks, gen_dim, gen_fast, gen_noise);
    if (fit->parsed()) return cmd_fit(g, fit_dataset, fit_out);
    if (aff->parsed()) {
      if (!aff_bypass && aff_dataset.empty()) {
        std::cerr << "fusim affinity: dataset directory required (or use "
                     "--bypass-ahp-example)\n";
        return kExitUsage;
      }
      return cmd_affinity(g, aff_dataset, aff_config, aff_out, aff_bypass, aff_trace);
    }
    if (sel->parsed()) return cmd_select(g, sel_affinity, sel_slow, sel_rate, sel_out);
    if (sim->parsed())
      return cmd_simulate(g, sim_dataset, sim_scenario, sim_out, sim_policies,
                          sim_affinity, sim_projections, sim_csv);
    if (rep->parsed()) return cmd_report(g, rep_dataset, rep_scenario, rep_config, rep_out);
  } catch (const fusim::ValidationError& e) {
    std::cerr << "fusim: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fusim::NumericalError& e) {
    std::cerr << "fusim: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "fusim: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
