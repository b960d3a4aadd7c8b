#include "fusim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "fusim/errors.hpp"
#include "fusim/metrics.hpp"
#include "fusim/select.hpp"

namespace fusim {

namespace {

std::uint64_t effective_bytes(const SensorSpec& sensor, const Scenario& scenario) {
  const auto it = scenario.frame_bytes_override.find(sensor.id);
  return it == scenario.frame_bytes_override.end() ? sensor.frame_bytes : it->second;
}

// Vector payload with the un-arrived suffix zeroed; the arrived prefix of a
// frame is usable as-is, the rest is treated as absent.
Eigen::VectorXd zero_fill_suffix(const Eigen::VectorXd& truth, double r) {
  const auto arrived =
      static_cast<Eigen::Index>(std::floor((1.0 - r) * static_cast<double>(truth.size())));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(truth.size());
  out.head(arrived) = truth.head(arrived);
  return out;
}

Eigen::MatrixXd arrived_points(const Eigen::MatrixXd& truth, double r) {
  const auto arrived =
      static_cast<Eigen::Index>(std::floor((1.0 - r) * static_cast<double>(truth.rows())));
  return truth.topRows(arrived);
}

// Stand-in for a fully absent cloud so the metrics stay defined.
Eigen::MatrixXd origin_cloud(Eigen::Index dim) {
  return Eigen::MatrixXd::Zero(1, dim);
}

void score_against_truth(const FeatureFrame& truth, const Eigen::VectorXd& imputed_vec,
                         const Eigen::MatrixXd& imputed_pts, SlowTickRecord* rec) {
  if (truth.kind == PayloadKind::Vector) {
    rec->mse = (imputed_vec - truth.vector).squaredNorm() /
               static_cast<double>(truth.vector.size());
  } else {
    const Eigen::MatrixXd& cloud = imputed_pts.rows() > 0
                                       ? imputed_pts
                                       : origin_cloud(truth.points.cols());
    rec->chamfer = chamfer_distance_normalized(cloud, truth.points);
    rec->mmd = mmd(cloud, truth.points);
  }
}

}  // namespace

std::string to_string(Policy p) {
  switch (p) {
    case Policy::Block: return "block";
    case Policy::Drop: return "drop";
    case Policy::NearestTick: return "nearest_tick";
    case Policy::Adaptive: return "adaptive";
  }
  return "adaptive";
}

Policy policy_from_string(const std::string& s) {
  if (s == "block") return Policy::Block;
  if (s == "drop") return Policy::Drop;
  if (s == "nearest_tick") return Policy::NearestTick;
  if (s == "adaptive") return Policy::Adaptive;
  throw ValidationError("unknown policy '" + s + "'");
}

ArrivalEvent arrival_time(const SensorSpec& sensor, std::uint64_t tick,
                          const Scenario& scenario) {
  if (!(scenario.bandwidth_mbps > 0.0))
    throw ValidationError("scenario: bandwidth must be positive");
  ArrivalEvent ev;
  ev.sensor_id = sensor.id;
  ev.tick = tick;
  ev.bytes = effective_bytes(sensor, scenario);
  ev.start_ms =
      static_cast<double>(tick) * sensor.sample_interval_ms + sensor.clock_offset_ms;
  const double duration_ms =
      8.0 * static_cast<double>(ev.bytes) / (scenario.bandwidth_mbps * 1e6) * 1e3;
  ev.complete_ms = ev.start_ms + duration_ms;
  return ev;
}

MissingRate missing_rate(const ArrivalEvent& arrival, double deadline_ms) {
  const double duration = arrival.duration_ms();
  if (duration <= 0.0) return MissingRate{0.0};
  const double r = (arrival.complete_ms - deadline_ms) / duration;
  return MissingRate{std::clamp(r, 0.0, 1.0)};
}

ScenarioMetrics run(const Dataset& dataset, const Scenario& scenario,
                    const AffinityMatrix* affinity, const ProjectionStore* projections) {
  if (scenario.policy == Policy::Adaptive) {
    if (!affinity)
      throw ValidationError("run: adaptive policy needs an affinity matrix; "
                            "run `affinity` first");
    if (!projections)
      throw ValidationError("run: adaptive policy needs fitted projections; "
                            "run `fit` first");
  }
  if (scenario.deadline.kind == DeadlineKind::FixedBudget &&
      !(scenario.deadline.budget_ms > 0.0))
    throw ValidationError("scenario: fixed budget must be positive");

  const auto slows = dataset.slow_sensors();
  const auto fasts = dataset.fast_sensors();

  ScenarioMetrics metrics;
  metrics.policy = scenario.policy;
  metrics.seed = scenario.seed;

  // Per-slow-sensor state carried across ticks. A frame leaves `pending` for
  // `history` once its transfer completion falls before the current decision
  // time, which may be several ticks after it was sampled.
  std::map<std::string, std::vector<FeatureFrame>> history;
  std::map<std::string, std::deque<std::pair<double, std::uint64_t>>> pending;
  std::map<std::string, std::deque<double>> r_window;

  double quality_acc = 0.0;
  std::size_t quality_count = 0;

  for (std::uint64_t tick = 0; tick < dataset.tick_count; ++tick) {
    double tick_start = std::numeric_limits<double>::infinity();
    double max_fast = -std::numeric_limits<double>::infinity();
    double max_all = -std::numeric_limits<double>::infinity();
    std::map<std::string, ArrivalEvent> arrivals;
    for (const auto& sensor : dataset.sensors) {
      const auto ev = arrival_time(sensor, tick, scenario);
      tick_start = std::min(tick_start, ev.start_ms);
      max_all = std::max(max_all, ev.complete_ms);
      if (!sensor.is_slow()) max_fast = std::max(max_fast, ev.complete_ms);
      arrivals[sensor.id] = ev;
    }

    const double deadline = scenario.deadline.kind == DeadlineKind::OnFastestArrival
                                ? max_fast
                                : tick_start + scenario.deadline.budget_ms;
    // Fast data is required; slow data is worth waiting for only up to the
    // deadline.
    const double decision = std::max(max_fast, std::min(deadline, max_all));

    TickMetrics tm;
    tm.tick = tick;

    for (const auto* slow : slows) {
      auto& queue = pending[slow->id];
      while (!queue.empty() && queue.front().first <= decision) {
        history[slow->id].push_back(dataset.frame_at(slow->id, queue.front().second));
        queue.pop_front();
      }
    }

    bool any_imputation = false;
    for (const auto* slow : slows) {
      const auto& ev = arrivals.at(slow->id);
      const double r = missing_rate(ev, decision).r;

      auto& window = r_window[slow->id];
      window.push_back(r);
      std::size_t window_len = 1;
      if (scenario.window_s) {
        window_len = static_cast<std::size_t>(std::max(
            1.0, std::floor(*scenario.window_s * 1000.0 / slow->sample_interval_ms)));
      }
      while (window.size() > window_len) window.pop_front();
      double r_used = 0.0;
      for (const double v : window) r_used += v;
      r_used /= static_cast<double>(window.size());

      SlowTickRecord rec;
      rec.slow_id = slow->id;
      rec.r = r;
      rec.r_used = r_used;

      const FeatureFrame& truth = dataset.frame_at(slow->id, tick);

      switch (scenario.policy) {
        case Policy::Block: {
          rec.imputer = ImputerKind::Block;
          score_against_truth(truth, truth.vector, truth.points, &rec);
          break;
        }
        case Policy::Drop: {
          rec.imputer = ImputerKind::Drop;
          if (truth.kind == PayloadKind::Vector) {
            score_against_truth(truth, zero_fill_suffix(truth.vector, r), {}, &rec);
          } else {
            score_against_truth(truth, {}, arrived_points(truth.points, r), &rec);
          }
          break;
        }
        case Policy::NearestTick: {
          rec.imputer = ImputerKind::NearestTick;
          if (r == 0.0) {
            score_against_truth(truth, truth.vector, truth.points, &rec);
          } else {
            any_imputation = true;
            const auto& past = history[slow->id];
            if (past.empty()) {
              // nothing to echo yet; slow data is simply absent
              if (truth.kind == PayloadKind::Vector) {
                score_against_truth(truth, Eigen::VectorXd::Zero(truth.vector.size()),
                                    {}, &rec);
              } else {
                score_against_truth(truth, {}, Eigen::MatrixXd{}, &rec);
              }
            } else {
              score_against_truth(truth, past.back().vector, past.back().points, &rec);
            }
          }
          break;
        }
        case Policy::Adaptive: {
          rec.imputer = ImputerKind::AffinityFusion;
          if (r == 0.0) {
            score_against_truth(truth, truth.vector, truth.points, &rec);
            break;
          }
          any_imputation = true;
          const FusionPlan plan = select_subgraph(*affinity, slow->id, MissingRate{r_used});
          rec.k = plan.k;
          rec.objective = plan.objective;
          for (const auto& [id, w] : plan.selected) rec.selected.push_back(id);

          if (plan.selected.empty()) {
            // no in-view candidate to fuse from; the slow payload stays absent
            if (truth.kind == PayloadKind::Vector) {
              score_against_truth(truth, Eigen::VectorXd::Zero(truth.vector.size()), {},
                                  &rec);
            } else {
              score_against_truth(truth, {}, Eigen::MatrixXd{}, &rec);
            }
            break;
          }

          std::vector<FeatureFrame> fast_frames;
          fast_frames.reserve(fasts.size());
          for (const auto* fast : fasts)
            fast_frames.push_back(dataset.frame_at(fast->id, tick));

          // The partial slow frame is raw bits, not decodable features, so the
          // fusion regenerates the full payload from the fast sensors.
          const auto result = impute(ImputerKind::AffinityFusion, plan, fast_frames,
                                     std::nullopt, history[slow->id], *projections);
          if (result.frame) {
            score_against_truth(truth, result.frame->vector, result.frame->points, &rec);
          }
          break;
        }
      }

      if (rec.mse) {
        quality_acc += *rec.mse;
        ++quality_count;
      } else if (rec.chamfer) {
        quality_acc += *rec.chamfer;
        ++quality_count;
      }
      tm.slow_records.push_back(std::move(rec));
    }

    switch (scenario.policy) {
      case Policy::Block:
        tm.latency_ms = max_all - tick_start;
        break;
      case Policy::Drop:
        tm.latency_ms = decision - tick_start;
        break;
      case Policy::NearestTick:
      case Policy::Adaptive:
        tm.latency_ms =
            decision - tick_start + (any_imputation ? scenario.impute_cost_ms : 0.0);
        break;
    }

    // This tick's slow frames queue up for whichever later decision they
    // manage to beat. Block waits for everything, so they complete here.
    for (const auto* slow : slows) {
      const auto& ev = arrivals.at(slow->id);
      if (scenario.policy == Policy::Block || ev.complete_ms <= decision) {
        history[slow->id].push_back(dataset.frame_at(slow->id, tick));
      } else {
        pending[slow->id].emplace_back(ev.complete_ms, tick);
      }
    }

    metrics.ticks.push_back(std::move(tm));
  }

  std::vector<double> latencies;
  latencies.reserve(metrics.ticks.size());
  for (const auto& tm : metrics.ticks) {
    latencies.push_back(tm.latency_ms);
    metrics.total_latency_ms += tm.latency_ms;
  }
  if (!latencies.empty()) {
    metrics.mean_latency_ms = metrics.total_latency_ms / static_cast<double>(latencies.size());
    std::sort(latencies.begin(), latencies.end());
    const auto idx = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(latencies.size()))) - 1;
    metrics.p95_latency_ms = latencies[std::min(idx, latencies.size() - 1)];
  }
  metrics.mean_quality = quality_count ? quality_acc / static_cast<double>(quality_count) : 0.0;
  return metrics;
}

}  // namespace fusim
