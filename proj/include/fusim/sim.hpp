#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fusim/ahp.hpp"
#include "fusim/impute.hpp"
#include "fusim/types.hpp"

namespace fusim {

enum class Policy { Block, Drop, NearestTick, Adaptive };

std::string to_string(Policy p);
Policy policy_from_string(const std::string& s);

enum class DeadlineKind { OnFastestArrival, FixedBudget };

struct DeadlinePolicy {
  DeadlineKind kind = DeadlineKind::OnFastestArrival;
  double budget_ms = 0.0;  // used by FixedBudget
};

struct Scenario {
  double bandwidth_mbps = 100.0;
  std::map<std::string, std::uint64_t> frame_bytes_override;
  DeadlinePolicy deadline;
  Policy policy = Policy::Adaptive;
  std::optional<double> window_s;  // sliding-window mean for the missing rate
  double impute_cost_ms = 0.0;     // charged when imputation actually runs
  std::uint64_t seed = 0;
};

struct ArrivalEvent {
  std::string sensor_id;
  std::uint64_t tick = 0;
  double start_ms = 0.0;
  double complete_ms = 0.0;
  std::uint64_t bytes = 0;

  double duration_ms() const { return complete_ms - start_ms; }
};

// Bulk-transfer completion: the frame starts at tick * interval + clock offset
// and takes 8 * bytes / (bandwidth_mbps * 1e6) seconds on the wire.
ArrivalEvent arrival_time(const SensorSpec& sensor, std::uint64_t tick,
                          const Scenario& scenario);

// Fraction of the frame's bits still in flight at the deadline, clamped to [0, 1].
MissingRate missing_rate(const ArrivalEvent& arrival, double deadline_ms);

struct SlowTickRecord {
  std::string slow_id;
  double r = 0.0;        // instantaneous missing rate at the decision time
  double r_used = 0.0;   // windowed value fed to the selection
  ImputerKind imputer = ImputerKind::Drop;
  int k = 0;
  std::vector<std::string> selected;
  double objective = 0.0;
  std::optional<double> mse;      // vector payloads
  std::optional<double> chamfer;  // point payloads
  std::optional<double> mmd;      // point payloads
};

struct TickMetrics {
  std::uint64_t tick = 0;
  double latency_ms = 0.0;
  std::vector<SlowTickRecord> slow_records;
};

struct ScenarioMetrics {
  Policy policy = Policy::Adaptive;
  std::uint64_t seed = 0;
  std::vector<TickMetrics> ticks;
  double mean_latency_ms = 0.0;
  double p95_latency_ms = 0.0;
  double total_latency_ms = 0.0;
  double mean_quality = 0.0;  // mean primary error over (tick, slow) pairs
};

// Deterministic event-driven run of one policy over the dataset. The affinity
// matrix and projection store are required for the Adaptive policy and for
// NearestTick/Adaptive plan bookkeeping respectively; Block and Drop ignore
// them.
ScenarioMetrics run(const Dataset& dataset, const Scenario& scenario,
                    const AffinityMatrix* affinity, const ProjectionStore* projections);

}  // namespace fusim
