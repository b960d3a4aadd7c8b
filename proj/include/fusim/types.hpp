#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fusim {

enum class SensorRole { Fast, Slow };

// Half-open angular interval [start, end) in degrees, 0 <= start < end <= 360
// after normalization. A full-circle view is the single interval [0, 360).
struct AngularInterval {
  double start_deg = 0.0;
  double end_deg = 0.0;

  double arc() const { return end_deg - start_deg; }
  bool operator==(const AngularInterval&) const = default;
};

// Union of disjoint, sorted angular intervals.
class FieldOfView {
 public:
  FieldOfView() = default;
  explicit FieldOfView(std::vector<AngularInterval> intervals)
      : intervals_(std::move(intervals)) {}

  static FieldOfView full() { return FieldOfView({{0.0, 360.0}}); }

  const std::vector<AngularInterval>& intervals() const { return intervals_; }
  bool is_full() const {
    return intervals_.size() == 1 && intervals_[0].start_deg == 0.0 &&
           intervals_[0].end_deg == 360.0;
  }
  bool empty() const { return intervals_.empty(); }
  double total_arc() const;

  bool operator==(const FieldOfView&) const = default;

 private:
  std::vector<AngularInterval> intervals_;
};

// Normalizes raw [start, end) degree pairs into canonical form: angles reduced
// modulo 360, wrap-around intervals split at 0, overlaps merged. A span of
// 360 degrees or more becomes the full-circle view. Degenerate (zero-arc)
// inputs are rejected. Idempotent on already-normalized input.
FieldOfView normalize_fov(const std::vector<AngularInterval>& raw);

// Arc length of the intersection / union of two fields of view, in degrees.
double fov_intersection_arc(const FieldOfView& a, const FieldOfView& b);
double fov_union_arc(const FieldOfView& a, const FieldOfView& b);

struct SensorSpec {
  std::string id;
  SensorRole role = SensorRole::Fast;
  FieldOfView fov;
  std::optional<double> max_range_m;
  std::uint64_t frame_bytes = 0;      // per-frame data volume
  double sample_interval_ms = 0.0;
  double clock_offset_ms = 0.0;       // asynchrony from unsynchronized clocks

  bool is_slow() const { return role == SensorRole::Slow; }
};

// Validates scalar invariants and normalizes the FOV. Throws ValidationError.
SensorSpec validate_sensor(SensorSpec spec);

enum class PayloadKind { Vector, Points };

// One modality's data at one tick: either a dense feature vector or a point
// set (rows are 2D/3D coordinates).
struct FeatureFrame {
  std::string sensor_id;
  std::uint64_t tick = 0;
  double timestamp_ms = 0.0;
  PayloadKind kind = PayloadKind::Vector;
  Eigen::VectorXd vector;   // used when kind == Vector
  Eigen::MatrixXd points;   // used when kind == Points, one point per row

  Eigen::Index dim() const {
    return kind == PayloadKind::Vector ? vector.size() : points.cols();
  }
};

struct MissingRate {
  double r = 0.0;  // fraction of a slow frame's bits absent at the deadline
};

struct Dataset {
  std::vector<SensorSpec> sensors;
  std::map<std::string, std::vector<FeatureFrame>> frames;  // by sensor id
  std::uint64_t tick_count = 0;

  const SensorSpec* find_sensor(const std::string& id) const;
  std::vector<const SensorSpec*> slow_sensors() const;
  std::vector<const SensorSpec*> fast_sensors() const;
  const FeatureFrame& frame_at(const std::string& id, std::uint64_t tick) const;
};

// Checks the cross-cutting invariants: per-sensor frame counts equal
// tick_count, consistent payload kind/dimensionality, strictly increasing
// timestamps, at least one slow and one fast sensor. Throws ValidationError
// with the offending sensor id (and tick where applicable).
void validate_dataset(const Dataset& dataset);

// Fixed-length descriptor of a frame used wherever a dense vector is needed
// (embedding rows, projection inputs). Vector payloads pass through; point
// sets are summarized as [centroid, per-axis stddev].
Eigen::VectorXd frame_feature(const FeatureFrame& frame);

}  // namespace fusim
