#include "fusim/types.hpp"

#include <algorithm>
#include <cmath>

#include "fusim/errors.hpp"

namespace fusim {

namespace {

double wrap_deg(double a) {
  double w = std::fmod(a, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

}  // namespace

double FieldOfView::total_arc() const {
  double arc = 0.0;
  for (const auto& iv : intervals_) arc += iv.arc();
  return arc;
}

FieldOfView normalize_fov(const std::vector<AngularInterval>& raw) {
  if (raw.empty()) throw ValidationError("fov: no intervals given");

  std::vector<AngularInterval> pieces;
  for (const auto& iv : raw) {
    if (!std::isfinite(iv.start_deg) || !std::isfinite(iv.end_deg))
      throw ValidationError("fov: non-finite interval bound");
    const double span = iv.end_deg - iv.start_deg;
    if (span >= 360.0) return FieldOfView::full();
    const double s = wrap_deg(iv.start_deg);
    double e = wrap_deg(iv.end_deg);
    if (s == e) {
      throw ValidationError("fov: empty interval at " + std::to_string(iv.start_deg) +
                            " deg");
    }
    if (e > s) {
      pieces.push_back({s, e});
    } else {
      // wraps through 0
      pieces.push_back({s, 360.0});
      if (e > 0.0) pieces.push_back({0.0, e});
    }
  }

  std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) {
    return a.start_deg < b.start_deg;
  });
  std::vector<AngularInterval> merged;
  for (const auto& p : pieces) {
    if (!merged.empty() && p.start_deg <= merged.back().end_deg) {
      merged.back().end_deg = std::max(merged.back().end_deg, p.end_deg);
    } else {
      merged.push_back(p);
    }
  }
  // [a,360) followed by [0,b) that meet at 0 stay split; full circle collapses
  if (merged.size() == 1 && merged[0].start_deg == 0.0 && merged[0].end_deg == 360.0)
    return FieldOfView::full();
  double arc = 0.0;
  for (const auto& m : merged) arc += m.arc();
  if (arc >= 360.0) return FieldOfView::full();
  return FieldOfView(std::move(merged));
}

double fov_intersection_arc(const FieldOfView& a, const FieldOfView& b) {
  double arc = 0.0;
  for (const auto& ia : a.intervals()) {
    for (const auto& ib : b.intervals()) {
      const double lo = std::max(ia.start_deg, ib.start_deg);
      const double hi = std::min(ia.end_deg, ib.end_deg);
      if (hi > lo) arc += hi - lo;
    }
  }
  return arc;
}

double fov_union_arc(const FieldOfView& a, const FieldOfView& b) {
  return a.total_arc() + b.total_arc() - fov_intersection_arc(a, b);
}

SensorSpec validate_sensor(SensorSpec spec) {
  if (spec.id.empty()) throw ValidationError("sensor: empty id");
  if (spec.frame_bytes == 0)
    throw ValidationError("sensor '" + spec.id + "': frame_bytes must be positive");
  if (!(spec.sample_interval_ms > 0.0))
    throw ValidationError("sensor '" + spec.id + "': sample_interval_ms must be positive");
  if (!std::isfinite(spec.clock_offset_ms))
    throw ValidationError("sensor '" + spec.id + "': non-finite clock_offset_ms");
  if (spec.fov.empty())
    throw ValidationError("sensor '" + spec.id + "': empty field of view");
  spec.fov = normalize_fov(spec.fov.intervals());
  return spec;
}

const SensorSpec* Dataset::find_sensor(const std::string& id) const {
  for (const auto& s : sensors)
    if (s.id == id) return &s;
  return nullptr;
}

std::vector<const SensorSpec*> Dataset::slow_sensors() const {
  std::vector<const SensorSpec*> out;
  for (const auto& s : sensors)
    if (s.is_slow()) out.push_back(&s);
  return out;
}

std::vector<const SensorSpec*> Dataset::fast_sensors() const {
  std::vector<const SensorSpec*> out;
  for (const auto& s : sensors)
    if (!s.is_slow()) out.push_back(&s);
  return out;
}

const FeatureFrame& Dataset::frame_at(const std::string& id, std::uint64_t tick) const {
  return frames.at(id).at(tick);
}

void validate_dataset(const Dataset& dataset) {
  if (dataset.sensors.empty()) throw ValidationError("dataset: no sensors");
  bool any_slow = false;
  bool any_fast = false;
  for (const auto& spec : dataset.sensors) {
    any_slow |= spec.is_slow();
    any_fast |= !spec.is_slow();
    auto it = dataset.frames.find(spec.id);
    const auto n = it == dataset.frames.end() ? 0 : it->second.size();
    if (n != dataset.tick_count) {
      throw ValidationError("sensor '" + spec.id + "': has " + std::to_string(n) +
                            " frames, manifest says " +
                            std::to_string(dataset.tick_count));
    }
    double prev_ts = -std::numeric_limits<double>::infinity();
    Eigen::Index dim = -1;
    PayloadKind kind{};
    for (std::uint64_t t = 0; t < n; ++t) {
      const auto& f = it->second[t];
      if (f.tick != t) {
        throw ValidationError("sensor '" + spec.id + "': frame out of order at tick " +
                              std::to_string(t));
      }
      if (!(f.timestamp_ms > prev_ts)) {
        throw ValidationError("sensor '" + spec.id +
                              "': non-monotone timestamp at tick " + std::to_string(t));
      }
      prev_ts = f.timestamp_ms;
      if (t == 0) {
        dim = f.dim();
        kind = f.kind;
      } else if (f.kind != kind) {
        throw ValidationError("sensor '" + spec.id + "': mixed payload kinds at tick " +
                              std::to_string(t));
      } else if (f.dim() != dim) {
        throw ValidationError("sensor '" + spec.id + "': dimension mismatch at tick " +
                              std::to_string(t) + " (" + std::to_string(f.dim()) +
                              " vs " + std::to_string(dim) + ")");
      }
      if (f.kind == PayloadKind::Points && f.points.rows() == 0) {
        throw ValidationError("sensor '" + spec.id + "': empty point set at tick " +
                              std::to_string(t));
      }
    }
  }
  if (!any_slow) throw ValidationError("dataset: no slow modality");
  if (!any_fast) throw ValidationError("dataset: no fast modality");
}

Eigen::VectorXd frame_feature(const FeatureFrame& frame) {
  if (frame.kind == PayloadKind::Vector) return frame.vector;
  const Eigen::Index d = frame.points.cols();
  const Eigen::Index n = frame.points.rows();
  Eigen::VectorXd feat(2 * d);
  const Eigen::RowVectorXd mean = frame.points.colwise().mean();
  feat.head(d) = mean.transpose();
  Eigen::RowVectorXd var = (frame.points.rowwise() - mean).array().square().colwise().sum() /
                           static_cast<double>(n);
  feat.tail(d) = var.array().sqrt().transpose();
  return feat;
}

}  // namespace fusim
