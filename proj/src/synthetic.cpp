#include "fusim/synthetic.hpp"

#include <cmath>
#include <random>

#include "fusim/errors.hpp"

namespace fusim {

Dataset make_linear_dataset(const SyntheticParams& params, std::uint64_t seed) {
  const int n_fast = static_cast<int>(params.coupling.size());
  if (n_fast < 1) throw ValidationError("synthetic: need at least one fast sensor");
  if (params.dim < 2) throw ValidationError("synthetic: dim must be >= 2");
  if (params.ticks < 2) throw ValidationError("synthetic: need >= 2 ticks");

  const Eigen::Index d = params.dim;
  Eigen::VectorXd scales(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double u = 1.0 - static_cast<double>(i) / static_cast<double>(d - 1);
    scales[i] = params.scale_floor + (params.scale_peak - params.scale_floor) * u * u;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double rho = params.temporal_rho;
  const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  std::vector<Eigen::MatrixXd> fast_series(static_cast<size_t>(n_fast));
  for (auto& series : fast_series) {
    series.resize(static_cast<Eigen::Index>(params.ticks), d);
    for (Eigen::Index j = 0; j < d; ++j) series(0, j) = scales[j] * gauss(rng);
    for (std::uint64_t t = 1; t < params.ticks; ++t) {
      for (Eigen::Index j = 0; j < d; ++j) {
        series(static_cast<Eigen::Index>(t), j) =
            rho * series(static_cast<Eigen::Index>(t - 1), j) +
            innov * scales[j] * gauss(rng);
      }
    }
  }

  Eigen::MatrixXd slow_series =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(params.ticks), d);
  for (int k = 0; k < n_fast; ++k)
    slow_series += params.coupling[static_cast<size_t>(k)] * fast_series[static_cast<size_t>(k)];
  for (Eigen::Index t = 0; t < slow_series.rows(); ++t)
    for (Eigen::Index j = 0; j < d; ++j) slow_series(t, j) += params.noise_sigma * gauss(rng);

  Dataset ds;
  ds.tick_count = params.ticks;

  auto add_sensor = [&](const std::string& id, SensorRole role, std::uint64_t bytes,
                        const FieldOfView& fov, const Eigen::MatrixXd& series) {
    SensorSpec spec;
    spec.id = id;
    spec.role = role;
    spec.fov = fov;
    spec.frame_bytes = bytes;
    spec.sample_interval_ms = params.sample_interval_ms;
    spec.clock_offset_ms = 0.0;
    ds.sensors.push_back(validate_sensor(std::move(spec)));

    auto& frames = ds.frames[id];
    for (std::uint64_t t = 0; t < params.ticks; ++t) {
      FeatureFrame f;
      f.sensor_id = id;
      f.tick = t;
      f.timestamp_ms = static_cast<double>(t) * params.sample_interval_ms;
      f.kind = PayloadKind::Vector;
      f.vector = series.row(static_cast<Eigen::Index>(t)).transpose();
      frames.push_back(std::move(f));
    }
  };

  const FieldOfView slow_fov =
      params.slow_fov ? normalize_fov({*params.slow_fov}) : FieldOfView::full();
  add_sensor("slow0", SensorRole::Slow, params.slow_frame_bytes, slow_fov, slow_series);
  for (int k = 0; k < n_fast; ++k) {
    FieldOfView fov;
    if (static_cast<size_t>(k) < params.fast_fovs.size()) {
      fov = normalize_fov({params.fast_fovs[static_cast<size_t>(k)]});
    } else {
      const double start = 30.0 * k;
      fov = normalize_fov({{start, start + 120.0}});
    }
    add_sensor("fast" + std::to_string(k), SensorRole::Fast, params.fast_frame_bytes,
               fov, fast_series[static_cast<size_t>(k)]);
  }

  validate_dataset(ds);
  return ds;
}

}  // namespace fusim
