#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fusim/types.hpp"

namespace fusim {

// Parameters of a generated multi-sensor scene where one slow vector sensor is
// an exact linear mixture of the fast sensors plus Gaussian noise:
//   slow_t = sum_k coupling[k] * fast_k_t + noise,  noise ~ N(0, noise_sigma^2)
// Fast features follow a stationary AR(1) with per-component scales that decay
// from the front of the vector to the back, so early components carry most of
// the signal energy.
struct SyntheticParams {
  int dim = 16;
  std::uint64_t ticks = 240;
  std::vector<double> coupling = {0.7, 0.3};  // one entry per fast sensor
  double noise_sigma = 0.01;
  double temporal_rho = 0.999;                // AR(1) coefficient
  double scale_floor = 0.25;                  // lightest component scale
  double scale_peak = 3.0;                    // heaviest component scale

  std::uint64_t slow_frame_bytes = 1'300'000;
  std::uint64_t fast_frame_bytes = 62'500;
  double sample_interval_ms = 100.0;

  // Optional FOV sectors, [start, end) degrees. Fast sensors default to
  // overlapping forward sectors; the slow sensor defaults to the full circle.
  std::vector<AngularInterval> fast_fovs;
  std::optional<AngularInterval> slow_fov;
};

// Deterministic for a fixed seed. Sensor ids: "slow0", "fast0", "fast1", ...
Dataset make_linear_dataset(const SyntheticParams& params, std::uint64_t seed);

}  // namespace fusim
