#pragma once

#include <filesystem>

#include "fusim/types.hpp"

namespace fusim {

// Directory layout: `manifest.json` describing sensors, payload kinds/dims and
// tick_count, plus one CSV per sensor named `<id>.csv`.
//   vectors: tick,timestamp_ms,v0,v1,...
//   points:  tick,timestamp_ms,x,y[,z]   (repeated rows per tick)
Dataset load_dataset(const std::filesystem::path& dir);

// Writes the same layout; load(save(d)) == d, bit-exact on payloads.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace fusim
