#include "fusim/dataset.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fusim/errors.hpp"

namespace fusim {

namespace {

using nlohmann::json;

SensorRole role_from_string(const std::string& s) {
  if (s == "fast") return SensorRole::Fast;
  if (s == "slow") return SensorRole::Slow;
  throw ValidationError("manifest: unknown role '" + s + "'");
}

std::string role_to_string(SensorRole r) {
  return r == SensorRole::Slow ? "slow" : "fast";
}

PayloadKind kind_from_string(const std::string& s) {
  if (s == "vector") return PayloadKind::Vector;
  if (s == "points") return PayloadKind::Points;
  throw ValidationError("manifest: unknown payload kind '" + s + "'");
}

std::string kind_to_string(PayloadKind k) {
  return k == PayloadKind::Vector ? "vector" : "points";
}

double parse_double(const std::string& tok, const std::string& ctx) {
  try {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(ctx + ": bad numeric field '" + tok + "'");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

// Round-trip exact formatting for CSV payloads.
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<FeatureFrame> load_sensor_csv(const std::filesystem::path& path,
                                          const SensorSpec& spec, PayloadKind kind,
                                          Eigen::Index dim) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open frame file " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("frame file " + path.string() + ": empty");

  std::vector<FeatureFrame> frames;
  std::vector<Eigen::RowVectorXd> pending_points;
  std::uint64_t pending_tick = 0;
  double pending_ts = 0.0;
  bool has_pending = false;

  auto flush_points = [&]() {
    if (!has_pending) return;
    FeatureFrame f;
    f.sensor_id = spec.id;
    f.tick = pending_tick;
    f.timestamp_ms = pending_ts;
    f.kind = PayloadKind::Points;
    f.points.resize(static_cast<Eigen::Index>(pending_points.size()), dim);
    for (size_t i = 0; i < pending_points.size(); ++i)
      f.points.row(static_cast<Eigen::Index>(i)) = pending_points[i];
    frames.push_back(std::move(f));
    pending_points.clear();
    has_pending = false;
  };

  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto ctx = spec.id + ":" + std::to_string(lineno);
    auto toks = split_csv_line(line);
    if (toks.size() != static_cast<size_t>(dim) + 2) {
      throw ValidationError("sensor '" + spec.id + "': dimension mismatch at line " +
                            std::to_string(lineno) + " (" +
                            std::to_string(toks.size() - 2) + " values, expected " +
                            std::to_string(dim) + ")");
    }
    const auto tick = static_cast<std::uint64_t>(parse_double(toks[0], ctx));
    const double ts = parse_double(toks[1], ctx);
    if (kind == PayloadKind::Vector) {
      FeatureFrame f;
      f.sensor_id = spec.id;
      f.tick = tick;
      f.timestamp_ms = ts;
      f.kind = PayloadKind::Vector;
      f.vector.resize(dim);
      for (Eigen::Index j = 0; j < dim; ++j)
        f.vector[j] = parse_double(toks[static_cast<size_t>(j) + 2], ctx);
      frames.push_back(std::move(f));
    } else {
      if (has_pending && tick != pending_tick) flush_points();
      if (!has_pending) {
        pending_tick = tick;
        pending_ts = ts;
        has_pending = true;
      }
      Eigen::RowVectorXd pt(dim);
      for (Eigen::Index j = 0; j < dim; ++j)
        pt[j] = parse_double(toks[static_cast<size_t>(j) + 2], ctx);
      pending_points.push_back(pt);
    }
  }
  flush_points();
  return frames;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw ValidationError("missing manifest: " + manifest_path.string());
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + manifest_path.string() + ": " + e.what());
  }

  Dataset ds;
  try {
    ds.tick_count = m.at("tick_count").get<std::uint64_t>();
    for (const auto& js : m.at("sensors")) {
      SensorSpec spec;
      spec.id = js.at("id").get<std::string>();
      spec.role = role_from_string(js.at("role").get<std::string>());
      std::vector<AngularInterval> raw;
      for (const auto& pair : js.at("fov"))
        raw.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
      spec.fov = FieldOfView(raw);
      if (js.contains("max_range_m")) spec.max_range_m = js["max_range_m"].get<double>();
      spec.frame_bytes = js.at("frame_bytes").get<std::uint64_t>();
      spec.sample_interval_ms = js.at("sample_interval_ms").get<double>();
      spec.clock_offset_ms = js.value("clock_offset_ms", 0.0);
      spec = validate_sensor(std::move(spec));

      const auto& payload = js.at("payload");
      const auto kind = kind_from_string(payload.at("kind").get<std::string>());
      const auto dim = payload.at("dim").get<Eigen::Index>();
      if (dim <= 0)
        throw ValidationError("sensor '" + spec.id + "': payload dim must be positive");

      ds.frames[spec.id] = load_sensor_csv(dir / (spec.id + ".csv"), spec, kind, dim);
      ds.sensors.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw ValidationError("manifest " + manifest_path.string() + ": " + e.what());
  }

  validate_dataset(ds);
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json m;
  m["tick_count"] = dataset.tick_count;
  m["sensors"] = json::array();
  for (const auto& spec : dataset.sensors) {
    json js;
    js["id"] = spec.id;
    js["role"] = role_to_string(spec.role);
    js["fov"] = json::array();
    for (const auto& iv : spec.fov.intervals())
      js["fov"].push_back({iv.start_deg, iv.end_deg});
    if (spec.max_range_m) js["max_range_m"] = *spec.max_range_m;
    js["frame_bytes"] = spec.frame_bytes;
    js["sample_interval_ms"] = spec.sample_interval_ms;
    js["clock_offset_ms"] = spec.clock_offset_ms;
    const auto& frames = dataset.frames.at(spec.id);
    js["payload"] = {{"kind", kind_to_string(frames.front().kind)},
                     {"dim", frames.front().dim()}};
    m["sensors"].push_back(std::move(js));
  }
  {
    std::ofstream out(dir / "manifest.json");
    out << m.dump(2) << "\n";
  }

  for (const auto& spec : dataset.sensors) {
    const auto& frames = dataset.frames.at(spec.id);
    std::ofstream out(dir / (spec.id + ".csv"));
    const auto kind = frames.front().kind;
    const auto dim = frames.front().dim();
    if (kind == PayloadKind::Vector) {
      out << "tick,timestamp_ms";
      for (Eigen::Index j = 0; j < dim; ++j) out << ",v" << j;
      out << "\n";
      for (const auto& f : frames) {
        out << f.tick << "," << fmt_double(f.timestamp_ms);
        for (Eigen::Index j = 0; j < dim; ++j) out << "," << fmt_double(f.vector[j]);
        out << "\n";
      }
    } else {
      out << "tick,timestamp_ms,x,y" << (dim == 3 ? ",z" : "") << "\n";
      for (const auto& f : frames) {
        for (Eigen::Index i = 0; i < f.points.rows(); ++i) {
          out << f.tick << "," << fmt_double(f.timestamp_ms);
          for (Eigen::Index j = 0; j < dim; ++j)
            out << "," << fmt_double(f.points(i, j));
          out << "\n";
        }
      }
    }
  }
}

}  // namespace fusim
