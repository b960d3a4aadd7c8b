#include "fusim/impute.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "fusim/errors.hpp"

namespace fusim {

namespace {

using nlohmann::json;

std::string pair_file(const std::string& slow_id, const std::string& fast_id) {
  return slow_id + "__" + fast_id + ".csv";
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Lexicographic row order gives the least-squares target a stable
// correspondence; the metric side (chamfer) is order-free anyway.
Eigen::MatrixXd canonical_points(const Eigen::MatrixXd& pts) {
  std::vector<Eigen::Index> order(static_cast<size_t>(pts.rows()));
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < pts.cols(); ++c) {
      if (pts(a, c) != pts(b, c)) return pts(a, c) < pts(b, c);
    }
    return false;
  });
  Eigen::MatrixXd out(pts.rows(), pts.cols());
  for (size_t i = 0; i < order.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts.row(order[i]);
  return out;
}

Eigen::VectorXd vectorize_payload(const FeatureFrame& frame, Eigen::Index point_count) {
  if (frame.kind == PayloadKind::Vector) return frame.vector;
  const Eigen::MatrixXd sorted = canonical_points(frame.points);
  Eigen::VectorXd out(point_count * sorted.cols());
  for (Eigen::Index i = 0; i < point_count; ++i)
    out.segment(i * sorted.cols(), sorted.cols()) = sorted.row(i % sorted.rows());
  return out;
}

// One least-squares solve per slow sensor over the concatenated fast features
// [feat_0 | feat_1 | ... | 1]. Each fast sensor's coefficient block becomes
// that pair's stored projection; the shared intercept rides along in every
// block so an attention-weighted sum re-assembles it exactly once. Fitting the
// pairs independently instead would push every other sensor's contribution
// into the residual and inflate the coefficient variance.
std::map<std::string, Projection> fit_slow_sensor(
    const Dataset& dataset, const SensorSpec& slow,
    const std::vector<const SensorSpec*>& fasts) {
  const auto& slow_frames = dataset.frames.at(slow.id);
  const auto ticks = static_cast<Eigen::Index>(dataset.tick_count);

  Projection shape;
  shape.out_kind = slow_frames.front().kind;
  if (shape.out_kind == PayloadKind::Points) {
    shape.point_dim = slow_frames.front().points.cols();
    Eigen::Index m = slow_frames.front().points.rows();
    for (const auto& f : slow_frames) m = std::min(m, f.points.rows());
    shape.point_count = m;
  }
  const Eigen::Index out_dim = shape.out_kind == PayloadKind::Vector
                                   ? slow_frames.front().vector.size()
                                   : shape.point_count * shape.point_dim;

  std::vector<Eigen::Index> in_dims;
  Eigen::Index total_in = 0;
  for (const auto* fast : fasts) {
    const auto dim = frame_feature(dataset.frames.at(fast->id).front()).size();
    in_dims.push_back(dim);
    total_in += dim;
  }
  if (ticks < 2 * (total_in + 1)) {
    throw ValidationError("fit_projections: slow sensor '" + slow.id + "' needs at least " +
                          std::to_string(2 * (total_in + 1)) +
                          " training ticks, dataset has " + std::to_string(ticks));
  }

  Eigen::MatrixXd design(ticks, total_in + 1);
  Eigen::MatrixXd target(ticks, out_dim);
  for (Eigen::Index t = 0; t < ticks; ++t) {
    Eigen::Index col = 0;
    for (size_t i = 0; i < fasts.size(); ++i) {
      design.row(t).segment(col, in_dims[i]) =
          frame_feature(dataset.frames.at(fasts[i]->id)[static_cast<size_t>(t)]).transpose();
      col += in_dims[i];
    }
    design(t, total_in) = 1.0;
    target.row(t) =
        vectorize_payload(slow_frames[static_cast<size_t>(t)], shape.point_count).transpose();
  }

  Eigen::MatrixXd beta;
  bool ridge = false;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    ridge = true;
    const Eigen::MatrixXd gram =
        design.transpose() * design +
        1e-6 * Eigen::MatrixXd::Identity(total_in + 1, total_in + 1);
    beta = gram.ldlt().solve(design.transpose() * target);
  } else {
    beta = qr.solve(target);
  }
  const double target_norm = target.norm();
  const double residual =
      target_norm > 0.0 ? (design * beta - target).norm() / target_norm : 0.0;

  std::map<std::string, Projection> out;
  Eigen::Index col = 0;
  for (size_t i = 0; i < fasts.size(); ++i) {
    Projection proj = shape;
    proj.ridge_fallback = ridge;
    proj.residual_rel = residual;
    proj.coeffs.resize(in_dims[i] + 1, out_dim);
    proj.coeffs.topRows(in_dims[i]) = beta.middleRows(col, in_dims[i]);
    proj.coeffs.row(in_dims[i]) = beta.row(total_in);
    out[fasts[i]->id] = std::move(proj);
    col += in_dims[i];
  }
  return out;
}

}  // namespace

std::string to_string(ImputerKind k) {
  switch (k) {
    case ImputerKind::Drop: return "drop";
    case ImputerKind::Block: return "block";
    case ImputerKind::NearestTick: return "nearest_tick";
    case ImputerKind::AffinityFusion: return "affinity_fusion";
  }
  return "drop";
}

ImputerKind imputer_from_string(const std::string& s) {
  if (s == "drop") return ImputerKind::Drop;
  if (s == "block") return ImputerKind::Block;
  if (s == "nearest_tick") return ImputerKind::NearestTick;
  if (s == "affinity_fusion") return ImputerKind::AffinityFusion;
  throw ValidationError("unknown imputer kind '" + s + "'");
}

Eigen::VectorXd Projection::apply(const Eigen::VectorXd& feature) const {
  return signal(feature) + bias();
}

Eigen::VectorXd Projection::signal(const Eigen::VectorXd& feature) const {
  if (feature.size() + 1 != coeffs.rows())
    throw ValidationError("projection: feature dimension mismatch");
  return coeffs.topRows(feature.size()).transpose() * feature;
}

Eigen::VectorXd Projection::bias() const {
  return coeffs.row(coeffs.rows() - 1).transpose();
}

const Projection* ProjectionStore::find(const std::string& slow_id,
                                        const std::string& fast_id) const {
  const auto it = entries_.find({slow_id, fast_id});
  return it == entries_.end() ? nullptr : &it->second;
}

bool ProjectionStore::has_any(const std::string& slow_id) const {
  for (const auto& [key, value] : entries_)
    if (key.first == slow_id) return true;
  return false;
}

void ProjectionStore::put(const std::string& slow_id, const std::string& fast_id,
                          Projection p) {
  entries_[{slow_id, fast_id}] = std::move(p);
}

void ProjectionStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  json index;
  index["pairs"] = json::array();
  for (const auto& [key, proj] : entries_) {
    const auto file = pair_file(key.first, key.second);
    json entry;
    entry["slow"] = key.first;
    entry["fast"] = key.second;
    entry["file"] = file;
    entry["rows"] = proj.coeffs.rows();
    entry["cols"] = proj.coeffs.cols();
    entry["residual_rel"] = proj.residual_rel;
    entry["ridge_fallback"] = proj.ridge_fallback;
    entry["out_kind"] = proj.out_kind == PayloadKind::Vector ? "vector" : "points";
    entry["point_count"] = proj.point_count;
    entry["point_dim"] = proj.point_dim;
    index["pairs"].push_back(std::move(entry));

    std::ofstream out(dir / file);
    for (Eigen::Index i = 0; i < proj.coeffs.rows(); ++i) {
      for (Eigen::Index j = 0; j < proj.coeffs.cols(); ++j) {
        if (j) out << ",";
        out << fmt_double(proj.coeffs(i, j));
      }
      out << "\n";
    }
  }
  std::ofstream out(dir / "index.json");
  out << index.dump(2) << "\n";
}

ProjectionStore ProjectionStore::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.json");
  if (!in)
    throw ValidationError("projection store: missing index " + (dir / "index.json").string());
  json index;
  try {
    in >> index;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("projection store index: ") + e.what());
  }

  ProjectionStore store;
  for (const auto& entry : index.at("pairs")) {
    Projection proj;
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    proj.residual_rel = entry.at("residual_rel").get<double>();
    proj.ridge_fallback = entry.at("ridge_fallback").get<bool>();
    proj.out_kind = entry.at("out_kind").get<std::string>() == "points"
                        ? PayloadKind::Points
                        : PayloadKind::Vector;
    proj.point_count = entry.value("point_count", Eigen::Index{0});
    proj.point_dim = entry.value("point_dim", Eigen::Index{0});
    proj.coeffs.resize(rows, cols);

    std::ifstream csv(dir / entry.at("file").get<std::string>());
    if (!csv)
      throw ValidationError("projection store: missing matrix file for pair " +
                            entry.at("slow").get<std::string>() + "/" +
                            entry.at("fast").get<std::string>());
    std::string line;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (!std::getline(csv, line))
        throw ValidationError("projection store: truncated matrix file");
      std::stringstream ss(line);
      std::string tok;
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!std::getline(ss, tok, ','))
          throw ValidationError("projection store: truncated matrix row");
        proj.coeffs(i, j) = std::stod(tok);
      }
    }
    store.put(entry.at("slow").get<std::string>(), entry.at("fast").get<std::string>(),
              std::move(proj));
  }
  return store;
}

ProjectionStore fit_projections(const Dataset& dataset) {
  ProjectionStore store;
  const auto fasts = dataset.fast_sensors();
  for (const auto* slow : dataset.slow_sensors()) {
    for (auto& [fast_id, proj] : fit_slow_sensor(dataset, *slow, fasts))
      store.put(slow->id, fast_id, std::move(proj));
  }
  return store;
}

ProjectionStore fit_projections(const Dataset& dataset,
                                const std::vector<FusionPlan>& plans) {
  ProjectionStore store;
  for (const auto& plan : plans) {
    const auto* slow = dataset.find_sensor(plan.slow_id);
    if (!slow) throw ValidationError("fit_projections: unknown slow sensor '" + plan.slow_id + "'");
    std::vector<const SensorSpec*> fasts;
    for (const auto& [fast_id, weight] : plan.selected) {
      const auto* fast = dataset.find_sensor(fast_id);
      if (!fast) throw ValidationError("fit_projections: unknown fast sensor '" + fast_id + "'");
      fasts.push_back(fast);
    }
    for (auto& [fast_id, proj] : fit_slow_sensor(dataset, *slow, fasts))
      store.put(slow->id, fast_id, std::move(proj));
  }
  return store;
}

std::map<std::string, double> attention_weights(const FusionPlan& plan) {
  if (plan.selected.empty())
    throw ValidationError("attention_weights: empty selection for '" + plan.slow_id + "'");
  double mass = 0.0;
  for (const auto& [id, w] : plan.selected) mass += w;
  std::map<std::string, double> out;
  if (mass <= 0.0) {
    const double uniform = 1.0 / static_cast<double>(plan.selected.size());
    for (const auto& [id, w] : plan.selected) out[id] = uniform;
  } else {
    for (const auto& [id, w] : plan.selected) out[id] = w / mass;
  }
  return out;
}

ImputeResult impute(ImputerKind kind, const FusionPlan& plan,
                    const std::vector<FeatureFrame>& fast_frames,
                    const std::optional<FeatureFrame>& partial_slow,
                    const std::vector<FeatureFrame>& history,
                    const ProjectionStore& projections) {
  ImputeResult result;
  switch (kind) {
    case ImputerKind::Drop:
      return result;
    case ImputerKind::Block:
      result.wait = true;
      return result;
    case ImputerKind::NearestTick: {
      if (history.empty()) return result;
      const auto& last = history.back();
      ImputedFrame frame;
      frame.slow_id = plan.slow_id;
      frame.tick = last.tick;
      frame.kind = last.kind;
      frame.vector = last.vector;
      frame.points = last.points;
      frame.source = ImputerKind::NearestTick;
      result.frame = std::move(frame);
      return result;
    }
    case ImputerKind::AffinityFusion:
      break;
  }

  if (!projections.has_any(plan.slow_id)) {
    throw ValidationError("impute: no fitted projections for slow sensor '" + plan.slow_id +
                          "'; run `fit` first");
  }

  // Keep only selected sensors that both arrived and have a fitted map.
  std::vector<std::pair<const FeatureFrame*, const Projection*>> active;
  std::vector<std::pair<std::string, double>> active_weights;
  for (const auto& [fast_id, weight] : plan.selected) {
    const Projection* proj = projections.find(plan.slow_id, fast_id);
    if (!proj) continue;
    const auto it = std::find_if(fast_frames.begin(), fast_frames.end(),
                                 [&](const FeatureFrame& f) { return f.sensor_id == fast_id; });
    if (it == fast_frames.end()) continue;
    active.emplace_back(&*it, proj);
    active_weights.emplace_back(fast_id, weight);
  }
  if (active.empty())
    throw ValidationError("impute: none of the selected fast sensors for '" + plan.slow_id +
                          "' are available with fitted projections; run `fit` first");

  double mass = 0.0;
  for (const auto& [id, w] : active_weights) mass += w;
  ImputedFrame frame;
  frame.slow_id = plan.slow_id;
  frame.source = ImputerKind::AffinityFusion;
  frame.tick = active.front().first->tick;

  const Projection* ref = active.front().second;
  Eigen::VectorXd fused = Eigen::VectorXd::Zero(ref->coeffs.cols());
  for (size_t i = 0; i < active.size(); ++i) {
    const double w = mass > 0.0 ? active_weights[i].second / mass
                                : 1.0 / static_cast<double>(active.size());
    frame.fusion_weights[active_weights[i].first] = w;
    fused += active[i].second->signal(frame_feature(*active[i].first));
    fused += w * active[i].second->bias();
  }

  if (ref->out_kind == PayloadKind::Vector) {
    frame.kind = PayloadKind::Vector;
    frame.vector = fused;
    if (partial_slow && partial_slow->kind == PayloadKind::Vector &&
        partial_slow->vector.size() <= fused.size()) {
      // Arrived prefix components are exact; keep them.
      frame.vector.head(partial_slow->vector.size()) = partial_slow->vector;
      frame.tick = partial_slow->tick;
    }
  } else {
    frame.kind = PayloadKind::Points;
    Eigen::MatrixXd pseudo(ref->point_count, ref->point_dim);
    for (Eigen::Index i = 0; i < ref->point_count; ++i)
      pseudo.row(i) = fused.segment(i * ref->point_dim, ref->point_dim).transpose();
    if (partial_slow && partial_slow->kind == PayloadKind::Points &&
        partial_slow->points.rows() > 0) {
      frame.points.resize(partial_slow->points.rows() + pseudo.rows(), ref->point_dim);
      frame.points << partial_slow->points, pseudo;
      frame.tick = partial_slow->tick;
    } else {
      frame.points = std::move(pseudo);
    }
  }
  result.frame = std::move(frame);
  return result;
}

}  // namespace fusim
