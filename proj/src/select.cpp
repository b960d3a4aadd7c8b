#include "fusim/select.hpp"

#include <algorithm>
#include <cmath>

#include "fusim/errors.hpp"

namespace fusim {

std::string to_string(FusionCriterion c) {
  return c == FusionCriterion::Consistency ? "consistency" : "complementarity";
}

FusionCriterion criterion_from_string(const std::string& s) {
  if (s == "consistency") return FusionCriterion::Consistency;
  if (s == "complementarity") return FusionCriterion::Complementarity;
  throw ValidationError("unknown fusion criterion '" + s + "'");
}

double fov_iou(const SensorSpec& a, const SensorSpec& b) {
  if (a.fov.empty() && b.fov.empty())
    throw ValidationError("fov_iou: both fields of view are empty");
  const double inter = fov_intersection_arc(a.fov, b.fov);
  const double uni = fov_union_arc(a.fov, b.fov);
  if (uni == 0.0) return 0.0;
  return inter / uni;
}

CriterionDecision affinity_criterion(const SensorSpec& slow,
                                     const std::vector<const SensorSpec*>& fasts) {
  if (fasts.empty()) throw ValidationError("affinity_criterion: no fast sensors");
  CriterionDecision out;
  bool any_zero = false;
  for (const auto* fast : fasts) {
    if (fov_iou(slow, *fast) > 0.0) {
      out.in_view.push_back(fast->id);
    } else {
      any_zero = true;
    }
  }
  out.criterion = any_zero ? FusionCriterion::Consistency : FusionCriterion::Complementarity;
  std::sort(out.in_view.begin(), out.in_view.end());
  return out;
}

int select_k(int v_count, MissingRate r) {
  if (v_count <= 0) return 0;
  // small epsilon guards against 3 * 0.2 = 0.6000...01-style representation
  const int k = static_cast<int>(std::floor(static_cast<double>(v_count) * r.r + 1e-9));
  if (k == 0) return 1;
  return std::min(k, v_count);
}

FusionPlan select_subgraph(const AffinityMatrix& affinity, const std::string& slow_id,
                           MissingRate r) {
  const auto& entry = affinity.at(slow_id);

  std::vector<std::pair<std::string, double>> candidates;
  for (const auto& id : entry.in_view) {
    const auto it = entry.weights.find(id);
    if (it != entry.weights.end()) candidates.emplace_back(id, it->second);
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  FusionPlan plan;
  plan.slow_id = slow_id;
  plan.criterion = entry.criterion;
  plan.k = select_k(static_cast<int>(candidates.size()), r);
  double mass = 0.0;
  for (int i = 0; i < plan.k; ++i) {
    plan.selected.emplace_back(candidates[static_cast<size_t>(i)]);
    mass += candidates[static_cast<size_t>(i)].second;
  }
  plan.objective = mass;
  if (mass > 0.0) {
    for (auto& [id, w] : plan.selected) w /= mass;
  } else if (!plan.selected.empty()) {
    const double uniform = 1.0 / static_cast<double>(plan.selected.size());
    for (auto& [id, w] : plan.selected) w = uniform;
  }
  return plan;
}

}  // namespace fusim
