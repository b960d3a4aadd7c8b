#pragma once

#include <vector>

#include "fusim/ahp.hpp"
#include "fusim/select_types.hpp"
#include "fusim/types.hpp"

namespace fusim {

// Angular intersection-over-union of two fields of view, in [0, 1].
// Range information is ignored; only the circle arcs matter.
double fov_iou(const SensorSpec& a, const SensorSpec& b);

struct CriterionDecision {
  FusionCriterion criterion = FusionCriterion::Complementarity;
  std::vector<std::string> in_view;  // fast ids with nonzero IoU (V_j)
};

// Consistency when any fast sensor has zero view overlap with the slow one,
// complementarity when every fast sensor overlaps.
CriterionDecision affinity_criterion(const SensorSpec& slow,
                                     const std::vector<const SensorSpec*>& fasts);

// k = floor(|V_j| * r), bumped to 1 when the floor hits 0 but candidates
// exist, and 0 only when there are no candidates at all.
int select_k(int v_count, MissingRate r);

// Picks the k largest-affinity fast sensors among those in view; ties break
// by ascending sensor id. Weights are renormalized over the selection; the
// objective is the raw affinity mass captured.
FusionPlan select_subgraph(const AffinityMatrix& affinity, const std::string& slow_id,
                           MissingRate r);

}  // namespace fusim
