#pragma once

#include <string>
#include <vector>

namespace fusim {

enum class FusionCriterion { Consistency, Complementarity };

std::string to_string(FusionCriterion c);
FusionCriterion criterion_from_string(const std::string& s);

// Per-slow-modality decision: which fast modalities stand in, with weights.
struct FusionPlan {
  std::string slow_id;
  FusionCriterion criterion = FusionCriterion::Complementarity;
  std::vector<std::pair<std::string, double>> selected;  // renormalized weights
  int k = 0;
  double objective = 0.0;  // sum of the selected sensors' affinity weights
};

}  // namespace fusim
