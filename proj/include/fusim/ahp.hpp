#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "fusim/select_types.hpp"
#include "fusim/sne.hpp"
#include "fusim/types.hpp"

namespace fusim {

// Reciprocal pairwise-comparison matrix on the 1..9 importance scale.
class PairwiseComparisonMatrix {
 public:
  PairwiseComparisonMatrix(Eigen::MatrixXd m, std::vector<std::string> labels);

  const Eigen::MatrixXd& matrix() const { return m_; }
  const std::vector<std::string>& labels() const { return labels_; }
  Eigen::Index size() const { return m_.rows(); }

 private:
  Eigen::MatrixXd m_;
  std::vector<std::string> labels_;
};

struct ConsistencyReport {
  double lambda_max = 0.0;
  double ci = 0.0;
  double ri = 0.0;
  double cr = 0.0;
  bool pass = false;
};

// Column-normalized arithmetic-mean eigenvector approximation; sums to 1.
Eigen::VectorXd priority_vector(const PairwiseComparisonMatrix& m);

// lambda_max estimated as the mean Rayleigh quotient (m w)_i / w_i over the
// priority vector; CI = (lambda_max - n)/(n - 1); CR = CI / RI with Saaty's
// random-index table; CR := 0 for n <= 2; pass iff CR < 0.1.
ConsistencyReport check_consistency(const PairwiseComparisonMatrix& m);

// W[i] = sum_c W2(i, c) * W1[c] — alternatives weighted through criteria.
Eigen::VectorXd composite_weights(const Eigen::VectorXd& w1, const Eigen::MatrixXd& w2);

enum class ScoreDirection { HigherBetter, LowerBetter };

// Builds a reciprocal comparison matrix from empirical per-alternative scores:
// each score ratio is mapped monotonically onto the 1..9 scale by rounding and
// clamping. Non-positive scores are first shifted so the extreme ratio lands
// at the top of the scale. Scale-invariant in the scores.
PairwiseComparisonMatrix scores_to_comparisons(const std::vector<double>& scores,
                                               const std::vector<std::string>& labels,
                                               ScoreDirection direction);

struct PairEvidence {
  double cosine = 0.0;   // average cosine similarity from the joint embedding
  double fov_iou = 0.0;  // angular IoU with the slow sensor
};

struct SlowSensorAffinity {
  FusionCriterion criterion = FusionCriterion::Complementarity;
  std::map<std::string, double> weights;            // fast id -> weight, sums to 1
  std::map<std::string, PairEvidence> evidence;     // fast id -> raw scores
  std::map<std::string, ConsistencyReport> checks;  // "criteria", "cosine", "fov"
  std::vector<std::string> in_view;                 // fast ids with nonzero IoU
  double cosine_split = 0.0;  // consistency/complementarity indicator threshold
};

// Normalized slow x fast affinity weights with provenance.
struct AffinityMatrix {
  std::map<std::string, SlowSensorAffinity> slow;

  const SlowSensorAffinity& at(const std::string& slow_id) const;
};

struct AhpConfig {
  double criteria_importance = 7.0;  // cosine over FOV in the criteria matrix
  double cr_threshold = 0.1;
  // Consistency/complementarity cosine indicator; defaults to the median of
  // the per-pair similarities when unset (<= 0).
  double cosine_split_threshold = 0.0;
};

// Composes the three-layer hierarchy directly from prepared comparison
// matrices (the bypass path used by `affinity --bypass-ahp-example` and by
// anyone supplying expert matrices). `alternatives` holds one matrix per
// criterion, alternatives as rows.
Eigen::VectorXd compose_hierarchy(const PairwiseComparisonMatrix& criteria,
                                  const std::vector<PairwiseComparisonMatrix>& alternatives,
                                  double cr_threshold,
                                  std::map<std::string, ConsistencyReport>* checks = nullptr);

// Full evidence path: per slow sensor, embeds each (slow, fast) pair to get the
// cosine criterion, computes FOV IoU, picks the fusion criterion, builds and
// verifies the comparison matrices and composes the weights. `cost_traces`,
// when given, collects each pair's embedding KL trace keyed "slow/fast".
AffinityMatrix build_affinity_matrix(const Dataset& dataset,
                                     const EmbeddingConfig& embed_config,
                                     const AhpConfig& ahp_config,
                                     std::map<std::string, std::vector<double>>* cost_traces = nullptr);

}  // namespace fusim
