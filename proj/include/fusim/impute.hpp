#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fusim/select_types.hpp"
#include "fusim/types.hpp"

namespace fusim {

enum class ImputerKind { Drop, Block, NearestTick, AffinityFusion };

std::string to_string(ImputerKind k);
ImputerKind imputer_from_string(const std::string& s);

struct ImputedFrame {
  std::string slow_id;
  std::uint64_t tick = 0;
  PayloadKind kind = PayloadKind::Vector;
  Eigen::VectorXd vector;
  Eigen::MatrixXd points;
  ImputerKind source = ImputerKind::Drop;
  std::map<std::string, double> fusion_weights;  // sums to 1 when present
};

struct ImputeResult {
  std::optional<ImputedFrame> frame;
  bool wait = false;  // Block: the caller pays waiting latency instead
};

// Affine map from one fast sensor's features to a slow sensor's payload
// vectorization, fitted offline by least squares.
struct Projection {
  Eigen::MatrixXd coeffs;     // (in_dim + 1) x out_dim, last row is the bias
  double residual_rel = 0.0;  // |XB - Y|_F / |Y|_F on the training ticks
  bool ridge_fallback = false;
  PayloadKind out_kind = PayloadKind::Vector;
  Eigen::Index point_count = 0;  // pseudo-points per frame for point payloads
  Eigen::Index point_dim = 0;

  Eigen::VectorXd apply(const Eigen::VectorXd& feature) const;
  // Signal-only part of the map, without the fitted intercept.
  Eigen::VectorXd signal(const Eigen::VectorXd& feature) const;
  Eigen::VectorXd bias() const;
};

class ProjectionStore {
 public:
  const Projection* find(const std::string& slow_id, const std::string& fast_id) const;
  bool has_any(const std::string& slow_id) const;
  void put(const std::string& slow_id, const std::string& fast_id, Projection p);

  // CSV matrix per pair plus a JSON index mapping pair -> file, shape, residual.
  void save(const std::filesystem::path& dir) const;
  static ProjectionStore load(const std::filesystem::path& dir);

  const std::map<std::pair<std::string, std::string>, Projection>& entries() const {
    return entries_;
  }

 private:
  std::map<std::pair<std::string, std::string>, Projection> entries_;
};

// Least-squares fit per (fast, slow) pair over the dataset's training ticks.
// Rank-deficient designs fall back to a ridge solve (lambda = 1e-6) and set
// the warning flag. Point-set payloads are vectorized over a canonical
// lexicographic ordering truncated to the smallest per-tick cloud.
ProjectionStore fit_projections(const Dataset& dataset);
ProjectionStore fit_projections(const Dataset& dataset, const std::vector<FusionPlan>& plans);

// Renormalized affinity weights over a plan's selection; sums to 1.
std::map<std::string, double> attention_weights(const FusionPlan& plan);

// Executes one imputation decision for a slow sensor at one tick.
//   Drop          -> no frame (inference proceeds without slow data)
//   Block         -> no frame, wait flag set
//   NearestTick   -> echo of the most recent complete slow frame in `history`
//   AffinityFusion-> additive combination of the selected sensors' projection
//                    signals with an attention-weighted intercept, merged with
//                    the partial payload when one is supplied. Each per-pair
//                    map carries one sensor's share of the payload, so shares
//                    add; averaging them would shrink the estimate toward the
//                    training mean.
// Fast sensors selected by the plan but absent from `fast_frames` are dropped
// from the weight renormalization.
ImputeResult impute(ImputerKind kind, const FusionPlan& plan,
                    const std::vector<FeatureFrame>& fast_frames,
                    const std::optional<FeatureFrame>& partial_slow,
                    const std::vector<FeatureFrame>& history,
                    const ProjectionStore& projections);

}  // namespace fusim
