#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fusim/adam.hpp"

namespace fusim {

struct EmbeddingConfig {
  int target_dim = 2;
  int iterations = 500;
  double perplexity = 30.0;  // capped at (n - 1) / 3 for small samples
  AdamParams adam;
  std::uint64_t seed = 0;
};

// Stacked per-tick feature rows of one or two modalities.
struct AffinitySample {
  Eigen::MatrixXd points;          // n x d
  std::vector<int> labels;         // modality id per row (0 or 1)
};

struct EmbeddingSolution {
  Eigen::MatrixXd embedding;       // n x target_dim
  double final_cost = 0.0;
  std::vector<double> cost_trace;  // [0] is the cost at initialization
};

// Per-point Gaussian bandwidths found by binary search so that the Shannon
// entropy of each conditional neighbor distribution matches log2(perplexity)
// within 1e-4 (50 bisection steps max). Points with all-equal distances get
// sigma = 1.
Eigen::VectorXd calibrate_sigmas(const Eigen::MatrixXd& points, double perplexity);

// Row-conditional neighbor probabilities in the input space:
//   P(i,j) = exp(-|x_i-x_j|^2 / 2 sigma_i^2) / sum_{k != i} exp(-|x_k-x_i|^2 / 2 sigma_i^2)
// Diagonal is zero; each row sums to 1.
Eigen::MatrixXd joint_probabilities(const Eigen::MatrixXd& points,
                                    const Eigen::VectorXd& sigmas);

// Symmetric joint distribution (p_ij + p_ji) / 2n used by the cost/gradient.
Eigen::MatrixXd symmetrize_conditionals(const Eigen::MatrixXd& conditional);

// Gaussian affinities of the embedded points, normalized globally over all
// ordered pairs k != l. All entries sum to 1.
Eigen::MatrixXd low_dim_affinities(const Eigen::MatrixXd& y);

// KL(P || Q) over matching off-diagonal supports; terms with P = 0 contribute 0.
double kl_cost(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);

// dC/dy_i = 4 * sum_j (p_ij - q_ij) (y_i - y_j)
Eigen::MatrixXd kl_gradient(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                            const Eigen::MatrixXd& y);

// Full pipeline: bandwidth calibration, symmetrized P, Gaussian-seeded init
// (N(0, 1e-4)), `iterations` Adam steps on the KL gradient. Deterministic for
// a fixed seed. The returned embedding is the lowest-cost iterate.
EmbeddingSolution embed(const AffinitySample& sample, const EmbeddingConfig& config);

struct CosineSimilarity {
  double value = 0.0;
  int skipped_rows = 0;  // tick pairs where either embedded row had zero norm
};

// Mean cosine similarity over tick-aligned embedded rows of two modalities.
// Extra trailing rows of the longer input are ignored.
CosineSimilarity average_cosine_similarity(const Eigen::MatrixXd& ya,
                                           const Eigen::MatrixXd& yb);

// Convenience: jointly embeds the two stacks of per-tick features (zero-padded
// to a common width when dimensions differ) and returns the mean aligned-row
// cosine similarity of the result, with each modality's embedded block
// centered first so the score is invariant to where the clusters land.
// `cost_trace`, when given, receives the per-iteration KL values.
CosineSimilarity pairwise_modality_similarity(const Eigen::MatrixXd& features_a,
                                              const Eigen::MatrixXd& features_b,
                                              const EmbeddingConfig& config,
                                              std::vector<double>* cost_trace = nullptr);

}  // namespace fusim
