#include "fusim/sne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fusim/errors.hpp"

namespace fusim {

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                       2.0 * (x * x.transpose());
  return d2.cwiseMax(0.0);
}

// Conditional distribution for one row at precision beta = 1 / (2 sigma^2),
// returned together with its Shannon entropy in bits.
double row_entropy_bits(const Eigen::VectorXd& d2_row, Eigen::Index self, double beta,
                        Eigen::VectorXd* out_p) {
  const Eigen::Index n = d2_row.size();
  Eigen::VectorXd logits(n);
  double max_logit = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == self) continue;
    logits[j] = -beta * d2_row[j];
    max_logit = std::max(max_logit, logits[j]);
  }
  double z = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == self) continue;
    z += std::exp(logits[j] - max_logit);
  }
  double h_bits = 0.0;
  if (out_p) out_p->setZero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == self) continue;
    const double p = std::exp(logits[j] - max_logit) / z;
    if (p > 0.0) h_bits -= p * std::log2(p);
    if (out_p) (*out_p)[j] = p;
  }
  return h_bits;
}

}  // namespace

Eigen::VectorXd calibrate_sigmas(const Eigen::MatrixXd& points, double perplexity) {
  const Eigen::Index n = points.rows();
  if (n < 4) throw ValidationError("calibrate_sigmas: need at least 4 points");
  if (!(perplexity > 0.0) || perplexity >= static_cast<double>(n))
    throw ValidationError("calibrate_sigmas: perplexity must be in (0, n)");
  if (!points.allFinite())
    throw NumericalError("calibrate_sigmas: non-finite input coordinates");

  const Eigen::MatrixXd d2 = squared_distances(points);
  if (!d2.allFinite()) throw NumericalError("calibrate_sigmas: non-finite distances");
  const double target_bits = std::log2(perplexity);

  Eigen::VectorXd sigmas(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // All neighbors equidistant: entropy is flat in sigma, any value works.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      lo = std::min(lo, d2(i, j));
      hi = std::max(hi, d2(i, j));
    }
    if (hi - lo < 1e-12) {
      sigmas[i] = 1.0;
      continue;
    }

    double beta = 1.0;
    double beta_lo = 0.0;
    double beta_hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 50; ++it) {
      const double h = row_entropy_bits(d2.row(i), i, beta, nullptr);
      const double diff = h - target_bits;
      if (std::abs(diff) < 1e-4) break;
      if (diff > 0.0) {
        beta_lo = beta;  // too spread out -> sharpen
        beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta_lo + beta_hi);
      } else {
        beta_hi = beta;
        beta = beta_lo == 0.0 ? beta * 0.5 : 0.5 * (beta_lo + beta_hi);
      }
    }
    sigmas[i] = std::sqrt(1.0 / (2.0 * beta));
  }
  return sigmas;
}

Eigen::MatrixXd joint_probabilities(const Eigen::MatrixXd& points,
                                    const Eigen::VectorXd& sigmas) {
  const Eigen::Index n = points.rows();
  const Eigen::MatrixXd d2 = squared_distances(points);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double beta = 1.0 / (2.0 * sigmas[i] * sigmas[i]);
    row_entropy_bits(d2.row(i), i, beta, &row);
    p.row(i) = row.transpose();
  }
  return p;
}

Eigen::MatrixXd symmetrize_conditionals(const Eigen::MatrixXd& conditional) {
  const double n = static_cast<double>(conditional.rows());
  return (conditional + conditional.transpose()) / (2.0 * n);
}

Eigen::MatrixXd low_dim_affinities(const Eigen::MatrixXd& y) {
  Eigen::MatrixXd q = (-squared_distances(y)).array().exp();
  q.diagonal().setZero();
  const double total = q.sum();
  q /= total;
  return q;
}

double kl_cost(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  const Eigen::Index n = p.rows();
  double c = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double pij = p(i, j);
      if (pij > 0.0) c += pij * std::log(pij / q(i, j));
    }
  }
  return c;
}

Eigen::MatrixXd kl_gradient(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                            const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd diff = p - q;
  // 4 * sum_j (p_ij - q_ij)(y_i - y_j), vectorized over rows
  const Eigen::VectorXd row_sums = diff.rowwise().sum();
  return 4.0 * (row_sums.asDiagonal() * y - diff * y);
}

EmbeddingSolution embed(const AffinitySample& sample, const EmbeddingConfig& config) {
  const Eigen::Index n = sample.points.rows();
  if (n < 4) throw ValidationError("embed: need at least 4 rows");
  if (config.target_dim <= 0 || config.target_dim >= sample.points.cols())
    throw ValidationError("embed: target_dim must be in [1, input_dim)");
  if (config.iterations < 0) throw ValidationError("embed: negative iteration count");
  if (!sample.points.allFinite()) throw NumericalError("embed: non-finite input");

  const double capped = std::min(config.perplexity, (static_cast<double>(n) - 1.0) / 3.0);
  const double perplexity = std::max(capped, 1.0);

  const Eigen::VectorXd sigmas = calibrate_sigmas(sample.points, perplexity);
  const Eigen::MatrixXd p = symmetrize_conditionals(joint_probabilities(sample.points, sigmas));

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1e-2);  // variance 1e-4
  Eigen::MatrixXd y(n, config.target_dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < config.target_dim; ++j) y(i, j) = gauss(rng);

  EmbeddingSolution sol;
  sol.cost_trace.reserve(static_cast<size_t>(config.iterations) + 1);
  double cost = kl_cost(p, low_dim_affinities(y));
  sol.cost_trace.push_back(cost);
  sol.embedding = y;
  sol.final_cost = cost;

  AdamState adam(n, config.target_dim, config.adam);
  for (int t = 1; t <= config.iterations; ++t) {
    const Eigen::MatrixXd q = low_dim_affinities(y);
    const Eigen::MatrixXd grad = kl_gradient(p, q, y);
    adam.step(y, grad);
    cost = kl_cost(p, low_dim_affinities(y));
    if (!std::isfinite(cost))
      throw NumericalError("embed: diverged at iteration " + std::to_string(t));
    sol.cost_trace.push_back(cost);
    if (cost < sol.final_cost) {
      sol.final_cost = cost;
      sol.embedding = y;
    }
  }
  return sol;
}

CosineSimilarity average_cosine_similarity(const Eigen::MatrixXd& ya,
                                           const Eigen::MatrixXd& yb) {
  const Eigen::Index rows = std::min(ya.rows(), yb.rows());
  if (rows == 0) throw ValidationError("average_cosine_similarity: empty input");
  if (ya.cols() != yb.cols())
    throw ValidationError("average_cosine_similarity: dimension mismatch");

  CosineSimilarity result;
  double acc = 0.0;
  int used = 0;
  for (Eigen::Index t = 0; t < rows; ++t) {
    const double na = ya.row(t).norm();
    const double nb = yb.row(t).norm();
    if (na == 0.0 || nb == 0.0) {
      ++result.skipped_rows;
      continue;
    }
    acc += ya.row(t).dot(yb.row(t)) / (na * nb);
    ++used;
  }
  if (used == 0)
    throw NumericalError("average_cosine_similarity: no nonzero-norm row pairs");
  result.value = acc / used;
  return result;
}

CosineSimilarity pairwise_modality_similarity(const Eigen::MatrixXd& features_a,
                                              const Eigen::MatrixXd& features_b,
                                              const EmbeddingConfig& config,
                                              std::vector<double>* cost_trace) {
  const Eigen::Index ticks = std::min(features_a.rows(), features_b.rows());
  if (ticks < 2) throw ValidationError("pairwise_modality_similarity: need >= 2 ticks");
  const Eigen::Index width = std::max(features_a.cols(), features_b.cols());

  AffinitySample sample;
  sample.points = Eigen::MatrixXd::Zero(2 * ticks, width);
  sample.points.topLeftCorner(ticks, features_a.cols()) = features_a.topRows(ticks);
  sample.points.bottomLeftCorner(ticks, features_b.cols()) = features_b.topRows(ticks);
  sample.labels.assign(static_cast<size_t>(2 * ticks), 0);
  for (Eigen::Index t = 0; t < ticks; ++t)
    sample.labels[static_cast<size_t>(ticks + t)] = 1;

  const EmbeddingSolution sol = embed(sample, config);
  if (cost_trace) *cost_trace = sol.cost_trace;
  // The embedding is translation-arbitrary, so raw row cosines mostly encode
  // where the two clusters landed. Centering each modality's block makes the
  // score reflect per-tick co-variation instead.
  Eigen::MatrixXd ya = sol.embedding.topRows(ticks);
  Eigen::MatrixXd yb = sol.embedding.bottomRows(ticks);
  ya.rowwise() -= ya.colwise().mean();
  yb.rowwise() -= yb.colwise().mean();
  return average_cosine_similarity(ya, yb);
}

}  // namespace fusim
