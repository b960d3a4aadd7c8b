#include "fusim/ahp.hpp"

#include <algorithm>
#include <cmath>

#include "fusim/errors.hpp"
#include "fusim/select.hpp"

namespace fusim {

namespace {

constexpr double kScaleMax = 9.0;
constexpr double kReciprocalTol = 1e-9;

double saaty_random_index(Eigen::Index n) {
  static constexpr double kTable[] = {0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45};
  if (n < 1) return 0.0;
  if (n <= 9) return kTable[n];
  return 1.49;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

PairwiseComparisonMatrix::PairwiseComparisonMatrix(Eigen::MatrixXd m,
                                                   std::vector<std::string> labels)
    : m_(std::move(m)), labels_(std::move(labels)) {
  const Eigen::Index n = m_.rows();
  if (n == 0 || m_.cols() != n)
    throw ValidationError("comparison matrix: must be square and non-empty");
  if (labels_.size() != static_cast<size_t>(n))
    throw ValidationError("comparison matrix: label count mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(m_(i, i) - 1.0) > kReciprocalTol)
      throw ValidationError("comparison matrix: diagonal entry != 1 at " + labels_[i]);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = m_(i, j);
      if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError("comparison matrix: non-positive entry at (" + labels_[i] +
                              ", " + labels_[j] + ")");
      if (v < 1.0 / kScaleMax - kReciprocalTol || v > kScaleMax + kReciprocalTol)
        throw ValidationError("comparison matrix: entry outside [1/9, 9] at (" +
                              labels_[i] + ", " + labels_[j] + ")");
      if (std::abs(m_(j, i) - 1.0 / v) > kReciprocalTol * std::max(1.0, 1.0 / v))
        throw ValidationError("comparison matrix: not reciprocal at (" + labels_[i] +
                              ", " + labels_[j] + ")");
    }
  }
}

Eigen::VectorXd priority_vector(const PairwiseComparisonMatrix& m) {
  const auto& a = m.matrix();
  const Eigen::Index n = a.rows();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < n; ++c) w += a.col(c) / a.col(c).sum();
  w /= static_cast<double>(n);
  return w;
}

ConsistencyReport check_consistency(const PairwiseComparisonMatrix& m) {
  const Eigen::Index n = m.size();
  ConsistencyReport rep;
  if (n == 1) {
    rep.lambda_max = 1.0;
    rep.pass = true;
    return rep;
  }
  const Eigen::VectorXd w = priority_vector(m);
  const Eigen::VectorXd mw = m.matrix() * w;
  rep.lambda_max = (mw.array() / w.array()).mean();
  rep.ci = (rep.lambda_max - static_cast<double>(n)) / (static_cast<double>(n) - 1.0);
  rep.ri = saaty_random_index(n);
  rep.cr = n <= 2 ? 0.0 : rep.ci / rep.ri;
  rep.pass = rep.cr < 0.1;
  return rep;
}

Eigen::VectorXd composite_weights(const Eigen::VectorXd& w1, const Eigen::MatrixXd& w2) {
  if (w2.cols() != w1.size())
    throw ValidationError("composite_weights: criteria count mismatch (" +
                          std::to_string(w2.cols()) + " columns vs " +
                          std::to_string(w1.size()) + " weights)");
  return w2 * w1;
}

PairwiseComparisonMatrix scores_to_comparisons(const std::vector<double>& scores,
                                               const std::vector<std::string>& labels,
                                               ScoreDirection direction) {
  const auto n = static_cast<Eigen::Index>(scores.size());
  if (n < 2) throw ValidationError("scores_to_comparisons: need >= 2 alternatives");

  const double lo = *std::min_element(scores.begin(), scores.end());
  const double hi = *std::max_element(scores.begin(), scores.end());
  std::vector<double> s = scores;
  if (hi == lo) {
    if (hi == 0.0) throw ValidationError("scores_to_comparisons: all scores equal zero");
    std::fill(s.begin(), s.end(), 1.0);
  } else if (lo <= 0.0) {
    // Shift so the extreme ratio lands exactly on the top of the scale.
    const double shift = -lo + (hi - lo) / (kScaleMax - 1.0);
    for (auto& v : s) v += shift;
  }

  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double ratio = s[static_cast<size_t>(i)] / s[static_cast<size_t>(j)];
      if (direction == ScoreDirection::LowerBetter) ratio = 1.0 / ratio;
      double v;
      if (ratio >= 1.0) {
        v = std::clamp(std::round(ratio), 1.0, kScaleMax);
      } else {
        v = 1.0 / std::clamp(std::round(1.0 / ratio), 1.0, kScaleMax);
      }
      m(i, j) = v;
      m(j, i) = 1.0 / v;
    }
  }
  return PairwiseComparisonMatrix(std::move(m), labels);
}

const SlowSensorAffinity& AffinityMatrix::at(const std::string& slow_id) const {
  const auto it = slow.find(slow_id);
  if (it == slow.end())
    throw ValidationError("affinity matrix: unknown slow sensor '" + slow_id + "'");
  return it->second;
}

Eigen::VectorXd compose_hierarchy(const PairwiseComparisonMatrix& criteria,
                                  const std::vector<PairwiseComparisonMatrix>& alternatives,
                                  double cr_threshold,
                                  std::map<std::string, ConsistencyReport>* checks) {
  if (alternatives.size() != static_cast<size_t>(criteria.size()))
    throw ValidationError("compose_hierarchy: need one alternatives matrix per criterion");

  auto verify = [&](const PairwiseComparisonMatrix& m, const std::string& name) {
    auto rep = check_consistency(m);
    rep.pass = rep.cr < cr_threshold;
    if (checks) (*checks)[name] = rep;
    if (!rep.pass)
      throw NumericalError("consistency test failed for matrix '" + name +
                           "' (CR = " + std::to_string(rep.cr) + ")");
  };

  verify(criteria, "criteria");
  const Eigen::VectorXd w1 = priority_vector(criteria);

  const Eigen::Index n_alt = alternatives.front().size();
  Eigen::MatrixXd w2(n_alt, criteria.size());
  for (Eigen::Index c = 0; c < criteria.size(); ++c) {
    const auto& alt = alternatives[static_cast<size_t>(c)];
    if (alt.size() != n_alt)
      throw ValidationError("compose_hierarchy: alternatives matrices differ in size");
    verify(alt, criteria.labels()[static_cast<size_t>(c)]);
    w2.col(c) = priority_vector(alt);
  }
  return composite_weights(w1, w2);
}

AffinityMatrix build_affinity_matrix(const Dataset& dataset,
                                     const EmbeddingConfig& embed_config,
                                     const AhpConfig& ahp_config,
                                     std::map<std::string, std::vector<double>>* cost_traces) {
  const auto slows = dataset.slow_sensors();
  const auto fasts = dataset.fast_sensors();
  if (fasts.empty()) throw ValidationError("build_affinity_matrix: no fast sensors");

  // Feature stacks are shared across slow sensors; build them once.
  std::map<std::string, Eigen::MatrixXd> features;
  for (const auto& spec : dataset.sensors) {
    const auto& frames = dataset.frames.at(spec.id);
    const Eigen::VectorXd first = frame_feature(frames.front());
    Eigen::MatrixXd stack(static_cast<Eigen::Index>(frames.size()), first.size());
    for (size_t t = 0; t < frames.size(); ++t)
      stack.row(static_cast<Eigen::Index>(t)) = frame_feature(frames[t]).transpose();
    features[spec.id] = std::move(stack);
  }

  AffinityMatrix out;
  for (const auto* slow : slows) {
    SlowSensorAffinity entry;
    const auto decision = affinity_criterion(*slow, fasts);
    entry.criterion = decision.criterion;
    entry.in_view = decision.in_view;

    std::vector<std::string> labels;
    std::vector<double> cosine_scores;
    std::vector<double> iou_scores;
    for (const auto* fast : fasts) {
      std::vector<double> trace;
      const auto sim =
          pairwise_modality_similarity(features.at(slow->id), features.at(fast->id),
                                       embed_config, cost_traces ? &trace : nullptr);
      if (cost_traces) (*cost_traces)[slow->id + "/" + fast->id] = std::move(trace);
      const double v = fov_iou(*slow, *fast);
      entry.evidence[fast->id] = PairEvidence{sim.value, v};
      labels.push_back(fast->id);
      cosine_scores.push_back(sim.value);
      iou_scores.push_back(v);
    }

    entry.cosine_split = ahp_config.cosine_split_threshold > 0.0
                             ? ahp_config.cosine_split_threshold
                             : median(cosine_scores);

    if (fasts.size() == 1) {
      entry.weights[fasts.front()->id] = 1.0;
      out.slow[slow->id] = std::move(entry);
      continue;
    }

    // Under complementarity the less similar (and less overlapping) sensor
    // carries more affinity, so both score directions flip.
    const auto direction = entry.criterion == FusionCriterion::Consistency
                               ? ScoreDirection::HigherBetter
                               : ScoreDirection::LowerBetter;
    const auto b_cosine = scores_to_comparisons(cosine_scores, labels, direction);
    const auto b_fov = scores_to_comparisons(iou_scores, labels, direction);

    const double a12 = ahp_config.criteria_importance;
    Eigen::MatrixXd a(2, 2);
    a << 1.0, a12, 1.0 / a12, 1.0;
    const PairwiseComparisonMatrix criteria(a, {"cosine", "fov"});

    const Eigen::VectorXd w = compose_hierarchy(criteria, {b_cosine, b_fov},
                                                ahp_config.cr_threshold, &entry.checks);
    for (size_t i = 0; i < labels.size(); ++i)
      entry.weights[labels[i]] = w[static_cast<Eigen::Index>(i)];
    out.slow[slow->id] = std::move(entry);
  }
  return out;
}

}  // namespace fusim
