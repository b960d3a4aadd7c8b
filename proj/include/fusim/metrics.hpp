#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fusim/errors.hpp"

namespace fusim {

// Symmetric sum of squared nearest-neighbor distances between two point sets
// (rows are points). Un-normalized.
template <typename DerivedA, typename DerivedB>
double chamfer_distance(const Eigen::MatrixBase<DerivedA>& x,
                        const Eigen::MatrixBase<DerivedB>& y) {
  if (x.rows() == 0 || y.rows() == 0)
    throw ValidationError("chamfer_distance: empty point set");
  if (x.cols() != y.cols())
    throw ValidationError("chamfer_distance: dimension mismatch");

  auto one_sided = [](const auto& from, const auto& to) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < from.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < to.rows(); ++j)
        best = std::min(best, (from.row(i) - to.row(j)).squaredNorm());
      acc += best;
    }
    return acc;
  };
  return one_sided(x.derived(), y.derived()) + one_sided(y.derived(), x.derived());
}

// Chamfer distance with each directed sum divided by its source set size,
// comparable across cloud sizes.
template <typename DerivedA, typename DerivedB>
double chamfer_distance_normalized(const Eigen::MatrixBase<DerivedA>& x,
                                   const Eigen::MatrixBase<DerivedB>& y) {
  if (x.rows() == 0 || y.rows() == 0)
    throw ValidationError("chamfer_distance: empty point set");
  if (x.cols() != y.cols())
    throw ValidationError("chamfer_distance: dimension mismatch");
  auto one_sided = [](const auto& from, const auto& to) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < from.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < to.rows(); ++j)
        best = std::min(best, (from.row(i) - to.row(j)).squaredNorm());
      acc += best;
    }
    return acc / static_cast<double>(from.rows());
  };
  return one_sided(x.derived(), y.derived()) + one_sided(y.derived(), x.derived());
}

struct Bandwidth {
  double value = 0.0;  // <= 0 selects the median heuristic

  static Bandwidth Auto() { return Bandwidth{0.0}; }
  static Bandwidth Fixed(double h) { return Bandwidth{h}; }
};

// Median pairwise distance over the pooled samples; 1 when degenerate.
inline double median_heuristic_bandwidth(const Eigen::MatrixXd& x,
                                         const Eigen::MatrixXd& y) {
  Eigen::MatrixXd pooled(x.rows() + y.rows(), x.cols());
  pooled << x, y;
  std::vector<double> dists;
  dists.reserve(static_cast<size_t>(pooled.rows()) * (pooled.rows() - 1) / 2);
  for (Eigen::Index i = 0; i < pooled.rows(); ++i)
    for (Eigen::Index j = i + 1; j < pooled.rows(); ++j)
      dists.push_back((pooled.row(i) - pooled.row(j)).norm());
  if (dists.empty()) return 1.0;
  std::nth_element(dists.begin(), dists.begin() + static_cast<long>(dists.size() / 2),
                   dists.end());
  const double med = dists[dists.size() / 2];
  return med > 0.0 ? med : 1.0;
}

// Biased (V-statistic) squared maximum mean discrepancy under a Gaussian
// kernel; exactly zero for identical samples and nonnegative by construction.
inline double mmd(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                  Bandwidth bandwidth = Bandwidth::Auto()) {
  if (x.rows() == 0 || y.rows() == 0) throw ValidationError("mmd: empty sample set");
  if (x.cols() != y.cols()) throw ValidationError("mmd: dimension mismatch");

  const double h = bandwidth.value > 0.0 ? bandwidth.value
                                         : median_heuristic_bandwidth(x, y);
  const double gamma = 1.0 / (2.0 * h * h);
  auto kernel_mean = [gamma](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < b.rows(); ++j)
        acc += std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
    return acc / static_cast<double>(a.rows() * b.rows());
  };
  const double value = kernel_mean(x, x) + kernel_mean(y, y) - 2.0 * kernel_mean(x, y);
  return std::max(value, 0.0);
}

}  // namespace fusim
