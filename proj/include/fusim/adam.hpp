#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace fusim {

struct AdamParams {
  double learning_rate = 0.2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second-moment state for one dense parameter block.
class AdamState {
 public:
  AdamState(Eigen::Index rows, Eigen::Index cols, AdamParams params = {})
      : params_(params),
        m_(Eigen::MatrixXd::Zero(rows, cols)),
        v_(Eigen::MatrixXd::Zero(rows, cols)) {}

  // Applies one bias-corrected descent step in place.
  template <typename Derived>
  void step(Eigen::MatrixXd& x, const Eigen::MatrixBase<Derived>& grad) {
    ++t_;
    m_ = params_.beta1 * m_ + (1.0 - params_.beta1) * grad;
    v_ = params_.beta2 * v_.array().matrix() +
         (1.0 - params_.beta2) * grad.array().square().matrix();
    const double m_corr = 1.0 - std::pow(params_.beta1, static_cast<double>(t_));
    const double v_corr = 1.0 - std::pow(params_.beta2, static_cast<double>(t_));
    x.array() -= params_.learning_rate * (m_.array() / m_corr) /
                 ((v_.array() / v_corr).sqrt() + params_.epsilon);
  }

 private:
  AdamParams params_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd v_;
  long t_ = 0;
};

}  // namespace fusim
