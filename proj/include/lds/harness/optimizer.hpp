#pragma once

#include <cmath>

#include "lds/core/error.hpp"
#include "lds/core/types.hpp"

namespace lds {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw ConfigError("Adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  }
};

/// Adam with bias-corrected moments over a dense parameter table.
class Adam {
 public:
  Adam(const AdamConfig& cfg, Eigen::Index rows, Eigen::Index cols)
      : cfg_(cfg), m_(RowMatrix::Zero(rows, cols)), v_(RowMatrix::Zero(rows, cols)) {
    cfg_.validate();
  }

  void step(RowMatrix& params, const RowMatrix& grad) {
    if (grad.rows() != params.rows() || grad.cols() != params.cols()) {
      throw DataError("Adam: gradient shape differs from parameters");
    }
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    params.array() -= cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
  }

  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  RowMatrix m_;
  RowMatrix v_;
  long t_ = 0;
};

}  // namespace lds
