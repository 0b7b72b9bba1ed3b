#pragma once

// Central-difference check of RegressionModel::loss_and_gradients.

#include <algorithm>
#include <cmath>

#include "binderlsc/regressor.hpp"
#include "binderlsc/rng.hpp"
#include "oracles.hpp"

namespace testing {

struct GradCheck {
  double worst_relative = 0.0;
  std::size_t parameters = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor) over every parameter.
inline GradCheck gradient_check(binderlsc::RegressionModel model, const Eigen::MatrixXd& x,
                                const Eigen::MatrixXd& y, double h = 1e-5, double floor = 1e-7) {
  binderlsc::Gradients g;
  model.loss_and_gradients(x, y, g);
  GradCheck out;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = model.loss(x, y);
    param = saved - h;
    const double down = model.loss(x, y);
    param = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
    out.worst_relative = std::max(out.worst_relative, std::abs(analytic - numeric) / scale);
    ++out.parameters;
  };
  auto& layers = model.mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (Eigen::Index r = 0; r < layers[l].weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layers[l].weight.cols(); ++c) {
        probe(layers[l].weight(r, c), g.weight[l](r, c));
      }
      probe(layers[l].bias[r], g.bias[l][r]);
    }
  }
  return out;
}

// Tiny MLP (4 -> 3 -> 3 -> 2 -> 2 -> 2) with random parameters and a
// random batch. Weights are drawn wide enough that some ReLUs are off.
struct TinyProblem {
  binderlsc::RegressionModel model;
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};

inline TinyProblem tiny_problem(std::uint64_t seed) {
  binderlsc::Rng rng(seed);
  auto model = binderlsc::RegressionModel::initialize(binderlsc::ModelKind::Mlp, 4, 2,
                                                      {3, 3, 2, 2}, rng);
  for (auto& layer : model.mutable_layers()) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = 0.3 * rng.normal();
  }
  Eigen::MatrixXd x = oracle::gaussian(5, 4, rng);
  Eigen::MatrixXd y(5, 2);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform(0.0, 6.0);
  return {std::move(model), std::move(x), std::move(y)};
}

}  // namespace testing
