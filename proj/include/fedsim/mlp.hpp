#pragma once

#include <cstddef>
#include <vector>

#include "fedsim/linalg.hpp"
#include "fedsim/param_vector.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Plain feed-forward classifier, relu between layers, linear last layer.
// Doubles as its own gradient container.
struct MlpModel {
  std::vector<Matrix> weights;  // per layer, out x in
  std::vector<Vector> biases;   // per layer, out

  std::size_t layer_count() const { return weights.size(); }
  std::size_t input_dim() const { return weights.front().cols(); }
  std::size_t output_dim() const { return weights.back().rows(); }

  static MlpModel zeros(const std::vector<std::size_t>& sizes);
  // Weights drawn uniform(-r, r) with r = sqrt(6/(fan_in+fan_out)); biases
  // start at zero.
  static MlpModel glorot(const std::vector<std::size_t>& sizes, Rng& rng);
};

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

ParamLayoutPtr layout_of(const MlpModel& model);
ParamVector flatten(const MlpModel& model, ParamLayoutPtr layout = nullptr);
void load(MlpModel& model, const ParamVector& params);

Vector forward(const MlpModel& model, const Vector& x);

// Accumulates one sample's gradient contribution into `grad`, returns the
// sample's cross-entropy loss.
double sample_gradient(const MlpModel& model, const Vector& x, int label, MlpModel& grad);

// Mean cross-entropy and its gradient over the batch.
LossGrad loss_and_gradient(const MlpModel& model, const std::vector<Vector>& xs,
                           const std::vector<int>& labels);

}  // namespace fedsim
