#include "fedsim/mlp.hpp"

#include <stdexcept>
#include <string>

namespace fedsim {

namespace {

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("MlpModel: need at least input and output layer");
  for (std::size_t s : sizes) {
    if (s == 0) throw std::invalid_argument("MlpModel: zero layer width");
  }
}

}  // namespace

MlpModel MlpModel::zeros(const std::vector<std::size_t>& sizes) {
  check_sizes(sizes);
  MlpModel m;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    m.weights.emplace_back(sizes[l + 1], sizes[l]);
    m.biases.emplace_back(sizes[l + 1], 0.0);
  }
  return m;
}

MlpModel MlpModel::glorot(const std::vector<std::size_t>& sizes, Rng& rng) {
  MlpModel m = MlpModel::zeros(sizes);
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    Rng r = rng.split(l);
    m.weights[l] = Matrix::glorot(sizes[l + 1], sizes[l], r);
  }
  return m;
}

ParamLayoutPtr layout_of(const MlpModel& model) {
  std::vector<TensorSpec> specs;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    std::string tag = "layer" + std::to_string(l);
    specs.push_back({tag + ".weight", model.weights[l].rows(), model.weights[l].cols()});
    specs.push_back({tag + ".bias", model.biases[l].size(), 1});
  }
  return std::make_shared<const ParamLayout>(std::move(specs));
}

ParamVector flatten(const MlpModel& model, ParamLayoutPtr layout) {
  if (!layout) layout = layout_of(model);
  ParamVector out(layout);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    std::string tag = "layer" + std::to_string(l);
    store_tensor(out, tag + ".weight", model.weights[l]);
    store_tensor(out, tag + ".bias", model.biases[l]);
  }
  return out;
}

void load(MlpModel& model, const ParamVector& params) {
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    std::string tag = "layer" + std::to_string(l);
    fetch_tensor(params, tag + ".weight", model.weights[l]);
    fetch_tensor(params, tag + ".bias", model.biases[l]);
  }
}

Vector forward(const MlpModel& model, const Vector& x) {
  Vector h = x;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    Vector pre = add(matvec(model.weights[l], h), model.biases[l]);
    h = (l + 1 < model.layer_count()) ? relu(pre) : std::move(pre);
  }
  return h;
}

double sample_gradient(const MlpModel& model, const Vector& x, int label, MlpModel& grad) {
  const std::size_t layers = model.layer_count();
  std::vector<Vector> acts(layers + 1);
  acts[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    Vector pre = add(matvec(model.weights[l], acts[l]), model.biases[l]);
    acts[l + 1] = (l + 1 < layers) ? relu(pre) : std::move(pre);
  }
  auto ce = softmax_cross_entropy(acts[layers], static_cast<std::size_t>(label));

  Vector d = std::move(ce.dlogits);
  for (std::size_t l = layers; l-- > 0;) {
    add_outer(grad.weights[l], d, acts[l]);
    axpy(1.0, d, grad.biases[l]);
    if (l == 0) break;
    d = matvec_transposed(model.weights[l], d);
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (acts[l][i] <= 0.0) d[i] = 0.0;
    }
  }
  return ce.loss;
}

LossGrad loss_and_gradient(const MlpModel& model, const std::vector<Vector>& xs,
                           const std::vector<int>& labels) {
  if (xs.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
  if (xs.size() != labels.size()) {
    throw std::invalid_argument("loss_and_gradient: " + std::to_string(xs.size()) +
                                " samples but " + std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> sizes;
  sizes.push_back(model.input_dim());
  for (const auto& w : model.weights) sizes.push_back(w.rows());
  MlpModel acc = MlpModel::zeros(sizes);

  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    loss += sample_gradient(model, xs[i], labels[i], acc);
  }
  const double scale = 1.0 / static_cast<double>(xs.size());
  LossGrad out;
  out.loss = loss * scale;
  out.grad = flatten(acc, layout_of(model));
  for (auto& v : out.grad.values()) v *= scale;
  return out;
}

}  // namespace fedsim
