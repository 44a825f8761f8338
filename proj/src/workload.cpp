#include "fedsim/workload.hpp"

#include <stdexcept>
#include <string>

namespace fedsim {

namespace {

void check_indices(std::size_t count, const std::vector<std::size_t>& indices, const char* what) {
  if (indices.empty()) throw std::invalid_argument(std::string(what) + ": empty index set");
  for (std::size_t i : indices) {
    if (i >= count) {
      throw std::out_of_range(std::string(what) + ": index " + std::to_string(i) +
                              " out of range for " + std::to_string(count) + " samples");
    }
  }
}

}  // namespace

MlpWorkload::MlpWorkload(std::vector<std::size_t> layer_sizes, std::vector<Vector> features,
                         std::vector<int> labels)
    : sizes_(std::move(layer_sizes)), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.size() != labels_.size()) {
    throw std::invalid_argument("MlpWorkload: feature and label counts differ");
  }
  for (const Vector& f : features_) {
    if (f.size() != sizes_.front()) {
      throw std::invalid_argument("MlpWorkload: feature dim " + std::to_string(f.size()) +
                                  " does not match input layer " + std::to_string(sizes_.front()));
    }
  }
  for (int y : labels_) {
    if (y < 0 || static_cast<std::size_t>(y) >= sizes_.back()) {
      throw std::invalid_argument("MlpWorkload: label " + std::to_string(y) +
                                  " outside class count " + std::to_string(sizes_.back()));
    }
  }
  layout_ = layout_of(scratch());
}

ParamVector MlpWorkload::initial_params(std::uint64_t seed) const {
  Rng rng(seed);
  return flatten(MlpModel::glorot(sizes_, rng), layout_);
}

LossGrad MlpWorkload::loss_and_gradient(const ParamVector& params,
                                        const std::vector<std::size_t>& indices) const {
  check_indices(features_.size(), indices, "MlpWorkload::loss_and_gradient");
  MlpModel model = scratch();
  load(model, params);
  MlpModel acc = scratch();
  double loss = 0.0;
  for (std::size_t i : indices) {
    loss += sample_gradient(model, features_[i], labels_[i], acc);
  }
  const double scale = 1.0 / static_cast<double>(indices.size());
  LossGrad out;
  out.loss = loss * scale;
  out.grad = flatten(acc, layout_);
  for (auto& v : out.grad.values()) v *= scale;
  return out;
}

std::vector<Vector> MlpWorkload::logits(const ParamVector& params,
                                        const std::vector<std::size_t>& indices) const {
  check_indices(features_.size(), indices, "MlpWorkload::logits");
  MlpModel model = scratch();
  load(model, params);
  std::vector<Vector> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(forward(model, features_[i]));
  return out;
}

MultiViewWorkload::MultiViewWorkload(MultiViewSpec spec, std::vector<MultiViewSession> sessions)
    : spec_(std::move(spec)), sessions_(std::move(sessions)) {
  for (const MultiViewSession& s : sessions_) {
    if (s.views.size() != spec_.view_dims.size()) {
      throw std::invalid_argument("MultiViewWorkload: session view count mismatch");
    }
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= spec_.classes) {
      throw std::invalid_argument("MultiViewWorkload: label " + std::to_string(s.label) +
                                  " outside class count " + std::to_string(spec_.classes));
    }
  }
  layout_ = layout_of(make_multiview_zeros(spec_));
}

ParamVector MultiViewWorkload::initial_params(std::uint64_t seed) const {
  Rng rng(seed);
  return flatten(make_multiview(spec_, rng), layout_);
}

LossGrad MultiViewWorkload::loss_and_gradient(const ParamVector& params,
                                              const std::vector<std::size_t>& indices) const {
  check_indices(sessions_.size(), indices, "MultiViewWorkload::loss_and_gradient");
  MultiViewGruModel model = make_multiview_zeros(spec_);
  load(model, params);
  MultiViewGruModel acc = make_multiview_zeros(spec_);
  double loss = 0.0;
  for (std::size_t i : indices) {
    loss += sample_gradient(model, sessions_[i], acc);
  }
  const double scale = 1.0 / static_cast<double>(indices.size());
  LossGrad out;
  out.loss = loss * scale;
  out.grad = flatten(acc, layout_);
  for (auto& v : out.grad.values()) v *= scale;
  return out;
}

std::vector<Vector> MultiViewWorkload::logits(const ParamVector& params,
                                              const std::vector<std::size_t>& indices) const {
  check_indices(sessions_.size(), indices, "MultiViewWorkload::logits");
  MultiViewGruModel model = make_multiview_zeros(spec_);
  load(model, params);
  std::vector<Vector> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(forward(model, sessions_[i]));
  return out;
}

}  // namespace fedsim
