#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fedsim/mlp.hpp"
#include "fedsim/multiview.hpp"
#include "fedsim/param_vector.hpp"
#include "fedsim/session.hpp"

namespace fedsim {

// A dataset-bound training objective. Protocols and the harness only see
// flat parameter vectors; the workload owns the samples and the model shape.
class Workload {
 public:
  virtual ~Workload() = default;

  virtual ParamLayoutPtr layout() const = 0;
  virtual ParamVector initial_params(std::uint64_t seed) const = 0;
  virtual std::size_t sample_count() const = 0;
  virtual std::size_t class_count() const = 0;
  virtual int label_of(std::size_t index) const = 0;

  // Mean loss and gradient over the indexed samples.
  virtual LossGrad loss_and_gradient(const ParamVector& params,
                                     const std::vector<std::size_t>& indices) const = 0;

  // Class scores per indexed sample; used for evaluation only.
  virtual std::vector<Vector> logits(const ParamVector& params,
                                     const std::vector<std::size_t>& indices) const = 0;
};

class MlpWorkload : public Workload {
 public:
  MlpWorkload(std::vector<std::size_t> layer_sizes, std::vector<Vector> features,
              std::vector<int> labels);

  ParamLayoutPtr layout() const override { return layout_; }
  ParamVector initial_params(std::uint64_t seed) const override;
  std::size_t sample_count() const override { return features_.size(); }
  std::size_t class_count() const override { return sizes_.back(); }
  int label_of(std::size_t index) const override { return labels_.at(index); }
  LossGrad loss_and_gradient(const ParamVector& params,
                             const std::vector<std::size_t>& indices) const override;
  std::vector<Vector> logits(const ParamVector& params,
                             const std::vector<std::size_t>& indices) const override;

 private:
  MlpModel scratch() const { return MlpModel::zeros(sizes_); }

  std::vector<std::size_t> sizes_;
  std::vector<Vector> features_;
  std::vector<int> labels_;
  ParamLayoutPtr layout_;
};

class MultiViewWorkload : public Workload {
 public:
  MultiViewWorkload(MultiViewSpec spec, std::vector<MultiViewSession> sessions);

  ParamLayoutPtr layout() const override { return layout_; }
  ParamVector initial_params(std::uint64_t seed) const override;
  std::size_t sample_count() const override { return sessions_.size(); }
  std::size_t class_count() const override { return spec_.classes; }
  int label_of(std::size_t index) const override { return sessions_.at(index).label; }
  LossGrad loss_and_gradient(const ParamVector& params,
                             const std::vector<std::size_t>& indices) const override;
  std::vector<Vector> logits(const ParamVector& params,
                             const std::vector<std::size_t>& indices) const override;

 private:
  MultiViewSpec spec_;
  std::vector<MultiViewSession> sessions_;
  ParamLayoutPtr layout_;
};

}  // namespace fedsim
