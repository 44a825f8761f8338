#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedsim/linalg.hpp"

namespace fedsim {

/// Shape of one named tensor inside a flat parameter vector. Vectors are
/// stored with cols == 1.
struct TensorSpec {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 1;

  std::size_t size() const { return rows * cols; }
  bool operator==(const TensorSpec&) const = default;
};

/// Ordered mapping from named tensors to segments of a flat vector. The
/// order is fixed at construction, so flatten/unflatten is deterministic
/// and flattened parameters from equal layouts are directly comparable.
class ParamLayout {
 public:
  explicit ParamLayout(std::vector<TensorSpec> specs);

  std::size_t size() const { return total_; }
  std::size_t tensor_count() const { return specs_.size(); }
  const std::vector<TensorSpec>& specs() const { return specs_; }
  const TensorSpec& spec(std::size_t index) const { return specs_.at(index); }
  std::size_t offset(std::size_t index) const { return offsets_.at(index); }
  std::size_t index_of(const std::string& name) const;

  bool operator==(const ParamLayout& other) const { return specs_ == other.specs_; }

 private:
  std::vector<TensorSpec> specs_;
  std::vector<std::size_t> offsets_;
  std::size_t total_ = 0;
};

using ParamLayoutPtr = std::shared_ptr<const ParamLayout>;

/// Flat ordered collection of all trainable weights of a model, tagged with
/// its layout. All federation protocols move these around.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(ParamLayoutPtr layout);
  ParamVector(ParamLayoutPtr layout, Vector values);

  const ParamLayoutPtr& layout() const { return layout_; }
  std::size_t size() const { return values_.size(); }
  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> segment(std::size_t tensor_index);
  std::span<const double> segment(std::size_t tensor_index) const;

  /// Throws std::invalid_argument unless `other` has an equal layout.
  void require_same_layout(const ParamVector& other, const char* what) const;

  void fill(double value) { std::fill(values_.begin(), values_.end(), value); }

  bool operator==(const ParamVector& other) const;

 private:
  ParamLayoutPtr layout_;
  Vector values_;
};

/// Copy a tensor into or out of its named segment; the layout spec must
/// match the tensor's shape exactly.
void store_tensor(ParamVector& params, const std::string& name, const Matrix& m);
void store_tensor(ParamVector& params, const std::string& name, const Vector& v);
void fetch_tensor(const ParamVector& params, const std::string& name, Matrix& m);
void fetch_tensor(const ParamVector& params, const std::string& name, Vector& v);

/// params - eta * grad, layouts must match.
ParamVector sgd_apply(const ParamVector& params, const ParamVector& grad, double eta);

/// y += alpha * x, layouts must match.
void axpy_params(double alpha, const ParamVector& x, ParamVector& y);

/// Structured-text checkpoint: layout descriptor plus flat values at full
/// precision. Round-trips bit-exactly.
void save_checkpoint(const ParamVector& params, const std::filesystem::path& file);
ParamVector load_checkpoint(const std::filesystem::path& file);

}  // namespace fedsim
