#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fedsim/rng.hpp"

namespace fedsim {

using Vector = std::vector<double>;

/// Dense row-major matrix of 64-bit reals. Row-major layout is part of the
/// contract: flattened parameters are bit-comparable across runs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vector& values() { return data_; }
  const Vector& values() const { return data_; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

enum class ElementwiseOp { Sigmoid, Tanh, Relu, Mul, Add, Sub };

ElementwiseOp elementwise_op_from_name(const std::string& name);

/// m * v. Throws with a shape report on dimension mismatch.
Vector matvec(const Matrix& m, const Vector& v);

/// m^T * v (used by backward passes; avoids materializing transposes).
Vector matvec_transposed(const Matrix& m, const Vector& v);

/// acc += a * b^T.
void add_outer(Matrix& acc, const Vector& a, const Vector& b);

Vector elementwise(ElementwiseOp op, const Vector& a);
Vector elementwise(ElementwiseOp op, const Vector& a, const Vector& b);

Vector sigmoid(const Vector& a);
Vector tanh_vec(const Vector& a);
Vector relu(const Vector& a);
Vector mul(const Vector& a, const Vector& b);
Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);

/// y += alpha * x.
void axpy(double alpha, const Vector& x, Vector& y);

double dot(const Vector& a, const Vector& b);
double l2_norm(const Vector& v);

bool all_finite(const Vector& v);

Vector softmax(const Vector& logits);

struct CrossEntropyResult {
  double loss = 0.0;
  Vector dlogits;
};

/// Numerically stable softmax cross-entropy against a class index.
/// loss = -log softmax(logits)[label], dlogits = softmax(logits) - onehot.
CrossEntropyResult softmax_cross_entropy(const Vector& logits, std::size_t label);

}  // namespace fedsim
