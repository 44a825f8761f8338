#include "fedsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedsim {

namespace {

void require_same_length(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : m.values()) v = rng.uniform_symmetric(r);
  return m;
}

ElementwiseOp elementwise_op_from_name(const std::string& name) {
  if (name == "sigmoid") return ElementwiseOp::Sigmoid;
  if (name == "tanh") return ElementwiseOp::Tanh;
  if (name == "relu") return ElementwiseOp::Relu;
  if (name == "mul") return ElementwiseOp::Mul;
  if (name == "add") return ElementwiseOp::Add;
  if (name == "sub") return ElementwiseOp::Sub;
  throw std::invalid_argument("unknown elementwise op: " + name);
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols() != v.size()) {
    throw std::invalid_argument("matvec: shape mismatch, matrix is " + std::to_string(m.rows()) +
                                "x" + std::to_string(m.cols()) + " but vector has length " +
                                std::to_string(v.size()));
  }
  Vector out(m.rows(), 0.0);
  const double* row = m.values().data();
  for (std::size_t i = 0; i < m.rows(); ++i, row += m.cols()) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
  return out;
}

Vector matvec_transposed(const Matrix& m, const Vector& v) {
  if (m.rows() != v.size()) {
    throw std::invalid_argument("matvec_transposed: shape mismatch, matrix is " +
                                std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                " but vector has length " + std::to_string(v.size()));
  }
  Vector out(m.cols(), 0.0);
  const double* row = m.values().data();
  for (std::size_t i = 0; i < m.rows(); ++i, row += m.cols()) {
    double vi = v[i];
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += row[j] * vi;
  }
  return out;
}

void add_outer(Matrix& acc, const Vector& a, const Vector& b) {
  if (acc.rows() != a.size() || acc.cols() != b.size()) {
    throw std::invalid_argument("add_outer: accumulator is " + std::to_string(acc.rows()) + "x" +
                                std::to_string(acc.cols()) + " but outer product is " +
                                std::to_string(a.size()) + "x" + std::to_string(b.size()));
  }
  double* row = acc.values().data();
  for (std::size_t i = 0; i < a.size(); ++i, row += acc.cols()) {
    double ai = a[i];
    for (std::size_t j = 0; j < b.size(); ++j) row[j] += ai * b[j];
  }
}

Vector sigmoid(const Vector& a) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-a[i]));
  return out;
}

Vector tanh_vec(const Vector& a) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::tanh(a[i]);
  return out;
}

Vector relu(const Vector& a) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
  return out;
}

Vector mul(const Vector& a, const Vector& b) {
  require_same_length(a, b, "mul");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Vector add(const Vector& a, const Vector& b) {
  require_same_length(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector sub(const Vector& a, const Vector& b) {
  require_same_length(a, b, "sub");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector elementwise(ElementwiseOp op, const Vector& a) {
  switch (op) {
    case ElementwiseOp::Sigmoid: return sigmoid(a);
    case ElementwiseOp::Tanh: return tanh_vec(a);
    case ElementwiseOp::Relu: return relu(a);
    default:
      throw std::invalid_argument("elementwise: binary op needs two operands");
  }
}

Vector elementwise(ElementwiseOp op, const Vector& a, const Vector& b) {
  switch (op) {
    case ElementwiseOp::Mul: return mul(a, b);
    case ElementwiseOp::Add: return add(a, b);
    case ElementwiseOp::Sub: return sub(a, b);
    default:
      throw std::invalid_argument("elementwise: unary op takes one operand");
  }
}

void axpy(double alpha, const Vector& x, Vector& y) {
  require_same_length(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(const Vector& a, const Vector& b) {
  require_same_length(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm(const Vector& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

bool all_finite(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Vector softmax(const Vector& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
  double peak = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

CrossEntropyResult softmax_cross_entropy(const Vector& logits, std::size_t label) {
  if (label >= logits.size()) {
    throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                " out of range for " + std::to_string(logits.size()) + " logits");
  }
  double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double x : logits) total += std::exp(x - peak);
  CrossEntropyResult res;
  res.loss = std::log(total) - (logits[label] - peak);
  res.dlogits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    res.dlogits[i] = std::exp(logits[i] - peak) / total;
  }
  res.dlogits[label] -= 1.0;
  return res;
}

}  // namespace fedsim
