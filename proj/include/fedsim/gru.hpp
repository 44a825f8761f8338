#pragma once

#include <vector>

#include "fedsim/linalg.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

/// Gated recurrent cell with reset and update gates and no bias terms:
///   r_k = sigmoid(W_r x_k + U_r h_{k-1})
///   z_k = sigmoid(W_z x_k + U_z h_{k-1})
///   c_k = tanh(W x_k + U (r_k . h_{k-1}))
///   h_k = z_k . h_{k-1} + (1 - z_k) . c_k
/// Also doubles as its own gradient container (same six tensors).
struct GruCell {
  Matrix reset_input;       // W_r, hidden x input
  Matrix reset_recurrent;   // U_r, hidden x hidden
  Matrix update_input;      // W_z
  Matrix update_recurrent;  // U_z
  Matrix cand_input;        // W
  Matrix cand_recurrent;    // U

  std::size_t input_dim() const { return reset_input.cols(); }
  std::size_t hidden_dim() const { return reset_input.rows(); }

  static GruCell zeros(std::size_t input_dim, std::size_t hidden_dim);
  static GruCell glorot(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
};

/// Intermediates needed to backpropagate through one step.
struct GruStepCache {
  Vector x;
  Vector h_prev;
  Vector reset;
  Vector update;
  Vector candidate;
};

/// One recurrence step; fills `cache` when given.
Vector gru_step(const GruCell& cell, const Vector& x, const Vector& h_prev,
                GruStepCache* cache = nullptr);

/// dL/dh flows in, gradients accumulate into `grad`; returns dL/dh_prev.
Vector gru_step_backward(const GruCell& cell, const GruStepCache& cache, const Vector& dh,
                         GruCell& grad);

/// Folds gru_step over a non-empty sequence from h_0 = 0 and returns the
/// final hidden state, the compact encoding of the whole sequence.
Vector encode_view(const GruCell& cell, const std::vector<Vector>& seq,
                   std::vector<GruStepCache>* caches = nullptr);

/// Backprop-through-time over a cached encode_view run.
void encode_view_backward(const GruCell& cell, const std::vector<GruStepCache>& caches,
                          const Vector& dh_final, GruCell& grad);

}  // namespace fedsim
