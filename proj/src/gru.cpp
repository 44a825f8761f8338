#include "fedsim/gru.hpp"

#include <stdexcept>

namespace fedsim {

GruCell GruCell::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  GruCell c;
  c.reset_input = Matrix(hidden_dim, input_dim);
  c.reset_recurrent = Matrix(hidden_dim, hidden_dim);
  c.update_input = Matrix(hidden_dim, input_dim);
  c.update_recurrent = Matrix(hidden_dim, hidden_dim);
  c.cand_input = Matrix(hidden_dim, input_dim);
  c.cand_recurrent = Matrix(hidden_dim, hidden_dim);
  return c;
}

GruCell GruCell::glorot(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  GruCell c;
  Rng r0 = rng.split(0), r1 = rng.split(1), r2 = rng.split(2);
  Rng r3 = rng.split(3), r4 = rng.split(4), r5 = rng.split(5);
  c.reset_input = Matrix::glorot(hidden_dim, input_dim, r0);
  c.reset_recurrent = Matrix::glorot(hidden_dim, hidden_dim, r1);
  c.update_input = Matrix::glorot(hidden_dim, input_dim, r2);
  c.update_recurrent = Matrix::glorot(hidden_dim, hidden_dim, r3);
  c.cand_input = Matrix::glorot(hidden_dim, input_dim, r4);
  c.cand_recurrent = Matrix::glorot(hidden_dim, hidden_dim, r5);
  return c;
}

Vector gru_step(const GruCell& cell, const Vector& x, const Vector& h_prev, GruStepCache* cache) {
  if (x.size() != cell.input_dim() || h_prev.size() != cell.hidden_dim()) {
    throw std::invalid_argument("gru_step: expected input " + std::to_string(cell.input_dim()) +
                                " and hidden " + std::to_string(cell.hidden_dim()) + ", got " +
                                std::to_string(x.size()) + " and " + std::to_string(h_prev.size()));
  }
  Vector reset = sigmoid(add(matvec(cell.reset_input, x), matvec(cell.reset_recurrent, h_prev)));
  Vector update = sigmoid(add(matvec(cell.update_input, x), matvec(cell.update_recurrent, h_prev)));
  Vector candidate =
      tanh_vec(add(matvec(cell.cand_input, x), matvec(cell.cand_recurrent, mul(reset, h_prev))));
  Vector h(cell.hidden_dim());
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = update[i] * h_prev[i] + (1.0 - update[i]) * candidate[i];
  }
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->reset = std::move(reset);
    cache->update = std::move(update);
    cache->candidate = std::move(candidate);
  }
  return h;
}

Vector gru_step_backward(const GruCell& cell, const GruStepCache& cache, const Vector& dh,
                         GruCell& grad) {
  const std::size_t n = cell.hidden_dim();
  Vector dh_prev(n, 0.0);
  Vector dcand(n), dupdate_pre(n);

  // h = z . h_prev + (1-z) . c
  for (std::size_t i = 0; i < n; ++i) {
    double z = cache.update[i];
    double dz = dh[i] * (cache.h_prev[i] - cache.candidate[i]);
    dupdate_pre[i] = dz * z * (1.0 - z);
    dcand[i] = dh[i] * (1.0 - z);
    dh_prev[i] += dh[i] * z;
  }

  // c = tanh(W x + U (r . h_prev))
  Vector dcand_pre(n);
  for (std::size_t i = 0; i < n; ++i) {
    dcand_pre[i] = dcand[i] * (1.0 - cache.candidate[i] * cache.candidate[i]);
  }
  Vector gated_prev = mul(cache.reset, cache.h_prev);
  add_outer(grad.cand_input, dcand_pre, cache.x);
  add_outer(grad.cand_recurrent, dcand_pre, gated_prev);
  Vector dgated = matvec_transposed(cell.cand_recurrent, dcand_pre);
  Vector dreset_pre(n);
  for (std::size_t i = 0; i < n; ++i) {
    double r = cache.reset[i];
    dh_prev[i] += dgated[i] * r;
    dreset_pre[i] = dgated[i] * cache.h_prev[i] * r * (1.0 - r);
  }

  // gate pre-activations
  add_outer(grad.update_input, dupdate_pre, cache.x);
  add_outer(grad.update_recurrent, dupdate_pre, cache.h_prev);
  axpy(1.0, matvec_transposed(cell.update_recurrent, dupdate_pre), dh_prev);
  add_outer(grad.reset_input, dreset_pre, cache.x);
  add_outer(grad.reset_recurrent, dreset_pre, cache.h_prev);
  axpy(1.0, matvec_transposed(cell.reset_recurrent, dreset_pre), dh_prev);

  return dh_prev;
}

Vector encode_view(const GruCell& cell, const std::vector<Vector>& seq,
                   std::vector<GruStepCache>* caches) {
  if (seq.empty()) throw std::invalid_argument("encode_view: empty sequence");
  Vector h(cell.hidden_dim(), 0.0);
  if (caches) {
    caches->clear();
    caches->resize(seq.size());
  }
  for (std::size_t k = 0; k < seq.size(); ++k) {
    h = gru_step(cell, seq[k], h, caches ? &(*caches)[k] : nullptr);
  }
  return h;
}

void encode_view_backward(const GruCell& cell, const std::vector<GruStepCache>& caches,
                          const Vector& dh_final, GruCell& grad) {
  Vector dh = dh_final;
  for (std::size_t k = caches.size(); k-- > 0;) {
    dh = gru_step_backward(cell, caches[k], dh, grad);
  }
}

}  // namespace fedsim
