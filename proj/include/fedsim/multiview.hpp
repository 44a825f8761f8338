#pragma once

#include <cstddef>
#include <vector>

#include "fedsim/fusion.hpp"
#include "fedsim/gru.hpp"
#include "fedsim/mlp.hpp"
#include "fedsim/param_vector.hpp"
#include "fedsim/session.hpp"

namespace fedsim {

struct MultiViewSpec {
  std::vector<std::size_t> view_dims;
  std::size_t hidden_dim = 0;
  std::size_t classes = 0;
  FusionKind head = FusionKind::Fc;
  std::size_t head_units = 0;  // fc hidden width, or factor count for fm/mvm
};

// One recurrent encoder per view feeding a shared fusion head.
struct MultiViewGruModel {
  std::vector<GruCell> cells;
  FusionHead head;

  std::size_t view_count() const { return cells.size(); }
  std::size_t class_count() const;
  std::vector<std::size_t> hidden_dims() const;
};

MultiViewGruModel make_multiview(const MultiViewSpec& spec, Rng& rng);
MultiViewGruModel make_multiview_zeros(const MultiViewSpec& spec);

ParamLayoutPtr layout_of(const MultiViewGruModel& model);
ParamVector flatten(const MultiViewGruModel& model, ParamLayoutPtr layout = nullptr);
void load(MultiViewGruModel& model, const ParamVector& params);

Vector forward(const MultiViewGruModel& model, const MultiViewSession& session);

// Accumulates one session's gradient contribution into `grad`, returns the
// session's cross-entropy loss.
double sample_gradient(const MultiViewGruModel& model, const MultiViewSession& session,
                       MultiViewGruModel& grad);

// Mean cross-entropy and its gradient over the batch.
LossGrad loss_and_gradient(const MultiViewGruModel& model,
                           const std::vector<MultiViewSession>& batch);

}  // namespace fedsim
