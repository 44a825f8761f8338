#include "fedsim/multiview.hpp"

#include <stdexcept>
#include <string>

namespace fedsim {

namespace {

struct ZerosLike {
  FusionHead operator()(const FcHead& h) const {
    return FcHead::zeros(h.hidden.cols() - 1, h.hidden.rows(), h.output.rows());
  }
  FusionHead operator()(const FmHead& h) const {
    return FmHead::zeros(h.factors.front().cols(), h.factors.front().rows(), h.class_count());
  }
  FusionHead operator()(const MvmHead& h) const {
    std::vector<std::size_t> dims;
    for (const Matrix& m : h.factors.front()) dims.push_back(m.cols() - 1);
    return MvmHead::zeros(dims, h.factors.front().front().rows(), h.class_count());
  }
};

void check_spec(const MultiViewSpec& spec) {
  if (spec.view_dims.empty() || spec.hidden_dim == 0 || spec.classes == 0 ||
      spec.head_units == 0) {
    throw std::invalid_argument("MultiViewSpec: views, hidden_dim, classes, head_units must be positive");
  }
}

std::string view_tag(std::size_t p) { return "view" + std::to_string(p); }
std::string class_tag(std::size_t a) { return "head.class" + std::to_string(a); }

void check_views(const MultiViewGruModel& model, const MultiViewSession& session) {
  if (session.views.size() != model.view_count()) {
    throw std::invalid_argument("session has " + std::to_string(session.views.size()) +
                                " views, model expects " + std::to_string(model.view_count()));
  }
}

}  // namespace

std::size_t MultiViewGruModel::class_count() const {
  return std::visit([](const auto& h) { return h.class_count(); }, head);
}

std::vector<std::size_t> MultiViewGruModel::hidden_dims() const {
  std::vector<std::size_t> dims;
  for (const GruCell& c : cells) dims.push_back(c.hidden_dim());
  return dims;
}

MultiViewGruModel make_multiview(const MultiViewSpec& spec, Rng& rng) {
  check_spec(spec);
  MultiViewGruModel m;
  for (std::size_t p = 0; p < spec.view_dims.size(); ++p) {
    Rng r = rng.split(p);
    m.cells.push_back(GruCell::glorot(spec.view_dims[p], spec.hidden_dim, r));
  }
  Rng rh = rng.split(spec.view_dims.size());
  const std::size_t concat = spec.view_dims.size() * spec.hidden_dim;
  switch (spec.head) {
    case FusionKind::Fc:
      m.head = FcHead::glorot(concat, spec.head_units, spec.classes, rh);
      break;
    case FusionKind::Fm:
      m.head = FmHead::glorot(concat, spec.head_units, spec.classes, rh);
      break;
    case FusionKind::Mvm:
      m.head = MvmHead::glorot(std::vector<std::size_t>(spec.view_dims.size(), spec.hidden_dim),
                               spec.head_units, spec.classes, rh);
      break;
  }
  return m;
}

MultiViewGruModel make_multiview_zeros(const MultiViewSpec& spec) {
  check_spec(spec);
  MultiViewGruModel m;
  for (std::size_t dim : spec.view_dims) m.cells.push_back(GruCell::zeros(dim, spec.hidden_dim));
  const std::size_t concat = spec.view_dims.size() * spec.hidden_dim;
  switch (spec.head) {
    case FusionKind::Fc:
      m.head = FcHead::zeros(concat, spec.head_units, spec.classes);
      break;
    case FusionKind::Fm:
      m.head = FmHead::zeros(concat, spec.head_units, spec.classes);
      break;
    case FusionKind::Mvm:
      m.head = MvmHead::zeros(std::vector<std::size_t>(spec.view_dims.size(), spec.hidden_dim),
                              spec.head_units, spec.classes);
      break;
  }
  return m;
}

ParamLayoutPtr layout_of(const MultiViewGruModel& model) {
  std::vector<TensorSpec> specs;
  auto push = [&specs](const std::string& name, const Matrix& m) {
    specs.push_back({name, m.rows(), m.cols()});
  };
  for (std::size_t p = 0; p < model.cells.size(); ++p) {
    const GruCell& c = model.cells[p];
    const std::string tag = view_tag(p);
    push(tag + ".reset_input", c.reset_input);
    push(tag + ".reset_recurrent", c.reset_recurrent);
    push(tag + ".update_input", c.update_input);
    push(tag + ".update_recurrent", c.update_recurrent);
    push(tag + ".cand_input", c.cand_input);
    push(tag + ".cand_recurrent", c.cand_recurrent);
  }
  std::visit(
      [&](const auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, FcHead>) {
          push("head.hidden", h.hidden);
          push("head.output", h.output);
        } else if constexpr (std::is_same_v<T, FmHead>) {
          for (std::size_t a = 0; a < h.class_count(); ++a) {
            push(class_tag(a) + ".factors", h.factors[a]);
            specs.push_back({class_tag(a) + ".linear", h.linear[a].size(), 1});
          }
        } else {
          for (std::size_t a = 0; a < h.class_count(); ++a) {
            for (std::size_t p = 0; p < h.factors[a].size(); ++p) {
              push(class_tag(a) + "." + view_tag(p), h.factors[a][p]);
            }
          }
        }
      },
      model.head);
  return std::make_shared<const ParamLayout>(std::move(specs));
}

ParamVector flatten(const MultiViewGruModel& model, ParamLayoutPtr layout) {
  if (!layout) layout = layout_of(model);
  ParamVector out(layout);
  for (std::size_t p = 0; p < model.cells.size(); ++p) {
    const GruCell& c = model.cells[p];
    const std::string tag = view_tag(p);
    store_tensor(out, tag + ".reset_input", c.reset_input);
    store_tensor(out, tag + ".reset_recurrent", c.reset_recurrent);
    store_tensor(out, tag + ".update_input", c.update_input);
    store_tensor(out, tag + ".update_recurrent", c.update_recurrent);
    store_tensor(out, tag + ".cand_input", c.cand_input);
    store_tensor(out, tag + ".cand_recurrent", c.cand_recurrent);
  }
  std::visit(
      [&](const auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, FcHead>) {
          store_tensor(out, "head.hidden", h.hidden);
          store_tensor(out, "head.output", h.output);
        } else if constexpr (std::is_same_v<T, FmHead>) {
          for (std::size_t a = 0; a < h.class_count(); ++a) {
            store_tensor(out, class_tag(a) + ".factors", h.factors[a]);
            store_tensor(out, class_tag(a) + ".linear", h.linear[a]);
          }
        } else {
          for (std::size_t a = 0; a < h.class_count(); ++a) {
            for (std::size_t p = 0; p < h.factors[a].size(); ++p) {
              store_tensor(out, class_tag(a) + "." + view_tag(p), h.factors[a][p]);
            }
          }
        }
      },
      model.head);
  return out;
}

void load(MultiViewGruModel& model, const ParamVector& params) {
  for (std::size_t p = 0; p < model.cells.size(); ++p) {
    GruCell& c = model.cells[p];
    const std::string tag = view_tag(p);
    fetch_tensor(params, tag + ".reset_input", c.reset_input);
    fetch_tensor(params, tag + ".reset_recurrent", c.reset_recurrent);
    fetch_tensor(params, tag + ".update_input", c.update_input);
    fetch_tensor(params, tag + ".update_recurrent", c.update_recurrent);
    fetch_tensor(params, tag + ".cand_input", c.cand_input);
    fetch_tensor(params, tag + ".cand_recurrent", c.cand_recurrent);
  }
  std::visit(
      [&](auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, FcHead>) {
          fetch_tensor(params, "head.hidden", h.hidden);
          fetch_tensor(params, "head.output", h.output);
        } else if constexpr (std::is_same_v<T, FmHead>) {
          for (std::size_t a = 0; a < h.class_count(); ++a) {
            fetch_tensor(params, class_tag(a) + ".factors", h.factors[a]);
            fetch_tensor(params, class_tag(a) + ".linear", h.linear[a]);
          }
        } else {
          for (std::size_t a = 0; a < h.class_count(); ++a) {
            for (std::size_t p = 0; p < h.factors[a].size(); ++p) {
              fetch_tensor(params, class_tag(a) + "." + view_tag(p), h.factors[a][p]);
            }
          }
        }
      },
      model.head);
}

Vector forward(const MultiViewGruModel& model, const MultiViewSession& session) {
  check_views(model, session);
  std::vector<Vector> h_views(model.view_count());
  for (std::size_t p = 0; p < model.view_count(); ++p) {
    h_views[p] = encode_view(model.cells[p], session.views[p]);
  }
  return std::visit(
      [&](const auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, FcHead>) return fuse_fc(h, h_views);
        else if constexpr (std::is_same_v<T, FmHead>) return fuse_fm(h, h_views);
        else return fuse_mvm(h, h_views);
      },
      model.head);
}

double sample_gradient(const MultiViewGruModel& model, const MultiViewSession& session,
                       MultiViewGruModel& grad) {
  check_views(model, session);
  const std::size_t m = model.view_count();
  std::vector<std::vector<GruStepCache>> caches(m);
  std::vector<Vector> h_views(m);
  for (std::size_t p = 0; p < m; ++p) {
    h_views[p] = encode_view(model.cells[p], session.views[p], &caches[p]);
  }
  const std::vector<std::size_t> dims = model.hidden_dims();

  Vector logits;
  FcCache fc_cache;
  FmCache fm_cache;
  MvmCache mvm_cache;
  switch (fusion_kind(model.head)) {
    case FusionKind::Fc:
      logits = fuse_fc(std::get<FcHead>(model.head), h_views, &fc_cache);
      break;
    case FusionKind::Fm:
      logits = fuse_fm(std::get<FmHead>(model.head), h_views, &fm_cache);
      break;
    case FusionKind::Mvm:
      logits = fuse_mvm(std::get<MvmHead>(model.head), h_views, &mvm_cache);
      break;
  }
  auto ce = softmax_cross_entropy(logits, static_cast<std::size_t>(session.label));

  std::vector<Vector> dh_views;
  switch (fusion_kind(model.head)) {
    case FusionKind::Fc:
      dh_views = fuse_fc_backward(std::get<FcHead>(model.head), fc_cache, ce.dlogits,
                                  std::get<FcHead>(grad.head), dims);
      break;
    case FusionKind::Fm:
      dh_views = fuse_fm_backward(std::get<FmHead>(model.head), fm_cache, ce.dlogits,
                                  std::get<FmHead>(grad.head), dims);
      break;
    case FusionKind::Mvm:
      dh_views = fuse_mvm_backward(std::get<MvmHead>(model.head), mvm_cache, ce.dlogits,
                                   std::get<MvmHead>(grad.head));
      break;
  }
  for (std::size_t p = 0; p < m; ++p) {
    encode_view_backward(model.cells[p], caches[p], dh_views[p], grad.cells[p]);
  }
  return ce.loss;
}

LossGrad loss_and_gradient(const MultiViewGruModel& model,
                           const std::vector<MultiViewSession>& batch) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
  MultiViewGruModel acc;
  for (const GruCell& c : model.cells) acc.cells.push_back(GruCell::zeros(c.input_dim(), c.hidden_dim()));
  acc.head = std::visit(ZerosLike{}, model.head);

  double loss = 0.0;
  for (const MultiViewSession& s : batch) loss += sample_gradient(model, s, acc);

  const double scale = 1.0 / static_cast<double>(batch.size());
  LossGrad out;
  out.loss = loss * scale;
  out.grad = flatten(acc, layout_of(model));
  for (auto& v : out.grad.values()) v *= scale;
  return out;
}

}  // namespace fedsim
