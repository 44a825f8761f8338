#include "fedsim/fusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fedsim {

namespace {

Vector concat_views(const std::vector<Vector>& views) {
  std::size_t total = 0;
  for (const auto& v : views) total += v.size();
  Vector out;
  out.reserve(total);
  for (const auto& v : views) out.insert(out.end(), v.begin(), v.end());
  return out;
}

Vector append_bias(const Vector& v) {
  Vector out = v;
  out.push_back(1.0);
  return out;
}

std::vector<Vector> split_by_dims(const Vector& flat, const std::vector<std::size_t>& dims) {
  std::vector<Vector> parts;
  parts.reserve(dims.size());
  std::size_t at = 0;
  for (std::size_t d : dims) {
    if (at + d > flat.size()) {
      throw std::invalid_argument("split_by_dims: dims exceed vector of length " +
                                  std::to_string(flat.size()));
    }
    parts.emplace_back(flat.begin() + at, flat.begin() + at + d);
    at += d;
  }
  if (at != flat.size()) {
    throw std::invalid_argument("split_by_dims: dims cover " + std::to_string(at) +
                                " of " + std::to_string(flat.size()) + " entries");
  }
  return parts;
}

void check_nonempty_views(const std::vector<Vector>& h_views, const char* who) {
  if (h_views.empty()) throw std::invalid_argument(std::string(who) + ": no views");
}

}  // namespace

FcHead FcHead::zeros(std::size_t concat_dim, std::size_t hidden_units, std::size_t classes) {
  FcHead h;
  h.hidden = Matrix(hidden_units, concat_dim + 1);
  h.output = Matrix(classes, hidden_units);
  return h;
}

FcHead FcHead::glorot(std::size_t concat_dim, std::size_t hidden_units, std::size_t classes,
                      Rng& rng) {
  FcHead h;
  Rng r0 = rng.split(0), r1 = rng.split(1);
  h.hidden = Matrix::glorot(hidden_units, concat_dim + 1, r0);
  h.output = Matrix::glorot(classes, hidden_units, r1);
  return h;
}

FmHead FmHead::zeros(std::size_t concat_dim, std::size_t factor_dim, std::size_t classes) {
  FmHead h;
  h.factors.assign(classes, Matrix(factor_dim, concat_dim));
  h.linear.assign(classes, Vector(concat_dim + 1, 0.0));
  return h;
}

FmHead FmHead::glorot(std::size_t concat_dim, std::size_t factor_dim, std::size_t classes,
                      Rng& rng) {
  FmHead h = FmHead::zeros(concat_dim, factor_dim, classes);
  for (std::size_t a = 0; a < classes; ++a) {
    Rng rf = rng.split(2 * a);
    Rng rl = rng.split(2 * a + 1);
    h.factors[a] = Matrix::glorot(factor_dim, concat_dim, rf);
    double r = std::sqrt(6.0 / (1.0 + static_cast<double>(concat_dim + 1)));
    for (auto& w : h.linear[a]) w = rl.uniform_symmetric(r);
  }
  return h;
}

MvmHead MvmHead::zeros(const std::vector<std::size_t>& view_dims, std::size_t factor_dim,
                       std::size_t classes) {
  MvmHead h;
  h.factors.assign(classes, {});
  for (std::size_t a = 0; a < classes; ++a) {
    for (std::size_t d : view_dims) h.factors[a].emplace_back(factor_dim, d + 1);
  }
  return h;
}

MvmHead MvmHead::glorot(const std::vector<std::size_t>& view_dims, std::size_t factor_dim,
                        std::size_t classes, Rng& rng) {
  MvmHead h = MvmHead::zeros(view_dims, factor_dim, classes);
  for (std::size_t a = 0; a < classes; ++a) {
    for (std::size_t p = 0; p < view_dims.size(); ++p) {
      Rng r = rng.split(a * view_dims.size() + p);
      h.factors[a][p] = Matrix::glorot(factor_dim, view_dims[p] + 1, r);
    }
  }
  return h;
}

Vector fuse_fc(const FcHead& head, const std::vector<Vector>& h_views, FcCache* cache) {
  check_nonempty_views(h_views, "fuse_fc");
  Vector input = append_bias(concat_views(h_views));
  if (input.size() != head.hidden.cols()) {
    throw std::invalid_argument("fuse_fc: head expects input " +
                                std::to_string(head.hidden.cols()) + " incl bias, got " +
                                std::to_string(input.size()));
  }
  Vector act = relu(matvec(head.hidden, input));
  Vector logits = matvec(head.output, act);
  if (cache) {
    cache->input = std::move(input);
    cache->hidden_act = std::move(act);
  }
  return logits;
}

std::vector<Vector> fuse_fc_backward(const FcHead& head, const FcCache& cache,
                                     const Vector& dlogits, FcHead& grad,
                                     const std::vector<std::size_t>& view_dims) {
  add_outer(grad.output, dlogits, cache.hidden_act);
  Vector dact = matvec_transposed(head.output, dlogits);
  for (std::size_t i = 0; i < dact.size(); ++i) {
    if (cache.hidden_act[i] <= 0.0) dact[i] = 0.0;
  }
  add_outer(grad.hidden, dact, cache.input);
  Vector dinput = matvec_transposed(head.hidden, dact);
  dinput.pop_back();  // bias channel is constant
  return split_by_dims(dinput, view_dims);
}

Vector fuse_fm(const FmHead& head, const std::vector<Vector>& h_views, FmCache* cache) {
  check_nonempty_views(h_views, "fuse_fm");
  Vector input = concat_views(h_views);
  const std::size_t classes = head.class_count();
  if (head.linear.size() != classes) {
    throw std::invalid_argument("fuse_fm: factor and linear class counts differ");
  }
  Vector logits(classes, 0.0);
  std::vector<Vector> proj(classes);
  for (std::size_t a = 0; a < classes; ++a) {
    if (head.factors[a].cols() != input.size() || head.linear[a].size() != input.size() + 1) {
      throw std::invalid_argument("fuse_fm: class " + std::to_string(a) +
                                  " expects input " + std::to_string(head.factors[a].cols()) +
                                  ", got " + std::to_string(input.size()));
    }
    proj[a] = matvec(head.factors[a], input);
    double score = head.linear[a].back();
    for (std::size_t i = 0; i < input.size(); ++i) score += head.linear[a][i] * input[i];
    for (double q : proj[a]) score += q * q;
    logits[a] = score;
  }
  if (cache) {
    cache->input = std::move(input);
    cache->factor_proj = std::move(proj);
  }
  return logits;
}

std::vector<Vector> fuse_fm_backward(const FmHead& head, const FmCache& cache,
                                     const Vector& dlogits, FmHead& grad,
                                     const std::vector<std::size_t>& view_dims) {
  const std::size_t d = cache.input.size();
  Vector dinput(d, 0.0);
  for (std::size_t a = 0; a < head.class_count(); ++a) {
    double g = dlogits[a];
    if (g == 0.0) continue;
    Vector dproj = cache.factor_proj[a];
    for (auto& v : dproj) v *= 2.0 * g;
    add_outer(grad.factors[a], dproj, cache.input);
    axpy(1.0, matvec_transposed(head.factors[a], dproj), dinput);
    for (std::size_t i = 0; i < d; ++i) {
      grad.linear[a][i] += g * cache.input[i];
      dinput[i] += g * head.linear[a][i];
    }
    grad.linear[a][d] += g;
  }
  return split_by_dims(dinput, view_dims);
}

Vector fuse_mvm(const MvmHead& head, const std::vector<Vector>& h_views, MvmCache* cache) {
  check_nonempty_views(h_views, "fuse_mvm");
  const std::size_t classes = head.class_count();
  const std::size_t m = h_views.size();
  if (head.view_count() != m) {
    throw std::invalid_argument("fuse_mvm: head has " + std::to_string(head.view_count()) +
                                " views, got " + std::to_string(m));
  }
  std::vector<Vector> inputs(m);
  for (std::size_t p = 0; p < m; ++p) inputs[p] = append_bias(h_views[p]);

  Vector logits(classes, 0.0);
  std::vector<std::vector<Vector>> proj(classes);
  for (std::size_t a = 0; a < classes; ++a) {
    proj[a].resize(m);
    for (std::size_t p = 0; p < m; ++p) {
      if (head.factors[a][p].cols() != inputs[p].size()) {
        throw std::invalid_argument("fuse_mvm: class " + std::to_string(a) + " view " +
                                    std::to_string(p) + " expects input " +
                                    std::to_string(head.factors[a][p].cols()) + " incl bias, got " +
                                    std::to_string(inputs[p].size()));
      }
      proj[a][p] = matvec(head.factors[a][p], inputs[p]);
    }
    const std::size_t k = proj[a].front().size();
    double score = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
      double term = 1.0;
      for (std::size_t p = 0; p < m; ++p) term *= proj[a][p][f];
      score += term;
    }
    logits[a] = score;
  }
  if (cache) {
    cache->inputs = std::move(inputs);
    cache->proj = std::move(proj);
  }
  return logits;
}

std::vector<Vector> fuse_mvm_backward(const MvmHead& head, const MvmCache& cache,
                                      const Vector& dlogits, MvmHead& grad) {
  const std::size_t m = cache.inputs.size();
  std::vector<Vector> dinputs(m);
  for (std::size_t p = 0; p < m; ++p) dinputs[p].assign(cache.inputs[p].size(), 0.0);

  for (std::size_t a = 0; a < head.class_count(); ++a) {
    double g = dlogits[a];
    if (g == 0.0) continue;
    const std::size_t k = cache.proj[a].front().size();
    std::vector<Vector> dproj(m, Vector(k, 0.0));
    // Leave-one-out products via prefix/suffix scans; safe when factors are zero.
    Vector prefix(m + 1), suffix(m + 1);
    for (std::size_t f = 0; f < k; ++f) {
      prefix[0] = 1.0;
      for (std::size_t p = 0; p < m; ++p) prefix[p + 1] = prefix[p] * cache.proj[a][p][f];
      suffix[m] = 1.0;
      for (std::size_t p = m; p-- > 0;) suffix[p] = suffix[p + 1] * cache.proj[a][p][f];
      for (std::size_t p = 0; p < m; ++p) dproj[p][f] = g * prefix[p] * suffix[p + 1];
    }
    for (std::size_t p = 0; p < m; ++p) {
      add_outer(grad.factors[a][p], dproj[p], cache.inputs[p]);
      axpy(1.0, matvec_transposed(head.factors[a][p], dproj[p]), dinputs[p]);
    }
  }
  for (auto& v : dinputs) v.pop_back();  // bias channel is constant
  return dinputs;
}

FusionKind fusion_kind(const FusionHead& head) {
  if (std::holds_alternative<FcHead>(head)) return FusionKind::Fc;
  if (std::holds_alternative<FmHead>(head)) return FusionKind::Fm;
  return FusionKind::Mvm;
}

FusionKind fusion_kind_from_name(const std::string& name) {
  if (name == "fc") return FusionKind::Fc;
  if (name == "fm") return FusionKind::Fm;
  if (name == "mvm") return FusionKind::Mvm;
  throw std::invalid_argument("unknown fusion head '" + name + "', expected fc, fm, or mvm");
}

std::string fusion_kind_name(FusionKind kind) {
  switch (kind) {
    case FusionKind::Fc: return "fc";
    case FusionKind::Fm: return "fm";
    case FusionKind::Mvm: return "mvm";
  }
  throw std::logic_error("fusion_kind_name: bad enum");
}

}  // namespace fedsim
