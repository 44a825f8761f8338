#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "fedsim/linalg.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Combines per-view hidden states into class scores. Three interchangeable
// head shapes; each one doubles as its own gradient container.

struct FcHead {
  Matrix hidden;  // k' x (d+1), bias channel appended to the concatenated input
  Matrix output;  // c x k'

  std::size_t class_count() const { return output.rows(); }
  static FcHead zeros(std::size_t concat_dim, std::size_t hidden_units, std::size_t classes);
  static FcHead glorot(std::size_t concat_dim, std::size_t hidden_units, std::size_t classes,
                       Rng& rng);
};

struct FmHead {
  std::vector<Matrix> factors;  // per class, k x d
  std::vector<Vector> linear;   // per class, length d+1

  std::size_t class_count() const { return factors.size(); }
  static FmHead zeros(std::size_t concat_dim, std::size_t factor_dim, std::size_t classes);
  static FmHead glorot(std::size_t concat_dim, std::size_t factor_dim, std::size_t classes,
                       Rng& rng);
};

struct MvmHead {
  // factors[a][p] is k x (view_dim_p + 1); the product couples all views
  std::vector<std::vector<Matrix>> factors;

  std::size_t class_count() const { return factors.size(); }
  std::size_t view_count() const { return factors.empty() ? 0 : factors.front().size(); }
  static MvmHead zeros(const std::vector<std::size_t>& view_dims, std::size_t factor_dim,
                       std::size_t classes);
  static MvmHead glorot(const std::vector<std::size_t>& view_dims, std::size_t factor_dim,
                        std::size_t classes, Rng& rng);
};

struct FcCache {
  Vector input;       // [h;1]
  Vector hidden_act;  // relu output
};

struct FmCache {
  Vector input;                      // concatenated views, no bias
  std::vector<Vector> factor_proj;   // per class, U_a h
};

struct MvmCache {
  std::vector<Vector> inputs;              // per view, [h;1]
  std::vector<std::vector<Vector>> proj;   // [class][view]
};

Vector fuse_fc(const FcHead& head, const std::vector<Vector>& h_views, FcCache* cache = nullptr);
Vector fuse_fm(const FmHead& head, const std::vector<Vector>& h_views, FmCache* cache = nullptr);
Vector fuse_mvm(const MvmHead& head, const std::vector<Vector>& h_views,
                MvmCache* cache = nullptr);

// Each backward returns d(loss)/d(h_view) per view and accumulates into grad.
std::vector<Vector> fuse_fc_backward(const FcHead& head, const FcCache& cache,
                                     const Vector& dlogits, FcHead& grad,
                                     const std::vector<std::size_t>& view_dims);
std::vector<Vector> fuse_fm_backward(const FmHead& head, const FmCache& cache,
                                     const Vector& dlogits, FmHead& grad,
                                     const std::vector<std::size_t>& view_dims);
std::vector<Vector> fuse_mvm_backward(const MvmHead& head, const MvmCache& cache,
                                      const Vector& dlogits, MvmHead& grad);

using FusionHead = std::variant<FcHead, FmHead, MvmHead>;

enum class FusionKind { Fc, Fm, Mvm };

FusionKind fusion_kind(const FusionHead& head);
FusionKind fusion_kind_from_name(const std::string& name);
std::string fusion_kind_name(FusionKind kind);

}  // namespace fedsim
