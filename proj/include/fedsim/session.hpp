#pragma once

#include <vector>

#include "fedsim/linalg.hpp"

namespace fedsim {

/// One phone-usage session: per-view variable-length sequences of feature
/// vectors plus a class label. View order and per-step feature layout are
/// fixed by the generator (see datagen.hpp).
struct MultiViewSession {
  std::vector<std::vector<Vector>> views;
  int label = 0;
  double duration_seconds = 0.0;
};

}  // namespace fedsim
