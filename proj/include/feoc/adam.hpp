#pragma once

#include <cstdint>

#include "feoc/dense.hpp"

namespace feoc {

struct AdamState {
  std::int64_t step = 0;
  Vector m;
  Vector v;
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState adam_init(Eigen::Index size, double alpha);

/// One bias-corrected Adam update of `params` in place.
void adam_step(Vector& params, const Vector& grads, AdamState& state);

}  // namespace feoc
