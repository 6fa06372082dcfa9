#include "feoc/adam.hpp"

#include <cmath>

#include "feoc/errors.hpp"

namespace feoc {

AdamState adam_init(Eigen::Index size, double alpha) {
  AdamState s;
  s.m = Vector::Zero(size);
  s.v = Vector::Zero(size);
  s.alpha = alpha;
  return s;
}

void adam_step(Vector& params, const Vector& grads, AdamState& state) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeMismatch("adam_step: parameter, gradient and moment sizes differ");
  }
  ++state.step;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  params.array() -= state.alpha * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + state.eps);
}

}  // namespace feoc
