#pragma once

#include <type_traits>

namespace feoc {

namespace detail {

template <typename State>
State scaled(double h, const State& k) {
  if constexpr (std::is_arithmetic_v<State>) {
    return h * k;
  } else {
    return k * typename State::Scalar(h);
  }
}

}  // namespace detail

/// One classical fourth-order Runge-Kutta step of x' = f(x, t).
template <typename State, typename Fn>
State rk4_step(Fn&& f, const State& x, double t, double h) {
  const State k1 = f(x, t);
  const State k2 = f(State(x + detail::scaled(0.5 * h, k1)), t + 0.5 * h);
  const State k3 = f(State(x + detail::scaled(0.5 * h, k2)), t + 0.5 * h);
  const State k4 = f(State(x + detail::scaled(h, k3)), t + h);
  return x + detail::scaled(h / 6.0, State(k1 + detail::scaled(2.0, k2) +
                                           detail::scaled(2.0, k3) + k4));
}

/// Integrates x' = f(x, t) over [t0, t0 + n_steps * h] with fixed steps.
template <typename State, typename Fn>
State rk4_integrate(Fn&& f, State x, double t0, double h, int n_steps) {
  for (int k = 0; k < n_steps; ++k) x = rk4_step(f, x, t0 + k * h, h);
  return x;
}

}  // namespace feoc
