#pragma once

#include <cmath>
#include <string>

#include "ewgn/errors.hpp"
#include "ewgn/tensor.hpp"

namespace ewgn {

// theta <- theta - lr * g
template <class S>
void sgd_step(MutVecRef<S> params, VecRef<S> grads, S lr) {
  if (params.size() != grads.size())
    throw DimensionError("sgd_step: params length " + std::to_string(params.size()) +
                         " vs grads length " + std::to_string(grads.size()));
  params -= lr * grads;
}

// Adam (Kingma & Ba) over a flat parameter vector, bias-corrected.
template <class S>
struct AdamState {
  VecX<S> m;
  VecX<S> v;
  long long t = 0;
  S beta1 = S(0.9);
  S beta2 = S(0.999);
  S eps = S(1e-8);

  explicit AdamState(Eigen::Index n = 0)
      : m(VecX<S>::Zero(n)), v(VecX<S>::Zero(n)) {}
};

template <class S>
void adam_step(AdamState<S>& state, MutVecRef<S> params, VecRef<S> grads, S lr) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw DimensionError("adam_step: mismatched sizes (params " + std::to_string(params.size()) +
                         ", grads " + std::to_string(grads.size()) + ", state " +
                         std::to_string(state.m.size()) + ")");
  if (!grads.allFinite()) throw NumericError("adam_step: non-finite gradient");
  state.t += 1;
  const S b1 = state.beta1, b2 = state.beta2;
  state.m = b1 * state.m + (S(1) - b1) * grads;
  state.v = b2 * state.v + (S(1) - b2) * grads.cwiseProduct(grads);
  const S c1 = S(1) - std::pow(b1, static_cast<S>(state.t));
  const S c2 = S(1) - std::pow(b2, static_cast<S>(state.t));
  const S scale = lr / c1;
  params.array() -=
      scale * state.m.array() / ((state.v.array() / c2).sqrt() + state.eps);
}

}  // namespace ewgn
