#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ewgn/consolidation.hpp"
#include "ewgn/hypernet.hpp"
#include "ewgn/network.hpp"
#include "ewgn/optim.hpp"

namespace ewgn {

enum class Optimizer { Adam, Sgd };

inline Optimizer optimizer_from_string(const std::string& s) {
  if (s == "adam") return Optimizer::Adam;
  if (s == "sgd") return Optimizer::Sgd;
  throw ConfigError("unknown optimizer: " + s);
}

template <class S>
struct PlainScratch {
  ForwardCache<S> cache;
  ParameterSet<S> grads;
};

template <class S>
PlainScratch<S> make_scratch(const ParameterSet<S>& params) {
  PlainScratch<S> s;
  s.grads = params.zeros_like();
  return s;
}

// One batch-1 update of a directly-trained network. The consolidation
// penalty joins the task loss before the optimizer step, so its gradient is
// part of the same update. Returns the total loss (task + penalty).
template <class S>
S plain_train_step(const NetworkSpec& spec, ParameterSet<S>& params, PlainScratch<S>& scratch,
                   AdamState<S>& adam, Optimizer opt, S lr, const Tensor<S>& x,
                   VecRef<S> target_onehot, const std::vector<FisherState<S>>& states) {
  Tensor<S> logits = net_forward(spec, params, x, &scratch.cache);
  MatRM<S> target(1, target_onehot.size());
  target.row(0) = target_onehot;
  auto ce = softmax_cross_entropy<S>(logits.rows_view(), target);
  Tensor<S> gl({logits.dim(0), logits.size() / logits.dim(0)},
               VecX<S>(Eigen::Map<const VecX<S>>(ce.grad.data(), ce.grad.size())));
  net_backward_into(spec, params, scratch.cache, gl, scratch.grads, false);

  S loss = ce.loss;
  if (!states.empty()) {
    loss += ewc_penalty<S>(params.flat(), states);
    ewc_penalty_grad_accumulate<S>(params.flat(), states, scratch.grads.flat());
  }
  if (!std::isfinite(static_cast<double>(loss)))
    throw NumericError("plain_train_step: non-finite loss");
  if (opt == Optimizer::Adam)
    adam_step<S>(adam, params.flat(), scratch.grads.flat(), lr);
  else
    sgd_step<S>(params.flat(), scratch.grads.flat(), lr);
  return loss;
}

// One batch-1 update of the weight-generation composition. The gradient of
// [task loss + penalty over phi] flows through the main network's forward
// pass into phi only; no task identity is supplied anywhere.
template <class S>
S ewgn_train_step(EwgnModel<S>& model, EwgnScratch<S>& scratch, AdamState<S>& adam, Optimizer opt,
                  S lr, const Tensor<S>& x, VecRef<S> target_onehot,
                  const std::vector<FisherState<S>>& states) {
  S loss = ewgn_loss_and_phi_grad(model, scratch, x, target_onehot);
  if (!states.empty()) {
    loss += ewc_penalty<S>(model.phi.flat(), states);
    ewc_penalty_grad_accumulate<S>(model.phi.flat(), states, scratch.phi_grads.flat());
  }
  if (!std::isfinite(static_cast<double>(loss)))
    throw NumericError("ewgn_train_step: non-finite loss");
  if (opt == Optimizer::Adam)
    adam_step<S>(adam, model.phi.flat(), scratch.phi_grads.flat(), lr);
  else
    sgd_step<S>(model.phi.flat(), scratch.phi_grads.flat(), lr);
  return loss;
}

}  // namespace ewgn
