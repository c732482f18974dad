#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ewgn/errors.hpp"
#include "ewgn/network.hpp"
#include "ewgn/optim.hpp"

namespace ewgn {

// Weight-generation composition: a trainable hypernetwork maps each input
// image to the full parameter vector of the main network, which then
// classifies that same image with the freshly generated weights. Only the
// hypernetwork parameters phi exist persistently; no optimizer ever touches
// main-network weights.
template <class S>
struct EwgnModel {
  NetworkSpec hyper;
  NetworkSpec main;  // architecture only; parameters are generated per input
  ParameterSet<S> phi;
  bool recenter = false;  // optional ablation: w' = 2w - 1

  Eigen::Index main_param_count() const { return main.parameter_count(); }
};

template <class S>
EwgnModel<S> make_ewgn_model(const NetworkSpec& hyper, const NetworkSpec& main, SplitMix64& rng,
                             bool recenter = false) {
  Shape out = hyper.output_shape();
  if (out.size() != 1 || out[0] != main.parameter_count())
    throw ConfigError("hypernetwork output width " + shape_str(out) +
                      " does not match main parameter count " +
                      std::to_string(main.parameter_count()));
  EwgnModel<S> m;
  m.hyper = hyper;
  m.main = main;
  m.phi = init_params<S>(hyper, rng);
  m.recenter = recenter;
  return m;
}

// Reusable per-run buffers so the per-sample training loop does not
// reallocate parameter-sized storage on every step.
template <class S>
struct EwgnScratch {
  ForwardCache<S> hyper_cache;
  ForwardCache<S> main_cache;
  ParameterSet<S> main_params;
  ParameterSet<S> main_grads;
  ParameterSet<S> phi_grads;
};

template <class S>
EwgnScratch<S> make_scratch(const EwgnModel<S>& m) {
  EwgnScratch<S> s;
  s.main_params = build_params<S>(m.main);
  s.main_grads = s.main_params.zeros_like();
  s.phi_grads = m.phi.zeros_like();
  return s;
}

// One generated weight vector per input row: [B, P], entries in (0, 1]
// ((-1, 1] when recentered).
template <class S>
MatRM<S> generate_weights(const EwgnModel<S>& m, const Tensor<S>& x,
                          ForwardCache<S>* cache = nullptr) {
  Tensor<S> w = net_forward(m.hyper, m.phi, x, cache);
  MatRM<S> out = w.rows_view();
  if (m.recenter) out = (S(2) * out.array() - S(1)).matrix();
  return out;
}

// predict(main, unflatten(generate_weights(m, x)), x), row by row.
template <class S>
MatRM<S> ewgn_predict(const EwgnModel<S>& m, const Tensor<S>& x,
                      ParameterSet<S>* main_scratch = nullptr) {
  const Eigen::Index B = x.dim(0);
  MatRM<S> weights = generate_weights(m, x);
  ParameterSet<S> local;
  ParameterSet<S>& mp = main_scratch ? *main_scratch : local;
  if (mp.total() != m.main_param_count()) mp = build_params<S>(m.main);
  MatRM<S> logits(B, kNumClasses);
  for (Eigen::Index b = 0; b < B; ++b) {
    mp.flat() = weights.row(b);
    Tensor<S> xi({1, x.size() / B}, VecX<S>(x.flat().segment(b * (x.size() / B), x.size() / B)));
    logits.row(b) = predict(m.main, mp, xi).row(0);
  }
  return logits;
}

// Task-loss gradient for one sample, pushed through the generated weights
// into phi. Returns the cross-entropy loss; fills scratch.phi_grads.
template <class S>
S ewgn_loss_and_phi_grad(const EwgnModel<S>& m, EwgnScratch<S>& scratch, const Tensor<S>& x,
                         VecRef<S> target_onehot) {
  if (x.dim(0) != 1)
    throw DimensionError("ewgn training operates on exactly one sample per step");

  // Hypernetwork forward; generated weights become the main parameters.
  Tensor<S> w = net_forward(m.hyper, m.phi, x, &scratch.hyper_cache);
  if (m.recenter)
    scratch.main_params.flat() = S(2) * w.flat().array() - S(1);
  else
    scratch.main_params.flat() = w.flat();

  // Main forward with generated weights; plain cross-entropy on 20 classes.
  Tensor<S> logits = net_forward(m.main, scratch.main_params, x, &scratch.main_cache);
  MatRM<S> target(1, target_onehot.size());
  target.row(0) = target_onehot;
  auto ce = softmax_cross_entropy<S>(logits.mat(), target);

  // Backward through the main network treating generated weights as
  // differentiable intermediates; the main network itself has no trained
  // state to update.
  Tensor<S> gl({logits.dim(0), logits.dim(1)},
               VecX<S>(Eigen::Map<const VecX<S>>(ce.grad.data(), ce.grad.size())));
  net_backward_into(m.main, scratch.main_params, scratch.main_cache, gl, scratch.main_grads,
                    false);

  // d(loss)/d(generated weights), then through the hypernetwork into phi.
  Tensor<S> gw({Eigen::Index(1), scratch.main_grads.total()},
               m.recenter ? VecX<S>(S(2) * scratch.main_grads.flat())
                          : scratch.main_grads.flat());
  net_backward_into(m.hyper, m.phi, scratch.hyper_cache, gw, scratch.phi_grads, false);
  return ce.loss;
}

}  // namespace ewgn
