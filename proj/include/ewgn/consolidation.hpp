#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ewgn/errors.hpp"
#include "ewgn/hypernet.hpp"
#include "ewgn/network.hpp"
#include "ewgn/rng.hpp"

namespace ewgn {

// Everything needed to anchor one completed task: the parameter snapshot
// theta*, the diagonal Fisher importance estimate, and the penalty strength.
// Immutable once built.
template <class S>
struct FisherState {
  std::string task_id;
  VecX<S> anchor;  // theta* (or phi* for generated-weight models)
  VecX<S> diag;    // F >= 0, same length as anchor
  S lambda = S(0);
};

// Sum over states of (lambda/2) * sum_i F_i (theta_i - theta*_i)^2.
template <class S>
S ewc_penalty(VecRef<S> params, const std::vector<FisherState<S>>& states) {
  S total = S(0);
  for (const auto& st : states) {
    if (st.anchor.size() != params.size())
      throw DimensionError("ewc_penalty: state for task " + st.task_id + " has length " +
                           std::to_string(st.anchor.size()) + ", parameters have " +
                           std::to_string(params.size()));
    if (st.lambda == S(0)) continue;
    auto d = params.array() - st.anchor.array();
    total += (st.lambda / S(2)) * (st.diag.array() * d.square()).sum();
  }
  return total;
}

// grad += sum over states of lambda * F .* (theta - theta*). States with
// lambda == 0 are skipped entirely so consolidation-off training is
// bit-identical to never having the states at all.
template <class S>
void ewc_penalty_grad_accumulate(VecRef<S> params, const std::vector<FisherState<S>>& states,
                                 MutVecRef<S> grad) {
  if (grad.size() != params.size())
    throw DimensionError("ewc_penalty_grad: gradient length mismatch");
  for (const auto& st : states) {
    if (st.anchor.size() != params.size())
      throw DimensionError("ewc_penalty_grad: state for task " + st.task_id +
                           " does not conform to parameters");
    if (st.lambda == S(0)) continue;
    grad.array() += st.lambda * st.diag.array() * (params.array() - st.anchor.array());
  }
}

template <class S>
VecX<S> ewc_penalty_grad(VecRef<S> params, const std::vector<FisherState<S>>& states) {
  VecX<S> g = VecX<S>::Zero(params.size());
  ewc_penalty_grad_accumulate<S>(params, states, g);
  return g;
}

// ---------------------------------------------------------------------------
// Fisher estimation, predictive flavor (MLP / CNN)
// ---------------------------------------------------------------------------

// F_i = (1/n) sum_x (d/d theta_i log softmax(logits(x))[argmax])^2, using the
// model's own prediction as the label. Accumulation runs at 64-bit no matter
// the working scalar.
template <class S>
FisherState<S> estimate_fisher_predictive(const NetworkSpec& spec, const ParameterSet<S>& params,
                                          const Tensor<S>& inputs, Eigen::Index n_samples,
                                          std::uint64_t seed, S lambda,
                                          const std::string& task_id) {
  const Eigen::Index N = inputs.dim(0);
  if (n_samples > N)
    throw DataError("estimate_fisher_predictive: requested " + std::to_string(n_samples) +
                    " samples from a dataset of " + std::to_string(N));
  SplitMix64 rng(mix_seed(seed, fnv1a64("fisher:" + task_id)));
  auto picks = sample_indices(static_cast<std::uint32_t>(N),
                              static_cast<std::uint32_t>(n_samples), rng);

  const Eigen::Index sample_size = inputs.size() / N;
  Shape sample_shape = inputs.shape();
  sample_shape[0] = 1;

  VecX<double> acc = VecX<double>::Zero(params.total());
  ForwardCache<S> cache;
  ParameterSet<S> grads = params.zeros_like();
  const Shape out_shape = spec.output_shape();
  const Eigen::Index width = out_shape[0];
  for (std::size_t si = 0; si < picks.size(); ++si) {
    const Eigen::Index i = picks[si];
    Tensor<S> x(sample_shape, VecX<S>(inputs.flat().segment(i * sample_size, sample_size)));
    Tensor<S> logits = net_forward(spec, params, x, &cache);
    const Eigen::Index pred = argmax_row<S>(logits.flat());
    MatRM<S> onehot = MatRM<S>::Zero(1, width);
    onehot(0, pred) = S(1);
    auto ce = softmax_cross_entropy<S>(logits.rows_view(), onehot);
    Tensor<S> gl({Eigen::Index(1), width},
                 VecX<S>(Eigen::Map<const VecX<S>>(ce.grad.data(), ce.grad.size())));
    net_backward_into(spec, params, cache, gl, grads, false);
    if (!grads.flat().allFinite())
      throw NumericError("estimate_fisher_predictive: non-finite gradient at sample " +
                         std::to_string(i));
    acc.array() += grads.flat().template cast<double>().array().square();
  }
  FisherState<S> st;
  st.task_id = task_id;
  st.anchor = params.flat();
  st.diag = (acc / static_cast<double>(n_samples)).template cast<S>();
  st.lambda = lambda;
  return st;
}

// ---------------------------------------------------------------------------
// Fisher estimation, generative flavor (WGN / EWGN)
// ---------------------------------------------------------------------------

// The hypernetwork's output is a weight vector, not class logits, so the
// predictive recipe does not apply. Score each sample by the
// pseudo-log-likelihood L(x) = sum_j log(clip(w_j(x), eps, 1-eps)) of its
// generated weights and square the gradient through phi. Clipping pins the
// w -> 0 and w -> 1 edge cases, so every value here is finite by
// construction.
template <class S>
FisherState<S> estimate_fisher_generative(const EwgnModel<S>& model, const Tensor<S>& inputs,
                                          Eigen::Index n_samples, S epsilon, std::uint64_t seed,
                                          S lambda, const std::string& task_id) {
  if (!(epsilon > S(0)) || !(epsilon < S(0.5)))
    throw ConfigError("estimate_fisher_generative: epsilon must lie in (0, 0.5)");
  const Eigen::Index N = inputs.dim(0);
  if (n_samples > N)
    throw DataError("estimate_fisher_generative: requested " + std::to_string(n_samples) +
                    " samples from a dataset of " + std::to_string(N));
  SplitMix64 rng(mix_seed(seed, fnv1a64("fisher:" + task_id)));
  auto picks = sample_indices(static_cast<std::uint32_t>(N),
                              static_cast<std::uint32_t>(n_samples), rng);

  const Eigen::Index sample_size = inputs.size() / N;
  VecX<double> acc = VecX<double>::Zero(model.phi.total());
  ForwardCache<S> cache;
  ParameterSet<S> phi_grads = model.phi.zeros_like();
  const S lo = epsilon, hi = S(1) - epsilon;
  for (std::size_t si = 0; si < picks.size(); ++si) {
    const Eigen::Index i = picks[si];
    Tensor<S> x({1, sample_size}, VecX<S>(inputs.flat().segment(i * sample_size, sample_size)));
    Tensor<S> w = net_forward(model.hyper, model.phi, x, &cache);
    VecX<S> wv = model.recenter ? VecX<S>(S(2) * w.flat().array() - S(1)) : w.flat();
    // d/dw of sum_j log(clip(w_j)): 1/w_j strictly inside the clip band,
    // zero where the clip saturates.
    VecX<S> gw(wv.size());
    for (Eigen::Index j = 0; j < wv.size(); ++j)
      gw[j] = (wv[j] > lo && wv[j] < hi) ? S(1) / wv[j] : S(0);
    if (model.recenter) gw *= S(2);
    Tensor<S> gwt({Eigen::Index(1), gw.size()}, std::move(gw));
    net_backward_into(model.hyper, model.phi, cache, gwt, phi_grads, false);
    if (!phi_grads.flat().allFinite())
      throw NumericError("estimate_fisher_generative: non-finite gradient at sample " +
                         std::to_string(i) + " (implementation bug: clipping must prevent this)");
    acc.array() += phi_grads.flat().template cast<double>().array().square();
  }
  FisherState<S> st;
  st.task_id = task_id;
  st.anchor = model.phi.flat();
  st.diag = (acc / static_cast<double>(n_samples)).template cast<S>();
  st.lambda = lambda;
  return st;
}

// The generative pseudo-log-likelihood itself, for oracle tests.
template <class S>
S generative_log_likelihood(const EwgnModel<S>& model, const Tensor<S>& x, S epsilon) {
  Tensor<S> w = net_forward(model.hyper, model.phi, x);
  VecX<S> wv = model.recenter ? VecX<S>(S(2) * w.flat().array() - S(1)) : w.flat();
  const S lo = epsilon, hi = S(1) - epsilon;
  S total = S(0);
  for (Eigen::Index j = 0; j < wv.size(); ++j)
    total += std::log(std::min(std::max(wv[j], lo), hi));
  return total;
}

}  // namespace ewgn
