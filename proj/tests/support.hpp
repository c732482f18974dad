#pragma once

// Shared helpers for the test suites: independent oracles and random data
// builders. Everything here stays implementation-agnostic on purpose; the
// oracles must not share code paths with the library routines they check.

#include <cstdint>
#include <vector>

#include "ewgn/rng.hpp"
#include "ewgn/tensor.hpp"

namespace ewgn::test {

template <class S>
Tensor<S> random_tensor(Shape shape, SplitMix64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<S> t(shape);
  for (Eigen::Index i = 0; i < t.size(); ++i)
    t.flat()[i] = static_cast<S>(rng.uniform(lo, hi));
  return t;
}

template <class S>
VecX<S> random_vec(Eigen::Index n, SplitMix64& rng, double lo = -1.0, double hi = 1.0) {
  VecX<S> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<S>(rng.uniform(lo, hi));
  return v;
}

// Direct sliding-window cross-correlation, nested loops only. The reference
// for conv2d_forward.
template <class S>
Tensor<S> conv2d_bruteforce(const Tensor<S>& x, const Tensor<S>& kernels, const VecX<S>& bias,
                            Eigen::Index stride) {
  const Eigen::Index B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const Eigen::Index OC = kernels.dim(0), k = kernels.dim(2);
  const Eigen::Index out_h = (H - k) / stride + 1;
  const Eigen::Index out_w = (W - k) / stride + 1;
  Tensor<S> y({B, OC, out_h, out_w});
  for (Eigen::Index b = 0; b < B; ++b)
    for (Eigen::Index oc = 0; oc < OC; ++oc)
      for (Eigen::Index oh = 0; oh < out_h; ++oh)
        for (Eigen::Index ow = 0; ow < out_w; ++ow) {
          double acc = static_cast<double>(bias[oc]);
          for (Eigen::Index c = 0; c < C; ++c)
            for (Eigen::Index ki = 0; ki < k; ++ki)
              for (Eigen::Index kj = 0; kj < k; ++kj) {
                const S xv = x.data()[((b * C + c) * H + oh * stride + ki) * W + ow * stride + kj];
                const S kv = kernels.data()[((oc * C + c) * k + ki) * k + kj];
                acc += static_cast<double>(xv) * static_cast<double>(kv);
              }
          y.data()[((b * OC + oc) * out_h + oh) * out_w + ow] = static_cast<S>(acc);
        }
  return y;
}

}  // namespace ewgn::test
