#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ewgn/errors.hpp"
#include "ewgn/tensor.hpp"

namespace ewgn {

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

enum class Act { Relu, Tanh, Sigmoid, Gaussian };

inline Act act_from_string(const std::string& name) {
  if (name == "relu") return Act::Relu;
  if (name == "tanh") return Act::Tanh;
  if (name == "sigmoid") return Act::Sigmoid;
  if (name == "gaussian") return Act::Gaussian;
  throw ConfigError("unknown activation: " + name);
}

inline const char* act_to_string(Act a) {
  switch (a) {
    case Act::Relu: return "relu";
    case Act::Tanh: return "tanh";
    case Act::Sigmoid: return "sigmoid";
    case Act::Gaussian: return "gaussian";
  }
  return "?";
}

// Elementwise forward. gaussian(x) = exp(-x^2): strictly positive, peaks at
// 1 for x = 0, even in x; squashes generated weights into (0, 1].
template <class S>
VecX<S> act_apply(Act a, VecRef<S> x) {
  switch (a) {
    case Act::Relu:
      return x.array().max(S(0)).matrix();
    case Act::Tanh:
      return x.array().tanh().matrix();
    case Act::Sigmoid: {
      // exp(-|x|) form stays bounded for both tails.
      auto e = (-x.array().abs()).exp();
      return (x.array() >= S(0)).select(S(1) / (S(1) + e), e / (S(1) + e)).matrix();
    }
    case Act::Gaussian:
      return (-x.array().square()).exp().matrix();
  }
  throw ConfigError("unknown activation kind");
}

// Elementwise backward given the cached *input* of the forward call.
template <class S>
VecX<S> act_backward(Act a, VecRef<S> x_in, VecRef<S> grad_y) {
  if (x_in.size() != grad_y.size())
    throw DimensionError("act_backward: cached input length " + std::to_string(x_in.size()) +
                         " vs grad length " + std::to_string(grad_y.size()));
  switch (a) {
    case Act::Relu:
      return (x_in.array() > S(0)).select(grad_y.array(), S(0)).matrix();
    case Act::Tanh: {
      auto t = x_in.array().tanh();
      return (grad_y.array() * (S(1) - t.square())).matrix();
    }
    case Act::Sigmoid: {
      VecX<S> s = act_apply<S>(Act::Sigmoid, x_in);
      return (grad_y.array() * s.array() * (S(1) - s.array())).matrix();
    }
    case Act::Gaussian: {
      auto g = (-x_in.array().square()).exp();
      return (grad_y.array() * S(-2) * x_in.array() * g).matrix();
    }
  }
  throw ConfigError("unknown activation kind");
}

// ---------------------------------------------------------------------------
// Affine
// ---------------------------------------------------------------------------

// y = x W + b, row-wise. x: [batch, in], W: [in, out], b: [out].
template <class S>
MatRM<S> affine_forward(MatRef<S> x, MatRef<S> W, VecRef<S> b) {
  if (x.cols() != W.rows())
    throw DimensionError("affine_forward: x [" + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + "] does not conform to W [" +
                         std::to_string(W.rows()) + "x" + std::to_string(W.cols()) + "]");
  if (b.size() != W.cols())
    throw DimensionError("affine_forward: b length " + std::to_string(b.size()) +
                         " vs W columns " + std::to_string(W.cols()));
  MatRM<S> y = x * W;
  y.rowwise() += b.transpose();
  return y;
}

template <class S>
struct AffineGrads {
  MatRM<S> gx;  // [batch, in]
  MatRM<S> gW;  // [in, out]
  VecX<S> gb;   // [out]
};

template <class S>
AffineGrads<S> affine_backward(MatRef<S> grad_y, MatRef<S> x, MatRef<S> W) {
  if (grad_y.rows() != x.rows() || grad_y.cols() != W.cols() || x.cols() != W.rows())
    throw DimensionError("affine_backward: grad [" + std::to_string(grad_y.rows()) + "x" +
                         std::to_string(grad_y.cols()) + "] vs x [" + std::to_string(x.rows()) +
                         "x" + std::to_string(x.cols()) + "] vs W [" + std::to_string(W.rows()) +
                         "x" + std::to_string(W.cols()) + "]");
  AffineGrads<S> g;
  g.gW.noalias() = x.transpose() * grad_y;
  g.gb = grad_y.colwise().sum();
  g.gx.noalias() = grad_y * W.transpose();
  return g;
}

// ---------------------------------------------------------------------------
// Conv2d (valid padding, cross-correlation) via im2col + GEMM
// ---------------------------------------------------------------------------

inline Eigen::Index conv_out_dim(Eigen::Index in, Eigen::Index kernel, Eigen::Index stride) {
  return (in - kernel) / stride + 1;
}

namespace detail {

// col is (C*k*k) x (outH*outW); one column per output position.
template <class S>
void im2col(const S* x_plane_base, Eigen::Index C, Eigen::Index H, Eigen::Index W,
            Eigen::Index k, Eigen::Index stride, MatRM<S>& col) {
  const Eigen::Index out_h = conv_out_dim(H, k, stride);
  const Eigen::Index out_w = conv_out_dim(W, k, stride);
  for (Eigen::Index c = 0; c < C; ++c) {
    const S* plane = x_plane_base + c * H * W;
    for (Eigen::Index ki = 0; ki < k; ++ki)
      for (Eigen::Index kj = 0; kj < k; ++kj) {
        S* dst = col.data() + ((c * k + ki) * k + kj) * (out_h * out_w);
        for (Eigen::Index oh = 0; oh < out_h; ++oh) {
          const S* src = plane + (oh * stride + ki) * W + kj;
          for (Eigen::Index ow = 0; ow < out_w; ++ow) dst[oh * out_w + ow] = src[ow * stride];
        }
      }
  }
}

template <class S>
void col2im_add(const MatRM<S>& col, Eigen::Index C, Eigen::Index H, Eigen::Index W,
                Eigen::Index k, Eigen::Index stride, S* gx_plane_base) {
  const Eigen::Index out_h = conv_out_dim(H, k, stride);
  const Eigen::Index out_w = conv_out_dim(W, k, stride);
  for (Eigen::Index c = 0; c < C; ++c) {
    S* plane = gx_plane_base + c * H * W;
    for (Eigen::Index ki = 0; ki < k; ++ki)
      for (Eigen::Index kj = 0; kj < k; ++kj) {
        const S* src = col.data() + ((c * k + ki) * k + kj) * (out_h * out_w);
        for (Eigen::Index oh = 0; oh < out_h; ++oh) {
          S* dst = plane + (oh * stride + ki) * W + kj;
          for (Eigen::Index ow = 0; ow < out_w; ++ow) dst[ow * stride] += src[oh * out_w + ow];
        }
      }
  }
}

}  // namespace detail

// x: [B, C, H, W]; kernels: [OC, C, k, k]; bias: [OC]. Valid padding.
template <class S>
Tensor<S> conv2d_forward(const Tensor<S>& x, const Tensor<S>& kernels, VecRef<S> bias,
                         Eigen::Index stride) {
  if (x.rank() != 4 || kernels.rank() != 4)
    throw DimensionError("conv2d_forward: expected x rank 4 and kernels rank 4, got " +
                         shape_str(x.shape()) + " and " + shape_str(kernels.shape()));
  const Eigen::Index B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const Eigen::Index OC = kernels.dim(0), k = kernels.dim(2);
  if (kernels.dim(1) != C)
    throw DimensionError("conv2d_forward: input channels " + std::to_string(C) +
                         " vs kernel channels " + std::to_string(kernels.dim(1)));
  if (kernels.dim(3) != k) throw DimensionError("conv2d_forward: kernels must be square");
  if (k > H || k > W)
    throw DimensionError("conv2d_forward: kernel " + std::to_string(k) + "x" + std::to_string(k) +
                         " larger than input " + std::to_string(H) + "x" + std::to_string(W));
  if (bias.size() != OC)
    throw DimensionError("conv2d_forward: bias length " + std::to_string(bias.size()) +
                         " vs out channels " + std::to_string(OC));
  if (stride < 1) throw DimensionError("conv2d_forward: stride must be >= 1");

  const Eigen::Index out_h = conv_out_dim(H, k, stride);
  const Eigen::Index out_w = conv_out_dim(W, k, stride);
  Tensor<S> y({B, OC, out_h, out_w});
  Eigen::Map<const MatRM<S>> K(kernels.data(), OC, C * k * k);
  MatRM<S> col(C * k * k, out_h * out_w);
  for (Eigen::Index b = 0; b < B; ++b) {
    detail::im2col(x.data() + b * C * H * W, C, H, W, k, stride, col);
    Eigen::Map<MatRM<S>> y_mat(y.data() + b * OC * out_h * out_w, OC, out_h * out_w);
    y_mat.noalias() = K * col;
    y_mat.colwise() += VecX<S>(bias);
  }
  return y;
}

template <class S>
struct Conv2dGrads {
  Tensor<S> gx;       // [B, C, H, W]
  Tensor<S> gkernels; // [OC, C, k, k]
  VecX<S> gbias;      // [OC]
};

template <class S>
Conv2dGrads<S> conv2d_backward(const Tensor<S>& grad_y, const Tensor<S>& x,
                               const Tensor<S>& kernels, Eigen::Index stride,
                               bool want_input_grad = true) {
  const Eigen::Index B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const Eigen::Index OC = kernels.dim(0), k = kernels.dim(2);
  const Eigen::Index out_h = conv_out_dim(H, k, stride);
  const Eigen::Index out_w = conv_out_dim(W, k, stride);
  if (grad_y.rank() != 4 || grad_y.dim(0) != B || grad_y.dim(1) != OC ||
      grad_y.dim(2) != out_h || grad_y.dim(3) != out_w)
    throw DimensionError("conv2d_backward: grad shape " + shape_str(grad_y.shape()) +
                         " does not match forward output");

  Conv2dGrads<S> g;
  g.gkernels = Tensor<S>({OC, C, k, k});
  g.gbias = VecX<S>::Zero(OC);
  if (want_input_grad) g.gx = Tensor<S>({B, C, H, W});
  Eigen::Map<const MatRM<S>> K(kernels.data(), OC, C * k * k);
  Eigen::Map<MatRM<S>> gK(g.gkernels.data(), OC, C * k * k);
  MatRM<S> col(C * k * k, out_h * out_w);
  MatRM<S> gcol(C * k * k, out_h * out_w);
  for (Eigen::Index b = 0; b < B; ++b) {
    Eigen::Map<const MatRM<S>> gy_mat(grad_y.data() + b * OC * out_h * out_w, OC, out_h * out_w);
    detail::im2col(x.data() + b * C * H * W, C, H, W, k, stride, col);
    gK.noalias() += gy_mat * col.transpose();
    g.gbias += gy_mat.rowwise().sum();
    if (want_input_grad) {
      gcol.noalias() = K.transpose() * gy_mat;
      detail::col2im_add(gcol, C, H, W, k, stride, g.gx.data() + b * C * H * W);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Max pooling
// ---------------------------------------------------------------------------

template <class S>
struct MaxPoolOut {
  Tensor<S> y;                   // [B, C, outH, outW]
  std::vector<std::int32_t> argmax;  // flat h*W+w index into each input plane
};

// Trailing rows/columns that do not fill a full window are cropped
// (out = floor((in - window)/stride) + 1). Ties go to the first occurrence
// in row-major scan order.
template <class S>
MaxPoolOut<S> maxpool2d_forward(const Tensor<S>& x, Eigen::Index window = 2,
                                Eigen::Index stride = 2) {
  if (x.rank() != 4)
    throw DimensionError("maxpool2d_forward: expected rank-4 input, got " + shape_str(x.shape()));
  const Eigen::Index B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (window > H || window > W)
    throw DimensionError("maxpool2d_forward: window larger than input plane");
  const Eigen::Index out_h = conv_out_dim(H, window, stride);
  const Eigen::Index out_w = conv_out_dim(W, window, stride);

  MaxPoolOut<S> out;
  out.y = Tensor<S>({B, C, out_h, out_w});
  out.argmax.assign(static_cast<std::size_t>(B * C * out_h * out_w), 0);
  for (Eigen::Index bc = 0; bc < B * C; ++bc) {
    const S* plane = x.data() + bc * H * W;
    S* yp = out.y.data() + bc * out_h * out_w;
    std::int32_t* ap = out.argmax.data() + bc * out_h * out_w;
    for (Eigen::Index oh = 0; oh < out_h; ++oh)
      for (Eigen::Index ow = 0; ow < out_w; ++ow) {
        S best = plane[(oh * stride) * W + ow * stride];
        Eigen::Index best_idx = (oh * stride) * W + ow * stride;
        for (Eigen::Index ki = 0; ki < window; ++ki)
          for (Eigen::Index kj = 0; kj < window; ++kj) {
            const Eigen::Index idx = (oh * stride + ki) * W + (ow * stride + kj);
            if (plane[idx] > best) {
              best = plane[idx];
              best_idx = idx;
            }
          }
        yp[oh * out_w + ow] = best;
        ap[oh * out_w + ow] = static_cast<std::int32_t>(best_idx);
      }
  }
  return out;
}

template <class S>
Tensor<S> maxpool2d_backward(const Tensor<S>& grad_y, const std::vector<std::int32_t>& argmax,
                             const Shape& input_shape) {
  if (input_shape.size() != 4)
    throw DimensionError("maxpool2d_backward: input shape must be rank 4");
  const Eigen::Index B = input_shape[0], C = input_shape[1], H = input_shape[2],
                     W = input_shape[3];
  if (static_cast<std::size_t>(grad_y.size()) != argmax.size())
    throw DimensionError("maxpool2d_backward: grad size does not match argmax record");
  Tensor<S> gx(input_shape);
  const Eigen::Index plane_out = grad_y.size() / (B * C);
  for (Eigen::Index bc = 0; bc < B * C; ++bc) {
    S* gp = gx.data() + bc * H * W;
    const S* gyp = grad_y.data() + bc * plane_out;
    const std::int32_t* ap = argmax.data() + bc * plane_out;
    for (Eigen::Index i = 0; i < plane_out; ++i) gp[ap[i]] += gyp[i];
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy over the 20-way extended label space
// ---------------------------------------------------------------------------

template <class S>
MatRM<S> softmax(MatRef<S> logits) {
  MatRM<S> p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    auto row = p.row(r).array();
    row -= row.maxCoeff();
    row = row.exp();
    row /= row.sum();
  }
  return p;
}

template <class S>
struct SoftmaxCeOut {
  S loss;          // mean over rows
  MatRM<S> grad;   // d(mean loss)/d(logits) = (softmax - target)/batch
};

// targets must be exactly one-hot rows.
template <class S>
SoftmaxCeOut<S> softmax_cross_entropy(MatRef<S> logits, MatRef<S> targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols())
    throw DimensionError("softmax_cross_entropy: logits [" + std::to_string(logits.rows()) + "x" +
                         std::to_string(logits.cols()) + "] vs targets [" +
                         std::to_string(targets.rows()) + "x" + std::to_string(targets.cols()) +
                         "]");
  const Eigen::Index B = logits.rows();
  for (Eigen::Index r = 0; r < B; ++r) {
    int ones = 0;
    for (Eigen::Index c = 0; c < targets.cols(); ++c) {
      const S v = targets(r, c);
      if (v == S(1))
        ++ones;
      else if (v != S(0))
        throw DataError("softmax_cross_entropy: target row " + std::to_string(r) +
                        " is not one-hot");
    }
    if (ones != 1)
      throw DataError("softmax_cross_entropy: target row " + std::to_string(r) +
                      " has " + std::to_string(ones) + " ones");
  }

  SoftmaxCeOut<S> out;
  out.grad = softmax<S>(logits);
  S total = S(0);
  for (Eigen::Index r = 0; r < B; ++r) {
    Eigen::Index t;
    targets.row(r).maxCoeff(&t);
    // log-sum-exp form: loss = lse(logits) - logits[t]
    auto row = logits.row(r).array();
    const S m = row.maxCoeff();
    const S lse = m + std::log((row - m).exp().sum());
    total += lse - logits(r, t);
  }
  out.loss = total / static_cast<S>(B);
  out.grad -= targets;
  out.grad /= static_cast<S>(B);
  return out;
}

// First index of the row maximum.
template <class S>
Eigen::Index argmax_row(VecRef<S> v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace ewgn
