#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ewgn/errors.hpp"
#include "ewgn/layers.hpp"
#include "ewgn/parameter_set.hpp"
#include "ewgn/rng.hpp"
#include "ewgn/tensor.hpp"

namespace ewgn {

// ---------------------------------------------------------------------------
// Layer and network specifications
// ---------------------------------------------------------------------------

struct LayerSpec {
  enum class Kind { Affine, Conv2d, MaxPool2d, Flatten, Activation };

  Kind kind = Kind::Flatten;
  Eigen::Index in = 0, out = 0;                       // affine
  Eigen::Index in_ch = 0, out_ch = 0, kernel = 0;     // conv2d
  Eigen::Index stride = 1;                            // conv2d / maxpool
  Eigen::Index window = 2;                            // maxpool
  Act act = Act::Relu;                                // activation

  static LayerSpec affine(Eigen::Index in, Eigen::Index out) {
    LayerSpec s;
    s.kind = Kind::Affine;
    s.in = in;
    s.out = out;
    return s;
  }
  static LayerSpec conv2d(Eigen::Index in_ch, Eigen::Index out_ch, Eigen::Index kernel,
                          Eigen::Index stride = 1) {
    LayerSpec s;
    s.kind = Kind::Conv2d;
    s.in_ch = in_ch;
    s.out_ch = out_ch;
    s.kernel = kernel;
    s.stride = stride;
    return s;
  }
  static LayerSpec maxpool2d(Eigen::Index window = 2, Eigen::Index stride = 2) {
    LayerSpec s;
    s.kind = Kind::MaxPool2d;
    s.window = window;
    s.stride = stride;
    return s;
  }
  static LayerSpec flatten() {
    LayerSpec s;
    s.kind = Kind::Flatten;
    return s;
  }
  static LayerSpec activation(Act a) {
    LayerSpec s;
    s.kind = Kind::Activation;
    s.act = a;
    return s;
  }

  Eigen::Index parameter_count() const {
    switch (kind) {
      case Kind::Affine: return in * out + out;
      case Kind::Conv2d: return out_ch * in_ch * kernel * kernel + out_ch;
      default: return 0;
    }
  }
};

// Architecture only; parameters live in a ParameterSet built against it.
struct NetworkSpec {
  Shape input_shape;  // sample shape without the batch dimension
  std::vector<LayerSpec> layers;

  // Walks sample shapes through every layer; throws DimensionError on any
  // inconsistency. Returns the output sample shape.
  Shape output_shape() const {
    Shape cur = input_shape;
    for (std::size_t li = 0; li < layers.size(); ++li) {
      const LayerSpec& l = layers[li];
      switch (l.kind) {
        case LayerSpec::Kind::Affine:
          if (cur.size() != 1 || cur[0] != l.in)
            throw DimensionError("layer " + std::to_string(li) + ": affine expects [" +
                                 std::to_string(l.in) + "], got " + shape_str(cur));
          cur = {l.out};
          break;
        case LayerSpec::Kind::Conv2d: {
          if (cur.size() != 3 || cur[0] != l.in_ch)
            throw DimensionError("layer " + std::to_string(li) + ": conv2d expects [" +
                                 std::to_string(l.in_ch) + ",H,W], got " + shape_str(cur));
          if (l.kernel > cur[1] || l.kernel > cur[2])
            throw DimensionError("layer " + std::to_string(li) + ": kernel larger than input " +
                                 shape_str(cur));
          cur = {l.out_ch, conv_out_dim(cur[1], l.kernel, l.stride),
                 conv_out_dim(cur[2], l.kernel, l.stride)};
          break;
        }
        case LayerSpec::Kind::MaxPool2d:
          if (cur.size() != 3)
            throw DimensionError("layer " + std::to_string(li) + ": maxpool expects rank-3, got " +
                                 shape_str(cur));
          cur = {cur[0], conv_out_dim(cur[1], l.window, l.stride),
                 conv_out_dim(cur[2], l.window, l.stride)};
          break;
        case LayerSpec::Kind::Flatten:
          cur = {shape_numel(cur)};
          break;
        case LayerSpec::Kind::Activation:
          break;
      }
    }
    return cur;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index p = 0;
    for (const auto& l : layers) p += l.parameter_count();
    return p;
  }

  void validate() const { (void)output_shape(); }
};

// ---------------------------------------------------------------------------
// Parameter construction and initialization
// ---------------------------------------------------------------------------

namespace detail {

inline std::string layer_param_name(const LayerSpec& l, int& fc_count, int& conv_count) {
  if (l.kind == LayerSpec::Kind::Affine) return "fc" + std::to_string(fc_count++);
  return "conv" + std::to_string(conv_count++);
}

// Activation that consumes this layer's output (first one downstream), or
// none for a linear head.
inline bool next_activation(const std::vector<LayerSpec>& layers, std::size_t i, Act* out) {
  for (std::size_t j = i + 1; j < layers.size(); ++j) {
    if (layers[j].kind == LayerSpec::Kind::Activation) {
      *out = layers[j].act;
      return true;
    }
    if (layers[j].kind == LayerSpec::Kind::Affine || layers[j].kind == LayerSpec::Kind::Conv2d)
      break;
  }
  return false;
}

}  // namespace detail

// Zero-initialized parameters in canonical order (layer order, weights
// before biases).
template <class S>
ParameterSet<S> build_params(const NetworkSpec& spec) {
  spec.validate();
  ParameterSet<S> ps;
  int fc = 0, conv = 0;
  for (const auto& l : spec.layers) {
    if (l.kind == LayerSpec::Kind::Affine) {
      const std::string name = detail::layer_param_name(l, fc, conv);
      ps.add(name + ".weight", {l.in, l.out});
      ps.add(name + ".bias", {l.out});
    } else if (l.kind == LayerSpec::Kind::Conv2d) {
      const std::string name = detail::layer_param_name(l, fc, conv);
      ps.add(name + ".weight", {l.out_ch, l.in_ch, l.kernel, l.kernel});
      ps.add(name + ".bias", {l.out_ch});
    }
  }
  return ps;
}

// He-uniform fan-in scaling ahead of relu, Xavier-uniform otherwise
// (tanh / sigmoid / gaussian / linear heads). Biases start at zero.
template <class S>
ParameterSet<S> init_params(const NetworkSpec& spec, SplitMix64& rng) {
  ParameterSet<S> ps = build_params<S>(spec);
  std::size_t entry = 0;
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    const LayerSpec& l = spec.layers[li];
    if (l.parameter_count() == 0) continue;
    double fan_in, fan_out;
    if (l.kind == LayerSpec::Kind::Affine) {
      fan_in = static_cast<double>(l.in);
      fan_out = static_cast<double>(l.out);
    } else {
      fan_in = static_cast<double>(l.in_ch * l.kernel * l.kernel);
      fan_out = static_cast<double>(l.out_ch * l.kernel * l.kernel);
    }
    Act follow;
    const bool has_act = detail::next_activation(spec.layers, li, &follow);
    const double limit = (has_act && follow == Act::Relu)
                             ? std::sqrt(6.0 / fan_in)
                             : std::sqrt(6.0 / (fan_in + fan_out));
    auto w = ps.vec(entry);
    for (Eigen::Index i = 0; i < w.size(); ++i)
      w[i] = static_cast<S>(rng.uniform(-limit, limit));
    entry += 2;  // skip the bias entry, which stays zero
  }
  return ps;
}

// ---------------------------------------------------------------------------
// Forward / backward over a layer stack
// ---------------------------------------------------------------------------

template <class S>
struct ForwardCache {
  std::vector<Tensor<S>> inputs;                     // per layer
  std::vector<std::vector<std::int32_t>> pool_idx;   // per layer (empty unless maxpool)
};

namespace detail {

template <class S>
Tensor<S> from_matrix(const MatRM<S>& m) {
  return Tensor<S>({m.rows(), m.cols()}, VecX<S>(Eigen::Map<const VecX<S>>(m.data(), m.size())));
}

}  // namespace detail

// x carries a leading batch dimension; its per-sample shape must equal
// spec.input_shape. Pass a cache to retain what backward needs.
template <class S>
Tensor<S> net_forward(const NetworkSpec& spec, const ParameterSet<S>& params, const Tensor<S>& x,
                      ForwardCache<S>* cache = nullptr) {
  {
    Shape sample(x.shape().begin() + 1, x.shape().end());
    if (sample != spec.input_shape)
      throw DimensionError("net_forward: sample shape " + shape_str(sample) +
                           " does not match spec input " + shape_str(spec.input_shape));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pool_idx.assign(spec.layers.size(), {});
  }
  Tensor<S> cur = x;
  std::size_t entry = 0;
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    const LayerSpec& l = spec.layers[li];
    if (cache) cache->inputs.push_back(cur);
    switch (l.kind) {
      case LayerSpec::Kind::Affine:
        cur = detail::from_matrix<S>(
            affine_forward<S>(cur.mat(), params.mat(entry), params.vec(entry + 1)));
        entry += 2;
        break;
      case LayerSpec::Kind::Conv2d: {
        Tensor<S> kernels({l.out_ch, l.in_ch, l.kernel, l.kernel}, VecX<S>(params.vec(entry)));
        cur = conv2d_forward<S>(cur, kernels, params.vec(entry + 1), l.stride);
        entry += 2;
        break;
      }
      case LayerSpec::Kind::MaxPool2d: {
        auto out = maxpool2d_forward<S>(cur, l.window, l.stride);
        if (cache) cache->pool_idx[li] = std::move(out.argmax);
        cur = std::move(out.y);
        break;
      }
      case LayerSpec::Kind::Flatten:
        cur = cur.reshaped({cur.dim(0), cur.size() / cur.dim(0)});
        break;
      case LayerSpec::Kind::Activation: {
        VecX<S> y = act_apply<S>(l.act, cur.flat());
        cur = Tensor<S>(cur.shape(), std::move(y));
        break;
      }
    }
  }
  return cur;
}

// Logits for a batch: [B, out_width].
template <class S>
MatRM<S> predict(const NetworkSpec& spec, const ParameterSet<S>& params, const Tensor<S>& x) {
  Tensor<S> out = net_forward(spec, params, x);
  return MatRM<S>(out.rows_view());
}

// Fills `grads` (layout must match `params`) and returns the input gradient
// when requested. Each parameter entry is fully overwritten.
template <class S>
Tensor<S> net_backward_into(const NetworkSpec& spec, const ParameterSet<S>& params,
                            const ForwardCache<S>& cache, const Tensor<S>& grad_out,
                            ParameterSet<S>& grads, bool want_input_grad = false) {
  if (grads.total() != params.total())
    throw DimensionError("net_backward_into: gradient layout does not match parameters");
  Tensor<S> g = grad_out;
  std::size_t entry = params.count();
  for (std::size_t li = spec.layers.size(); li-- > 0;) {
    const LayerSpec& l = spec.layers[li];
    const Tensor<S>& x_in = cache.inputs[li];
    const bool need_gx = want_input_grad || li > 0;
    switch (l.kind) {
      case LayerSpec::Kind::Affine: {
        entry -= 2;
        auto back = affine_backward<S>(g.mat(), x_in.mat(), params.mat(entry));
        grads.mat(entry) = back.gW;
        grads.vec(entry + 1) = back.gb;
        g = detail::from_matrix<S>(back.gx);
        break;
      }
      case LayerSpec::Kind::Conv2d: {
        entry -= 2;
        Tensor<S> kernels({l.out_ch, l.in_ch, l.kernel, l.kernel}, VecX<S>(params.vec(entry)));
        auto back = conv2d_backward<S>(g, x_in, kernels, l.stride, need_gx);
        grads.vec(entry) = back.gkernels.flat();
        grads.vec(entry + 1) = back.gbias;
        if (need_gx) g = std::move(back.gx);
        break;
      }
      case LayerSpec::Kind::MaxPool2d:
        g = maxpool2d_backward<S>(g, cache.pool_idx[li], x_in.shape());
        break;
      case LayerSpec::Kind::Flatten:
        g = g.reshaped(x_in.shape());
        break;
      case LayerSpec::Kind::Activation: {
        VecX<S> gx = act_backward<S>(l.act, x_in.flat(), g.flat());
        g = Tensor<S>(x_in.shape(), std::move(gx));
        break;
      }
    }
    if (!need_gx && li == 0) break;
  }
  return want_input_grad ? g : Tensor<S>();
}

template <class S>
struct NetBackward {
  ParameterSet<S> grads;
  Tensor<S> grad_input;
};

template <class S>
NetBackward<S> net_backward(const NetworkSpec& spec, const ParameterSet<S>& params,
                            const ForwardCache<S>& cache, const Tensor<S>& grad_out,
                            bool want_input_grad = false) {
  NetBackward<S> out;
  out.grads = params.zeros_like();
  out.grad_input = net_backward_into(spec, params, cache, grad_out, out.grads, want_input_grad);
  return out;
}

// ---------------------------------------------------------------------------
// Default architectures
// ---------------------------------------------------------------------------

inline constexpr Eigen::Index kNumClasses = 20;  // two stacked 10-class tasks
inline constexpr Eigen::Index kImageSide = 28;
inline constexpr Eigen::Index kImagePixels = kImageSide * kImageSide;

struct ModelSpecs {
  NetworkSpec mlp;
  NetworkSpec cnn;
  NetworkSpec ewgn_main;
  NetworkSpec ewgn_hyper;
};

inline NetworkSpec make_mlp_spec() {
  NetworkSpec s;
  s.input_shape = {kImagePixels};
  s.layers = {LayerSpec::affine(kImagePixels, 128), LayerSpec::activation(Act::Relu),
              LayerSpec::affine(128, 64),           LayerSpec::activation(Act::Relu),
              LayerSpec::affine(64, kNumClasses)};
  return s;
}

inline NetworkSpec make_cnn_spec() {
  NetworkSpec s;
  s.input_shape = {1, kImageSide, kImageSide};
  s.layers = {LayerSpec::conv2d(1, 16, 3),  LayerSpec::activation(Act::Relu),
              LayerSpec::maxpool2d(),       LayerSpec::conv2d(16, 32, 3),
              LayerSpec::activation(Act::Relu), LayerSpec::maxpool2d(),
              LayerSpec::flatten(),         LayerSpec::affine(800, 64),
              LayerSpec::activation(Act::Relu), LayerSpec::affine(64, kNumClasses)};
  return s;
}

// The weight generator: tanh hidden stack, gaussian output so every
// generated weight lands in (0, 1].
inline NetworkSpec make_hyper_spec(Eigen::Index hidden, Eigen::Index main_param_count) {
  NetworkSpec s;
  s.input_shape = {kImagePixels};
  s.layers = {LayerSpec::affine(kImagePixels, hidden), LayerSpec::activation(Act::Tanh),
              LayerSpec::affine(hidden, main_param_count),
              LayerSpec::activation(Act::Gaussian)};
  return s;
}

// desk: reduced generated network (784-64-20) sized for CPU runs.
// fidelity: the generated network matches the MLP exactly.
// smoke: desk architecture; scale is cut by sample limits, not widths.
inline ModelSpecs build_default_specs(const std::string& mode) {
  if (mode != "desk" && mode != "fidelity" && mode != "smoke")
    throw ConfigError("unknown mode: " + mode + " (expected desk|fidelity|smoke)");
  ModelSpecs specs;
  specs.mlp = make_mlp_spec();
  specs.cnn = make_cnn_spec();
  if (mode == "fidelity") {
    specs.ewgn_main = specs.mlp;
  } else {
    specs.ewgn_main.input_shape = {kImagePixels};
    specs.ewgn_main.layers = {LayerSpec::affine(kImagePixels, 64),
                              LayerSpec::activation(Act::Relu),
                              LayerSpec::affine(64, kNumClasses)};
  }
  specs.ewgn_hyper = make_hyper_spec(64, specs.ewgn_main.parameter_count());
  return specs;
}

}  // namespace ewgn
