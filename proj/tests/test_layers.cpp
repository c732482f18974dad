#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ewgn/gradient_check.hpp"
#include "ewgn/layers.hpp"
#include "support.hpp"

using namespace ewgn;

namespace {

// Packs (inputs, params) into one vector and runs gradient_check against the
// layer's analytic backward. `loss = sum(c .* y)` for a fixed random c keeps
// the scalarization independent of the layer under test.
template <class Forward, class Backward>
GradCheckReport check_layer(Forward&& fwd, Backward&& bwd, VecX<double> theta) {
  auto fn = [&](const VecX<double>& t, VecX<double>* grad) -> double {
    return grad ? bwd(t, grad) : fwd(t);
  };
  return gradient_check(fn, std::move(theta));
}

}  // namespace

// ---------------------------------------------------------------------------
// affine
// ---------------------------------------------------------------------------

TEST_CASE("affine identity and hand cases") {
  Tensor<double> x({1, 2}, {1.0, 2.0});
  Tensor<double> W({2, 2}, {1.0, 0.0, 0.0, 1.0});
  Tensor<double> b({2}, {0.0, 0.0});
  MatRM<double> y = affine_forward<double>(x.mat(), W.mat(), b.flat());
  CHECK(y(0, 0) == 1.0);
  CHECK(y(0, 1) == 2.0);

  Tensor<double> W2({2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor<double> x2({1, 2}, {1.0, 1.0});
  Tensor<double> b2({2}, {1.0, 0.0});
  MatRM<double> y2 = affine_forward<double>(x2.mat(), W2.mat(), b2.flat());
  CHECK(y2(0, 0) == 5.0);
  CHECK(y2(0, 1) == 6.0);

  Tensor<double> wide({1, 3}, {1.0, 2.0, 3.0});
  CHECK_THROWS_AS(affine_forward<double>(wide.mat(), W2.mat(), b2.flat()), DimensionError);
}

TEST_CASE("affine backward hand cases") {
  Tensor<double> x({1, 1}, {2.0});
  Tensor<double> W({1, 1}, {3.0});
  Tensor<double> gy({1, 1}, {1.0});
  auto g = affine_backward<double>(gy.mat(), x.mat(), W.mat());
  CHECK(g.gW(0, 0) == 2.0);
  CHECK(g.gx(0, 0) == 3.0);
  CHECK(g.gb[0] == 1.0);

  Tensor<double> gz({1, 1}, {0.0});
  auto g0 = affine_backward<double>(gz.mat(), x.mat(), W.mat());
  CHECK(g0.gW.isZero());
  CHECK(g0.gx.isZero());
  CHECK(g0.gb.isZero());
}

TEST_CASE("affine gradient matches finite differences") {
  SplitMix64 rng(11);
  const Eigen::Index B = 3, in = 4, out = 5;
  MatRM<double> c(B, out);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform(-1, 1);

  const Eigen::Index nW = in * out, nb = out, nx = B * in;
  auto unpack = [&](const VecX<double>& t) {
    Tensor<double> W({in, out}, VecX<double>(t.segment(0, nW)));
    Tensor<double> b({out}, VecX<double>(t.segment(nW, nb)));
    Tensor<double> x({B, in}, VecX<double>(t.segment(nW + nb, nx)));
    return std::make_tuple(W, b, x);
  };
  auto fwd = [&](const VecX<double>& t) {
    auto [W, b, x] = unpack(t);
    return (affine_forward<double>(x.mat(), W.mat(), b.flat()).array() * c.array()).sum();
  };
  auto bwd = [&](const VecX<double>& t, VecX<double>* grad) {
    auto [W, b, x] = unpack(t);
    auto g = affine_backward<double>(MatRef<double>(c), x.mat(), W.mat());
    grad->resize(t.size());
    grad->segment(0, nW) = Eigen::Map<VecX<double>>(g.gW.data(), nW);
    grad->segment(nW, nb) = g.gb;
    grad->segment(nW + nb, nx) = Eigen::Map<VecX<double>>(g.gx.data(), nx);
    return fwd(t);
  };
  auto report = check_layer(fwd, bwd, test::random_vec<double>(nW + nb + nx, rng));
  CHECK(report.max_rel_error < 1e-4);
}

// ---------------------------------------------------------------------------
// conv2d
// ---------------------------------------------------------------------------

TEST_CASE("conv identity kernel") {
  SplitMix64 rng(3);
  Tensor<double> x = test::random_tensor<double>({2, 1, 4, 4}, rng);
  Tensor<double> k({1, 1, 1, 1}, {1.0});
  VecX<double> b = VecX<double>::Zero(1);
  Tensor<double> y = conv2d_forward<double>(x, k, b, 1);
  CHECK(y.shape() == x.shape());
  CHECK((y.flat() - x.flat()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("conv all-ones kernel computes window sums") {
  Tensor<double> x({1, 1, 4, 4});
  for (int i = 0; i < 16; ++i) x.flat()[i] = i + 1;
  Tensor<double> k = Tensor<double>::full({1, 1, 3, 3}, 1.0);
  VecX<double> b = VecX<double>::Zero(1);
  Tensor<double> y = conv2d_forward<double>(x, k, b, 1);
  CHECK(y.dim(2) == 2);
  CHECK(y.flat()[0] == 54.0);
  CHECK(y.flat()[1] == 63.0);
  CHECK(y.flat()[2] == 90.0);
  CHECK(y.flat()[3] == 99.0);

  // cross-check against the independent brute-force oracle
  Tensor<double> ref = test::conv2d_bruteforce(x, k, b, 1);
  CHECK((y.flat() - ref.flat()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conv matches brute force on random cases") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index B = 1 + rng.below(2), C = 1 + rng.below(3), OC = 1 + rng.below(4);
    const Eigen::Index k = 1 + rng.below(3);
    const Eigen::Index H = k + rng.below(5), W = k + rng.below(5);
    const Eigen::Index stride = 1 + rng.below(2);
    Tensor<float> x = test::random_tensor<float>({B, C, H, W}, rng);
    Tensor<float> kern = test::random_tensor<float>({OC, C, k, k}, rng);
    VecX<float> bias = test::random_vec<float>(OC, rng);
    Tensor<float> y = conv2d_forward<float>(x, kern, bias, stride);
    Tensor<float> ref = test::conv2d_bruteforce(x, kern, bias, stride);
    CHECK((y.flat() - ref.flat()).cwiseAbs().maxCoeff() < 1e-6f);
  }
}

TEST_CASE("conv rejects oversized kernels") {
  Tensor<double> x({1, 1, 2, 2});
  Tensor<double> k({1, 1, 3, 3});
  VecX<double> b = VecX<double>::Zero(1);
  CHECK_THROWS_AS(conv2d_forward<double>(x, k, b, 1), DimensionError);
}

TEST_CASE("conv gradient matches finite differences") {
  SplitMix64 rng(23);
  const Eigen::Index B = 2, C = 2, H = 5, W = 5, OC = 3, k = 3, stride = 1;
  const Eigen::Index out_h = conv_out_dim(H, k, stride), out_w = conv_out_dim(W, k, stride);
  Tensor<double> c = test::random_tensor<double>({B, OC, out_h, out_w}, rng);

  const Eigen::Index nk = OC * C * k * k, nb = OC, nx = B * C * H * W;
  auto unpack = [&](const VecX<double>& t) {
    Tensor<double> kern({OC, C, k, k}, VecX<double>(t.segment(0, nk)));
    VecX<double> bias = t.segment(nk, nb);
    Tensor<double> x({B, C, H, W}, VecX<double>(t.segment(nk + nb, nx)));
    return std::make_tuple(kern, bias, x);
  };
  auto fwd = [&](const VecX<double>& t) {
    auto [kern, bias, x] = unpack(t);
    return (conv2d_forward<double>(x, kern, bias, stride).flat().array() * c.flat().array())
        .sum();
  };
  auto bwd = [&](const VecX<double>& t, VecX<double>* grad) {
    auto [kern, bias, x] = unpack(t);
    auto g = conv2d_backward<double>(c, x, kern, stride, true);
    grad->resize(t.size());
    grad->segment(0, nk) = g.gkernels.flat();
    grad->segment(nk, nb) = g.gbias;
    grad->segment(nk + nb, nx) = g.gx.flat();
    return fwd(t);
  };
  auto report = check_layer(fwd, bwd, test::random_vec<double>(nk + nb + nx, rng));
  CHECK(report.max_rel_error < 1e-4);
}

// ---------------------------------------------------------------------------
// maxpool
// ---------------------------------------------------------------------------

TEST_CASE("maxpool hand case and tie rule") {
  Tensor<double> x({1, 1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
  auto out = maxpool2d_forward<double>(x, 2, 2);
  CHECK(out.y.size() == 1);
  CHECK(out.y.flat()[0] == 4.0);
  CHECK(out.argmax[0] == 3);

  // constant input: first window element wins every tie
  Tensor<double> cst = Tensor<double>::full({1, 1, 4, 4}, 2.5);
  auto o2 = maxpool2d_forward<double>(cst, 2, 2);
  CHECK(o2.y.flat().isConstant(2.5));
  Tensor<double> gy = Tensor<double>::full({1, 1, 2, 2}, 1.0);
  Tensor<double> gx = maxpool2d_backward<double>(gy, o2.argmax, cst.shape());
  // gradient lands only on the top-left corner of each window
  for (Eigen::Index r = 0; r < 4; ++r)
    for (Eigen::Index cidx = 0; cidx < 4; ++cidx)
      CHECK(gx.flat()[r * 4 + cidx] == ((r % 2 == 0 && cidx % 2 == 0) ? 1.0 : 0.0));
}

TEST_CASE("maxpool crops trailing rows and columns") {
  // 5x5 input, window 2, stride 2 -> 2x2 output; last row/col unused
  Tensor<double> x({1, 1, 5, 5});
  for (int i = 0; i < 25; ++i) x.flat()[i] = i;
  auto out = maxpool2d_forward<double>(x, 2, 2);
  CHECK(out.y.dim(2) == 2);
  CHECK(out.y.dim(3) == 2);
  CHECK(out.y.flat()[3] == 18.0);  // max of rows 2-3, cols 2-3
}

TEST_CASE("maxpool gradient matches finite differences") {
  SplitMix64 rng(31);
  const Eigen::Index B = 2, C = 2, H = 4, W = 4;
  Tensor<double> c = test::random_tensor<double>({B, C, 2, 2}, rng);
  auto fwd = [&](const VecX<double>& t) {
    Tensor<double> x({B, C, H, W}, t);
    auto out = maxpool2d_forward<double>(x, 2, 2);
    return (out.y.flat().array() * c.flat().array()).sum();
  };
  auto bwd = [&](const VecX<double>& t, VecX<double>* grad) {
    Tensor<double> x({B, C, H, W}, t);
    auto out = maxpool2d_forward<double>(x, 2, 2);
    Tensor<double> gx = maxpool2d_backward<double>(c, out.argmax, x.shape());
    *grad = gx.flat();
    return (out.y.flat().array() * c.flat().array()).sum();
  };
  // well-separated values so no tie sits within finite-difference reach
  VecX<double> theta(B * C * H * W);
  std::vector<std::uint32_t> order(theta.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = std::uint32_t(i);
  shuffle(order, rng);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = 0.01 * order[i];
  auto report = check_layer(fwd, bwd, theta);
  CHECK(report.max_rel_error < 1e-4);
}

// ---------------------------------------------------------------------------
// activations
// ---------------------------------------------------------------------------

TEST_CASE("gaussian activation values and symmetry") {
  VecX<double> x(3);
  x << 0.0, 1.0, -1.0;
  VecX<double> y = act_apply<double>(Act::Gaussian, x);
  CHECK(y[0] == 1.0);
  CHECK(std::abs(y[1] - 0.36788) < 1e-5);
  CHECK(y[1] == y[2]);  // even function

  SplitMix64 rng(5);
  for (int i = 0; i < 200; ++i) {
    double v = rng.uniform(-6, 6);
    VecX<double> xs(2);
    xs << v, -v;
    VecX<double> ys = act_apply<double>(Act::Gaussian, xs);
    CHECK(ys[0] == ys[1]);
    CHECK(ys[0] > 0.0);
    CHECK(ys[0] <= 1.0);
    if (v != 0.0) CHECK(ys[0] < 1.0);  // peak only at zero
  }
}

TEST_CASE("activation parsing") {
  CHECK(act_from_string("relu") == Act::Relu);
  CHECK(act_from_string("gaussian") == Act::Gaussian);
  CHECK_THROWS_AS(act_from_string("swish"), ConfigError);
}

TEST_CASE("activation gradients match finite differences") {
  SplitMix64 rng(41);
  for (Act a : {Act::Relu, Act::Tanh, Act::Sigmoid, Act::Gaussian}) {
    CAPTURE(act_to_string(a));
    VecX<double> c = test::random_vec<double>(20, rng);
    auto fwd = [&](const VecX<double>& t) {
      return (act_apply<double>(a, t).array() * c.array()).sum();
    };
    auto bwd = [&](const VecX<double>& t, VecX<double>* grad) {
      *grad = act_backward<double>(a, t, c);
      return fwd(t);
    };
    // keep relu inputs away from the kink
    VecX<double> theta = test::random_vec<double>(20, rng);
    for (Eigen::Index i = 0; i < theta.size(); ++i)
      if (std::abs(theta[i]) < 1e-3) theta[i] = 0.5;
    auto report = check_layer(fwd, bwd, theta);
    CHECK(report.max_rel_error < 1e-4);
  }
}

// ---------------------------------------------------------------------------
// softmax cross-entropy
// ---------------------------------------------------------------------------

TEST_CASE("uniform logits give ln 20") {
  MatRM<double> logits = MatRM<double>::Zero(1, 20);
  MatRM<double> target = MatRM<double>::Zero(1, 20);
  target(0, 7) = 1.0;
  auto out = softmax_cross_entropy<double>(logits, target);
  CHECK(out.loss == std::log(20.0));  // exact at zero logits

  MatRM<double> shifted = MatRM<double>::Constant(1, 20, 3.7);
  auto out2 = softmax_cross_entropy<double>(shifted, target);
  CHECK(out2.loss == doctest::Approx(std::log(20.0)).epsilon(1e-12));
}

TEST_CASE("softmax-CE gradient sums to zero and rejects bad targets") {
  SplitMix64 rng(53);
  MatRM<double> logits(1, 20);
  for (int i = 0; i < 20; ++i) logits(0, i) = rng.uniform(-2, 2);
  MatRM<double> target = MatRM<double>::Zero(1, 20);
  target(0, 4) = 1.0;
  auto out = softmax_cross_entropy<double>(logits, target);
  CHECK(std::abs(out.grad.sum()) < 1e-12);
  CHECK(out.loss >= 0.0);

  MatRM<double> two = target;
  two(0, 5) = 1.0;
  CHECK_THROWS_AS(softmax_cross_entropy<double>(logits, two), DataError);
  MatRM<double> soft = target;
  soft(0, 5) = 0.25;
  CHECK_THROWS_AS(softmax_cross_entropy<double>(logits, soft), DataError);
}

TEST_CASE("softmax-CE gradient matches finite differences") {
  SplitMix64 rng(61);
  MatRM<double> target = MatRM<double>::Zero(1, 20);
  target(0, 13) = 1.0;
  auto fwd = [&](const VecX<double>& t) {
    Eigen::Map<const MatRM<double>> logits(t.data(), 1, 20);
    return softmax_cross_entropy<double>(logits, target).loss;
  };
  auto bwd = [&](const VecX<double>& t, VecX<double>* grad) {
    Eigen::Map<const MatRM<double>> logits(t.data(), 1, 20);
    auto out = softmax_cross_entropy<double>(logits, target);
    *grad = Eigen::Map<VecX<double>>(out.grad.data(), 20);
    return out.loss;
  };
  auto report = check_layer(fwd, bwd, test::random_vec<double>(20, rng, -2, 2));
  CHECK(report.max_rel_error < 1e-4);
}

// ---------------------------------------------------------------------------
// the gradient checker itself
// ---------------------------------------------------------------------------

TEST_CASE("gradient_check is near-exact on linear functions") {
  VecX<double> slope(5);
  slope << 1.0, -2.0, 0.5, 3.0, -0.7;
  auto fn = [&](const VecX<double>& t, VecX<double>* grad) {
    if (grad) *grad = slope;
    return slope.dot(t);
  };
  SplitMix64 rng(71);
  auto report = gradient_check(fn, test::random_vec<double>(5, rng));
  CHECK(report.max_rel_error < 1e-9);
}

TEST_CASE("gradient_check flags a corrupted backward") {
  VecX<double> slope(4);
  slope << 1.0, 2.0, 3.0, 4.0;
  auto fn = [&](const VecX<double>& t, VecX<double>* grad) {
    if (grad) {
      *grad = slope;
      (*grad)[2] = -(*grad)[2];  // deliberate sign flip
    }
    return slope.dot(t);
  };
  SplitMix64 rng(73);
  auto report = gradient_check(fn, test::random_vec<double>(4, rng));
  CHECK(report.max_rel_error > 1e-2);
  CHECK(report.worst_index == 2);
}

TEST_CASE("gradient_check rejects non-finite losses") {
  auto fn = [&](const VecX<double>&, VecX<double>* grad) {
    if (grad) grad->setZero(1);
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(gradient_check(fn, VecX<double>::Zero(1)), NumericError);
}
