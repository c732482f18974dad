#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ewgn/optim.hpp"
#include "support.hpp"

using namespace ewgn;

TEST_CASE("sgd hand cases") {
  VecX<double> p(1), g(1);
  p << 1.0;
  g << 2.0;
  sgd_step<double>(p, g, 0.1);
  CHECK(p[0] == doctest::Approx(0.8).epsilon(1e-14));

  VecX<double> p2 = VecX<double>::Constant(5, 3.0);
  sgd_step<double>(p2, VecX<double>::Zero(5), 0.5);
  CHECK(p2.isConstant(3.0));  // zero gradient

  VecX<double> p3 = p2;
  sgd_step<double>(p3, VecX<double>::Constant(5, 9.0), 0.0);
  CHECK(p3 == p2);  // zero rate

  CHECK_THROWS_AS(sgd_step<double>(p2, VecX<double>::Zero(3), 0.1), DimensionError);
}

TEST_CASE("adam first step approaches lr in magnitude") {
  AdamState<double> st(1);
  VecX<double> p = VecX<double>::Zero(1);
  VecX<double> g(1);
  g << 0.5;
  adam_step<double>(st, p, g, 0.001);

  // independent one-step recurrence
  const double m = 0.1 * 0.5, v = 0.001 * 0.25;
  const double mhat = m / 0.1, vhat = v / 0.001;
  const double expected = -0.001 * mhat / (std::sqrt(vhat) + 1e-8);
  CHECK(p[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(p[0] + 0.001) < 1e-7);
  CHECK(st.t == 1);
}

TEST_CASE("adam ignores zero gradients at t=0") {
  AdamState<double> st(3);
  VecX<double> p = VecX<double>::Constant(3, 1.5);
  adam_step<double>(st, p, VecX<double>::Zero(3), 0.01);
  CHECK(p.isConstant(1.5));
}

TEST_CASE("adam update magnitude bounded by lr for constant gradients") {
  for (double scale : {1e-6, 1.0, 1e6}) {
    AdamState<double> st(1);
    VecX<double> p = VecX<double>::Zero(1);
    VecX<double> g(1);
    g << scale;
    double prev = p[0];
    for (int t = 0; t < 25; ++t) {
      adam_step<double>(st, p, g, 0.001);
      CHECK(std::abs(p[0] - prev) <= 0.001 * 1.0001);
      prev = p[0];
    }
  }
}

TEST_CASE("adam is deterministic") {
  SplitMix64 rng(3);
  VecX<double> g = test::random_vec<double>(16, rng);
  AdamState<double> a(16), b(16);
  VecX<double> pa = VecX<double>::Zero(16), pb = pa;
  for (int t = 0; t < 10; ++t) {
    adam_step<double>(a, pa, g, 0.01);
    adam_step<double>(b, pb, g, 0.01);
  }
  CHECK(pa == pb);
}

TEST_CASE("adam rejects non-finite gradients") {
  AdamState<double> st(2);
  VecX<double> p = VecX<double>::Zero(2);
  VecX<double> g(2);
  g << 1.0, std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(adam_step<double>(st, p, g, 0.01), NumericError);
}
