#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ewgn/parameter_set.hpp"
#include "ewgn/rng.hpp"
#include "ewgn/tensor.hpp"
#include "support.hpp"

using namespace ewgn;

TEST_CASE("tensor shape bookkeeping") {
  Tensor<float> t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.flat().isZero());

  t.mat()(1, 2) = 5.0f;
  CHECK(t.flat()[5] == 5.0f);  // row-major layout

  Tensor<float> r = t.reshaped({3, 2});
  CHECK(r.dim(0) == 3);
  CHECK(r.flat()[5] == 5.0f);

  CHECK_THROWS_AS(t.reshaped({4, 2}), DimensionError);
  CHECK_THROWS_AS(Tensor<float>({2, 0}), DimensionError);
  CHECK_THROWS_AS(Tensor<float>({3}, {1.0f, 2.0f}), DimensionError);
}

TEST_CASE("tensor literal and cast") {
  Tensor<float> t({2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
  Tensor<double> d = t.cast<double>();
  CHECK(d.flat()[3] == doctest::Approx(4.0));
  CHECK(t.all_finite());
}

TEST_CASE("parameter set layout and views") {
  ParameterSet<float> ps;
  ps.add("fc0.weight", {3, 2});
  ps.add("fc0.bias", {2});
  ps.add("fc1.weight", {2, 4});
  CHECK(ps.total() == 6 + 2 + 8);
  CHECK(ps.entry(1).offset == 6);
  CHECK(ps.index_of("fc1.weight") == 2);
  CHECK_THROWS_AS(ps.add("fc0.bias", {2}), ConfigError);
  CHECK_THROWS_AS(ps.index_of("nope"), ConfigError);

  ps.mat(0)(2, 1) = 7.0f;
  CHECK(ps.flat()[5] == 7.0f);
  ps.vec(1)[0] = -1.0f;
  CHECK(ps.flat()[6] == -1.0f);
  CHECK_THROWS_AS(ps.mat(1), DimensionError);  // bias is rank-1
}

TEST_CASE("flatten/unflatten round-trip identity") {
  SplitMix64 rng(99);
  ParameterSet<float> ps;
  ps.add("a.weight", {4, 5});
  ps.add("a.bias", {5});
  ps.add("b.weight", {5, 3});
  ps.add("b.bias", {3});

  for (int trial = 0; trial < 50; ++trial) {
    VecX<float> v = test::random_vec<float>(ps.total(), rng, -10.0, 10.0);
    ps.assign_flat(v);
    CHECK(ps.flat() == v);
    // entry views tile the flat vector exactly, in order
    Eigen::Index off = 0;
    for (std::size_t e = 0; e < ps.count(); ++e) {
      CHECK(ps.entry(e).offset == off);
      CHECK(ps.vec(e) == v.segment(off, ps.entry(e).size));
      off += ps.entry(e).size;
    }
    CHECK(off == ps.total());
  }
  CHECK_THROWS_AS(ps.assign_flat(VecX<float>::Zero(3)), DimensionError);
}

TEST_CASE("zeros_like preserves layout") {
  ParameterSet<double> ps;
  ps.add("w", {2, 2});
  ps.flat().setConstant(3.0);
  auto z = ps.zeros_like();
  CHECK(z.total() == 4);
  CHECK(z.flat().isZero());
  CHECK(z.entry(0).name == "w");
}

TEST_CASE("splitmix64 streams are deterministic and well spread") {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  SplitMix64 c(7);
  int buckets[8] = {0};
  for (int i = 0; i < 8000; ++i) buckets[c.below(8)]++;
  for (int k = 0; k < 8; ++k) CHECK(buckets[k] > 800);  // crude uniformity

  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double u = c.next_double();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(lo < 0.05);
  CHECK(hi > 0.95);
}
