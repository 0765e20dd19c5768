#include <doctest.h>

#include <cmath>
#include <random>

#include "sfk/core.hpp"

using namespace sfk;

TEST_CASE("flow_norm basics") {
  FlowField f(3, 1);
  f.set(0, 0, 3.0, 4.0);
  f.set(1, 0, 0.0, 0.0);
  f.set(2, 0, -1.0, 0.0);
  const auto n = flow_norm(f);
  CHECK(n.at(0, 0) == doctest::Approx(5.0));
  CHECK(n.at(1, 0) == doctest::Approx(0.0));
  CHECK(n.at(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("flow_norm invalid pixels stay invalid") {
  FlowField f(2, 1);
  f.set(0, 0, 1.0, 1.0);
  f.set_invalid(1, 0);
  const auto n = flow_norm(f);
  CHECK(n.is_valid(0, 0));
  CHECK(!n.is_valid(1, 0));
}

TEST_CASE("flow_norm non-negative and triangle inequality") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> d(-50.0, 50.0);
  for (int trial = 0; trial < 100; ++trial) {
    FlowField a(8, 8), b(8, 8), sum(8, 8);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        a.set(x, y, d(rng), d(rng));
        b.set(x, y, d(rng), d(rng));
        sum.set(x, y, a.u[a.idx(x, y)] + b.u[b.idx(x, y)],
                a.v[a.idx(x, y)] + b.v[b.idx(x, y)]);
      }
    }
    const auto na = flow_norm(a), nb = flow_norm(b), ns = flow_norm(sum);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      CHECK(ns.values[i] >= 0.0);
      CHECK(ns.values[i] <= na.values[i] + nb.values[i] + 1e-12);
    }
  }
}

TEST_CASE("mask_logic truth table and bounds") {
  BinaryMask a(2, 1), b(2, 1);
  a.at(0, 0) = 1;
  a.at(1, 0) = 1;
  b.at(0, 0) = 0;
  b.at(1, 0) = 1;
  const auto land = mask_logic(a, b, MaskOp::And);
  const auto lor = mask_logic(a, b, MaskOp::Or);
  CHECK(land.at(0, 0) == 0);
  CHECK(land.at(1, 0) == 1);
  CHECK(lor.at(0, 0) == 1);
  CHECK(lor.at(1, 0) == 1);
  for (std::size_t i = 0; i < land.bits.size(); ++i) {
    CHECK(land.bits[i] <= a.bits[i]);
    CHECK(land.bits[i] <= b.bits[i]);
    CHECK(lor.bits[i] >= a.bits[i]);
    CHECK(lor.bits[i] >= b.bits[i]);
  }
}

TEST_CASE("mask_logic rejects dimension mismatch") {
  BinaryMask a(2, 2), b(3, 2);
  CHECK_THROWS_AS(mask_logic(a, b, MaskOp::And), DimensionMismatch);
}

TEST_CASE("image_gradients on constant and ramp") {
  ImageBuffer c(4, 4, 1, 0.7);
  auto [cgx, cgy] = image_gradients(c);
  for (double v : cgx.values) CHECK(v == 0.0);
  for (double v : cgy.values) CHECK(v == 0.0);

  ImageBuffer ramp(4, 4, 1);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) ramp.at(x, y, 0) = x;
  }
  auto [gx, gy] = image_gradients(ramp);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 3; ++x) CHECK(gx.at(x, y) == doctest::Approx(1.0));
    CHECK(gx.at(3, y) == 0.0);
    for (int x = 0; x < 4; ++x) CHECK(gy.at(x, y) == 0.0);
  }
}

TEST_CASE("image_gradients 2x2 forward difference") {
  ImageBuffer img(2, 2, 1);
  img.at(0, 0, 0) = 0.0;
  img.at(1, 0, 0) = 1.0;
  img.at(0, 1, 0) = 0.0;
  img.at(1, 1, 0) = 1.0;
  auto [gx, gy] = image_gradients(img);
  CHECK(gx.at(0, 0) == 1.0);
  CHECK(gx.at(1, 0) == 0.0);
  CHECK(gx.at(0, 1) == 1.0);
  CHECK(gx.at(1, 1) == 0.0);
}

TEST_CASE("constructors reject NaN and Inf") {
  CHECK_THROWS_AS(ImageBuffer::from_data(1, 1, 1, {std::nan("")}), InvalidValue);
  CHECK_THROWS_AS(ImageBuffer::from_data(1, 1, 3, {0.5, 0.5, 2.0}), InvalidValue);
  CHECK_THROWS_AS(DepthMap::from_values(1, 1, {-1.0}, {1}), InvalidValue);
  CHECK_THROWS_AS(DepthMap::from_values(1, 1, {INFINITY}, {1}), InvalidValue);
  CHECK_THROWS_AS(FlowField::from_components(1, 1, {std::nan("")}, {0.0}, {1}),
                  InvalidValue);
  CHECK_THROWS_AS(BinaryMask::from_bits(1, 1, {2}), InvalidValue);
  // invalid entries may carry anything
  CHECK_NOTHROW(DepthMap::from_values(1, 1, {-1.0}, {0}));
}
