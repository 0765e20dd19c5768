#include <doctest.h>

#include <cmath>
#include <random>

#include "sfk/metrics.hpp"

using namespace sfk;

namespace {

DepthMap depth_from(const std::vector<double>& v, int w, int h) {
  DepthMap d(w, h);
  std::size_t i = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) d.set(x, y, v[i++]);
  }
  return d;
}

}  // namespace

TEST_CASE("eval_depth perfect prediction") {
  const auto gt = depth_from({2, 4, 8, 16}, 2, 2);
  DepthEvalConfig cfg;
  const auto m = eval_depth(gt, gt, cfg);
  CHECK(m.abs_rel == doctest::Approx(0.0));
  CHECK(m.rmse == doctest::Approx(0.0));
  CHECK(m.delta1 == doctest::Approx(1.0));
}

TEST_CASE("eval_depth median scaling restores global scale") {
  const auto gt = depth_from({2, 4, 8, 16}, 2, 2);
  auto pred = gt;
  for (auto& v : pred.values) v *= 0.5;
  DepthEvalConfig cfg;
  const auto m = eval_depth(pred, gt, cfg);
  CHECK(m.abs_rel == doctest::Approx(0.0));
  CHECK(m.rmse == doctest::Approx(0.0));
  CHECK(m.delta1 == doctest::Approx(1.0));
}

TEST_CASE("eval_depth hand-computed example, scaling off") {
  const auto gt = depth_from({2, 4}, 2, 1);
  const auto pred = depth_from({1, 2}, 2, 1);
  DepthEvalConfig cfg;
  cfg.median_scaling = false;
  const auto m = eval_depth(pred, gt, cfg);
  CHECK(m.abs_rel == doctest::Approx(0.5));
  CHECK(m.delta1 == doctest::Approx(0.0));  // ratio 2 >= 1.25
  CHECK(m.sq_rel == doctest::Approx((1.0 / 2.0 + 4.0 / 4.0) / 2.0));
  CHECK(m.rmse == doctest::Approx(std::sqrt((1.0 + 4.0) / 2.0)));
}

TEST_CASE("eval_depth rescaling invariance is bitwise") {
  std::mt19937_64 rng(70);
  std::uniform_real_distribution<double> d(1.0, 60.0);
  DepthMap gt(8, 8), pred(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      gt.set(x, y, d(rng));
      pred.set(x, y, d(rng));
    }
  }
  DepthEvalConfig cfg;
  const auto base = eval_depth(pred, gt, cfg);
  auto scaled = pred;
  for (auto& v : scaled.values) v *= 4.0;  // power of two: exact arithmetic
  const auto m = eval_depth(scaled, gt, cfg);
  CHECK(m.abs_rel == base.abs_rel);
  CHECK(m.sq_rel == base.sq_rel);
  CHECK(m.rmse == base.rmse);
  CHECK(m.rmse_log == base.rmse_log);
  CHECK(m.delta1 == base.delta1);
  CHECK(m.delta2 == base.delta2);
  CHECK(m.delta3 == base.delta3);
}

TEST_CASE("eval_depth range restriction and errors") {
  DepthMap gt(2, 1), pred(2, 1);
  gt.set(0, 0, 100.0);  // beyond the 80 m cap
  gt.set(1, 0, 10.0);
  pred.set(0, 0, 1.0);
  pred.set(1, 0, 10.0);
  DepthEvalConfig cfg;
  cfg.median_scaling = false;
  const auto m = eval_depth(pred, gt, cfg);
  CHECK(m.abs_rel == doctest::Approx(0.0));  // the out-of-range pixel is excluded

  DepthMap empty(2, 1);
  CHECK_THROWS_AS(eval_depth(pred, empty, cfg), NoValidPixels);
}

TEST_CASE("eval_flow perfect and outlier rule") {
  FlowField gt(2, 1), pred(2, 1);
  gt.set(0, 0, 10.0, 0.0);
  gt.set(1, 0, 100.0, 0.0);
  BinaryMask noc(2, 1, 1);

  auto m = eval_flow(gt, gt, noc);
  CHECK(m.epe_all == doctest::Approx(0.0));
  CHECK(m.f1 == doctest::Approx(0.0));

  // EPE 4 on |gt|=10 -> outlier; EPE 4 on |gt|=100 -> inlier
  pred.set(0, 0, 14.0, 0.0);
  pred.set(1, 0, 104.0, 0.0);
  m = eval_flow(pred, gt, noc);
  CHECK(m.epe_all == doctest::Approx(4.0));
  CHECK(m.f1 == doctest::Approx(0.5));
}

TEST_CASE("eval_flow noc restriction") {
  FlowField gt(2, 1), pred(2, 1);
  gt.set(0, 0, 1.0, 0.0);
  gt.set(1, 0, 1.0, 0.0);
  pred.set(0, 0, 1.0, 0.0);
  pred.set(1, 0, 3.0, 0.0);
  BinaryMask noc(2, 1);
  noc.at(0, 0) = 1;
  const auto m = eval_flow(pred, gt, noc);
  CHECK(m.epe_noc == doctest::Approx(0.0));
  CHECK(m.epe_all == doctest::Approx(1.0));
}

TEST_CASE("eval_flow brute-force recount on random instances") {
  std::mt19937_64 rng(80);
  std::uniform_real_distribution<double> d(-8.0, 8.0);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 16, h = 16;
    FlowField gt(w, h), pred(w, h);
    BinaryMask noc(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        gt.set(x, y, d(rng), d(rng));
        if (bit(rng)) gt.set_invalid(x, y);
        pred.set(x, y, d(rng), d(rng));
        noc.at(x, y) = static_cast<std::uint8_t>(bit(rng));
      }
    }
    std::size_t nall = 0, nout = 0;
    double sum = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto i = gt.idx(x, y);
        if (!gt.valid[i]) continue;
        const double epe = std::hypot(pred.u[i] - gt.u[i], pred.v[i] - gt.v[i]);
        sum += epe;
        ++nall;
        if (epe > 3.0 && epe > 0.05 * std::hypot(gt.u[i], gt.v[i])) ++nout;
      }
    }
    if (nall == 0) continue;
    const auto m = eval_flow(pred, gt, noc);
    CHECK(m.epe_all == doctest::Approx(sum / nall));
    CHECK(m.f1 == doctest::Approx(static_cast<double>(nout) / nall));
  }
}

TEST_CASE("eval_motion_seg perfect and hand-computed") {
  BinaryMask gt(2, 2), pred(2, 2);
  gt.at(0, 0) = 1;
  const auto perfect = eval_motion_seg(gt, gt);
  CHECK(perfect.pixel_acc == doctest::Approx(1.0));
  CHECK(perfect.mean_acc == doctest::Approx(1.0));
  CHECK(perfect.mean_iou == doctest::Approx(1.0));
  CHECK(perfect.fw_iou == doctest::Approx(1.0));

  pred.at(0, 0) = 1;
  pred.at(1, 0) = 1;
  const auto m = eval_motion_seg(pred, gt);
  CHECK(m.pixel_acc == doctest::Approx(3.0 / 4.0));
  CHECK(m.mean_iou == doctest::Approx(7.0 / 12.0));  // (1/2 + 2/3)/2
  CHECK(m.mean_acc == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
  CHECK(m.fw_iou == doctest::Approx(0.25 * 0.5 + 0.75 * (2.0 / 3.0)));
}

TEST_CASE("eval_motion_seg degenerate all static") {
  BinaryMask gt(3, 3), pred(3, 3);
  const auto m = eval_motion_seg(pred, gt);
  CHECK(m.pixel_acc == doctest::Approx(1.0));
  CHECK(m.mean_iou == doctest::Approx(1.0));  // moving class absent everywhere: excluded
}

TEST_CASE("eval_motion_seg matches brute-force confusion recount") {
  std::mt19937_64 rng(83);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    BinaryMask gt(16, 16), pred(16, 16);
    for (std::size_t i = 0; i < gt.bits.size(); ++i) {
      gt.bits[i] = static_cast<std::uint8_t>(bit(rng));
      pred.bits[i] = static_cast<std::uint8_t>(bit(rng));
    }
    std::uint64_t cm[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < gt.bits.size(); ++i) ++cm[gt.bits[i]][pred.bits[i]];
    const double total = 256.0;
    const auto m = eval_motion_seg(pred, gt);
    CHECK(m.pixel_acc == doctest::Approx((cm[0][0] + cm[1][1]) / total));
    const double iou0 =
        static_cast<double>(cm[0][0]) / (cm[0][0] + cm[0][1] + cm[1][0]);
    const double iou1 =
        static_cast<double>(cm[1][1]) / (cm[1][1] + cm[1][0] + cm[0][1]);
    CHECK(m.mean_iou == doctest::Approx((iou0 + iou1) / 2.0));
  }
}

TEST_CASE("eval_semantic perfect, constant and ignore handling") {
  LabelMap gt(4, 1), pred(4, 1);
  for (int x = 0; x < 4; ++x) gt.at(x, 0) = pred.at(x, 0) = static_cast<std::uint16_t>(x);
  const auto perfect = eval_semantic(pred, gt, 19);
  CHECK(perfect.miou_class == doctest::Approx(1.0));
  CHECK(perfect.pixel_acc == doctest::Approx(1.0));

  // prediction constant A, gt half A half B
  LabelMap gt2(4, 1), pred2(4, 1, 0);
  gt2.at(0, 0) = 0;
  gt2.at(1, 0) = 0;
  gt2.at(2, 0) = 1;
  gt2.at(3, 0) = 1;
  const auto m = eval_semantic(pred2, gt2, 19);
  // IoU_A = 2/4, IoU_B = 0, mIoU = 1/4
  CHECK(m.miou_class == doctest::Approx(0.25));
  CHECK(m.pixel_acc == doctest::Approx(0.5));

  LabelMap all_ignore(2, 2);  // defaults to the ignore label
  CHECK_THROWS_AS(eval_semantic(all_ignore, all_ignore, 19), NoValidPixels);

  LabelMap bad(1, 1, 30);
  LabelMap g(1, 1, 0);
  CHECK_THROWS_AS(eval_semantic(bad, g, 19), UnknownClassId);
}

TEST_CASE("eval_semantic categories collapse related classes") {
  // car (13) predicted as truck (14): wrong class, same vehicle category
  LabelMap gt(2, 1), pred(2, 1);
  gt.at(0, 0) = 13;
  gt.at(1, 0) = 0;
  pred.at(0, 0) = 14;
  pred.at(1, 0) = 0;
  const auto m = eval_semantic(pred, gt, 19);
  CHECK(m.miou_category == doctest::Approx(1.0));
  CHECK(m.miou_class < 1.0);
}

TEST_CASE("metrics are pixel-permutation invariant") {
  std::mt19937_64 rng(90);
  std::uniform_real_distribution<double> d(1.0, 50.0);
  const int n = 36;
  DepthMap gt(6, 6), pred(6, 6);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 6; ++x) {
      gt.set(x, y, d(rng));
      pred.set(x, y, d(rng));
    }
  }
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  DepthMap gt2(6, 6), pred2(6, 6);
  for (int i = 0; i < n; ++i) {
    gt2.values[i] = gt.values[perm[i]];
    gt2.valid[i] = 1;
    pred2.values[i] = pred.values[perm[i]];
    pred2.valid[i] = 1;
  }
  DepthEvalConfig cfg;
  const auto a = eval_depth(pred, gt, cfg);
  const auto b = eval_depth(pred2, gt2, cfg);
  CHECK(a.abs_rel == doctest::Approx(b.abs_rel));
  CHECK(a.rmse == doctest::Approx(b.rmse));
  CHECK(a.delta1 == doctest::Approx(b.delta1));
}

TEST_CASE("delta thresholds are monotone") {
  std::mt19937_64 rng(95);
  std::uniform_real_distribution<double> d(1.0, 70.0);
  DepthMap gt(8, 8), pred(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      gt.set(x, y, d(rng));
      pred.set(x, y, d(rng));
    }
  }
  const auto m = eval_depth(pred, gt, DepthEvalConfig{});
  CHECK(m.delta1 <= m.delta2);
  CHECK(m.delta2 <= m.delta3);
  CHECK(m.delta3 <= 1.0);
}
