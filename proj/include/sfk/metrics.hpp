#pragma once

#include <map>
#include <vector>

#include "sfk/core.hpp"

namespace sfk {

struct DepthEvalConfig {
  double min_depth = 1e-3;
  double max_depth = 80.0;
  bool median_scaling = true;

  void validate() const;
};

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

struct FlowMetrics {
  double epe_noc = 0.0;
  double epe_all = 0.0;
  double f1 = 0.0;
  std::size_t valid_all = 0;
  std::size_t valid_noc = 0;
};

struct SegMetrics {
  double pixel_acc = 0.0;
  double mean_acc = 0.0;
  double mean_iou = 0.0;
  double fw_iou = 0.0;
};

struct SemanticMetrics {
  double miou_class = 0.0;
  double miou_category = 0.0;
  double pixel_acc = 0.0;
};

/// Standard monocular depth protocol: restrict to in-range valid gt pixels,
/// optionally median-scale the prediction, clamp to the range, then compute
/// AbsRel / SqRel / RMSE / RMSE(log) / delta thresholds.
DepthMetrics eval_depth(const DepthMap& pred, const DepthMap& gt,
                        const DepthEvalConfig& cfg);

/// KITTI flow protocol: EPE over valid gt (all) and valid∩noc (noc); F1 is
/// the fraction of valid pixels with EPE > 3 px and EPE > 5% of |gt|.
FlowMetrics eval_flow(const FlowField& pred, const FlowField& gt,
                      const BinaryMask& noc_mask);

/// Two-class confusion-matrix metrics over {static, moving}. Classes absent
/// from both prediction and ground truth are excluded from the means.
SegMetrics eval_motion_seg(const BinaryMask& pred, const BinaryMask& gt);

/// Cityscapes train-id to category-id mapping (7 categories).
const std::map<int, int>& default_category_map();

/// Confusion-matrix mIoU over classes and categories plus pixel accuracy;
/// ignore-label pixels are excluded.
SemanticMetrics eval_semantic(const LabelMap& pred, const LabelMap& gt, int class_count,
                              const std::map<int, int>& category_map = default_category_map());

/// Confusion-matrix accumulator so multi-frame evaluation can sum counts
/// before computing ratios.
struct ConfusionMatrix {
  int classes = 0;
  std::vector<std::uint64_t> counts;  // [gt * classes + pred]

  explicit ConfusionMatrix(int n) : classes(n), counts(static_cast<std::size_t>(n) * n, 0) {}
  void add(int gt, int pred) { ++counts[static_cast<std::size_t>(gt) * classes + pred]; }
  std::uint64_t at(int gt, int pred) const {
    return counts[static_cast<std::size_t>(gt) * classes + pred];
  }
  void merge(const ConfusionMatrix& other);
};

}  // namespace sfk
