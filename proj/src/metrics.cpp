#include "sfk/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace sfk {

void DepthEvalConfig::validate() const {
  if (!(min_depth >= 0.0) || !(min_depth < max_depth)) {
    throw InvalidValue("DepthEvalConfig: need 0 <= min_depth < max_depth");
  }
}

namespace {

double median(std::vector<double> v) {
  const auto n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.begin() + n / 2);
  return (v[n / 2 - 1] + hi) / 2.0;
}

}  // namespace

DepthMetrics eval_depth(const DepthMap& pred, const DepthMap& gt,
                        const DepthEvalConfig& cfg) {
  detail::require_same_size(pred.width, pred.height, gt.width, gt.height, "eval_depth");
  cfg.validate();
  std::vector<double> p, g;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    if (!gt.valid[i] || !pred.valid[i]) continue;
    if (gt.values[i] <= cfg.min_depth || gt.values[i] > cfg.max_depth) continue;
    p.push_back(pred.values[i]);
    g.push_back(gt.values[i]);
  }
  if (p.empty()) throw NoValidPixels("eval_depth: no valid gt pixels in range");
  if (cfg.median_scaling) {
    const double scale = median(g) / median(p);
    for (double& x : p) x *= scale;
  }
  for (double& x : p) x = std::clamp(x, cfg.min_depth, cfg.max_depth);

  DepthMetrics m;
  const double n = static_cast<double>(p.size());
  double se = 0.0, sle = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - g[i];
    m.abs_rel += std::abs(d) / g[i];
    m.sq_rel += d * d / g[i];
    se += d * d;
    const double dl = std::log(p[i]) - std::log(g[i]);
    sle += dl * dl;
    const double ratio = std::max(p[i] / g[i], g[i] / p[i]);
    if (ratio < 1.25) m.delta1 += 1.0;
    if (ratio < 1.25 * 1.25) m.delta2 += 1.0;
    if (ratio < 1.25 * 1.25 * 1.25) m.delta3 += 1.0;
  }
  m.abs_rel /= n;
  m.sq_rel /= n;
  m.rmse = std::sqrt(se / n);
  m.rmse_log = std::sqrt(sle / n);
  m.delta1 /= n;
  m.delta2 /= n;
  m.delta3 /= n;
  return m;
}

FlowMetrics eval_flow(const FlowField& pred, const FlowField& gt,
                      const BinaryMask& noc_mask) {
  detail::require_same_size(pred.width, pred.height, gt.width, gt.height, "eval_flow");
  detail::require_same_size(pred.width, pred.height, noc_mask.width, noc_mask.height,
                            "eval_flow: noc mask");
  FlowMetrics m;
  double sum_all = 0.0, sum_noc = 0.0;
  std::size_t outliers = 0;
  for (std::size_t i = 0; i < gt.u.size(); ++i) {
    if (!gt.valid[i]) continue;
    const double du = pred.u[i] - gt.u[i];
    const double dv = pred.v[i] - gt.v[i];
    const double epe = std::hypot(du, dv);
    sum_all += epe;
    ++m.valid_all;
    if (noc_mask.bits[i]) {
      sum_noc += epe;
      ++m.valid_noc;
    }
    const double mag = std::hypot(gt.u[i], gt.v[i]);
    if (epe > 3.0 && epe > 0.05 * mag) ++outliers;
  }
  if (m.valid_all == 0) throw NoValidPixels("eval_flow: no valid gt pixels");
  m.epe_all = sum_all / m.valid_all;
  m.epe_noc = m.valid_noc ? sum_noc / m.valid_noc : 0.0;
  m.f1 = static_cast<double>(outliers) / m.valid_all;
  return m;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes != classes) throw DimensionMismatch("ConfusionMatrix: class count");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

SegMetrics eval_motion_seg(const BinaryMask& pred, const BinaryMask& gt) {
  detail::require_same_size(pred.width, pred.height, gt.width, gt.height,
                            "eval_motion_seg");
  ConfusionMatrix cm(2);
  for (std::size_t i = 0; i < gt.bits.size(); ++i) cm.add(gt.bits[i], pred.bits[i]);

  const double total = static_cast<double>(gt.bits.size());
  SegMetrics m;
  m.pixel_acc = (cm.at(0, 0) + cm.at(1, 1)) / total;
  double acc_sum = 0.0, iou_sum = 0.0, fw = 0.0;
  int acc_n = 0, iou_n = 0;
  for (int k = 0; k < 2; ++k) {
    const double gt_k = static_cast<double>(cm.at(k, 0) + cm.at(k, 1));
    const double pred_k = static_cast<double>(cm.at(0, k) + cm.at(1, k));
    const double tp = static_cast<double>(cm.at(k, k));
    if (gt_k > 0) {
      acc_sum += tp / gt_k;
      ++acc_n;
    }
    const double uni = gt_k + pred_k - tp;
    if (uni > 0) {  // class present somewhere
      iou_sum += tp / uni;
      ++iou_n;
      fw += (gt_k / total) * (tp / uni);
    }
  }
  m.mean_acc = acc_n ? acc_sum / acc_n : 0.0;
  m.mean_iou = iou_n ? iou_sum / iou_n : 0.0;
  m.fw_iou = fw;
  return m;
}

const std::map<int, int>& default_category_map() {
  // Cityscapes train ids -> 7 categories:
  // 0 flat, 1 construction, 2 object, 3 nature, 4 sky, 5 human, 6 vehicle
  static const std::map<int, int> table{
      {0, 0},  {1, 0},  {2, 1},  {3, 1},  {4, 1},  {5, 2},  {6, 2},
      {7, 2},  {8, 3},  {9, 3},  {10, 4}, {11, 5}, {12, 5}, {13, 6},
      {14, 6}, {15, 6}, {16, 6}, {17, 6}, {18, 6}};
  return table;
}

namespace {

double miou_from_confusion(const ConfusionMatrix& cm) {
  double iou_sum = 0.0;
  int n = 0;
  for (int k = 0; k < cm.classes; ++k) {
    double gt_k = 0.0, pred_k = 0.0;
    for (int j = 0; j < cm.classes; ++j) {
      gt_k += static_cast<double>(cm.at(k, j));
      pred_k += static_cast<double>(cm.at(j, k));
    }
    const double tp = static_cast<double>(cm.at(k, k));
    const double uni = gt_k + pred_k - tp;
    if (uni > 0) {
      iou_sum += tp / uni;
      ++n;
    }
  }
  return n ? iou_sum / n : 0.0;
}

}  // namespace

SemanticMetrics eval_semantic(const LabelMap& pred, const LabelMap& gt, int class_count,
                              const std::map<int, int>& category_map) {
  detail::require_same_size(pred.width, pred.height, gt.width, gt.height, "eval_semantic");
  if (class_count < 1) throw InvalidValue("eval_semantic: class_count must be >= 1");
  int cat_count = 0;
  for (const auto& [cls, cat] : category_map) cat_count = std::max(cat_count, cat + 1);

  ConfusionMatrix cm(class_count);
  ConfusionMatrix cat_cm(std::max(cat_count, 1));
  std::uint64_t correct = 0, counted = 0;
  for (std::size_t i = 0; i < gt.ids.size(); ++i) {
    const int g = gt.ids[i];
    if (g == kIgnoreLabel) continue;
    const int p = pred.ids[i];
    if (g >= class_count) throw UnknownClassId("eval_semantic: gt class id out of range");
    if (p >= class_count || p == kIgnoreLabel) {
      throw UnknownClassId("eval_semantic: predicted class id out of range");
    }
    cm.add(g, p);
    ++counted;
    if (g == p) ++correct;
    const auto gi = category_map.find(g);
    const auto pi = category_map.find(p);
    if (gi != category_map.end() && pi != category_map.end()) {
      cat_cm.add(gi->second, pi->second);
    }
  }
  if (counted == 0) throw NoValidPixels("eval_semantic: all pixels ignored");

  SemanticMetrics m;
  m.miou_class = miou_from_confusion(cm);
  m.miou_category = miou_from_confusion(cat_cm);
  m.pixel_acc = static_cast<double>(correct) / static_cast<double>(counted);
  return m;
}

}  // namespace sfk
