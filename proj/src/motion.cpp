#include "sfk/motion.hpp"

#include <algorithm>
#include <cmath>

namespace sfk {

const std::set<int>& default_dynamic_class_ids() {
  // person, rider, car, truck, bus, train, motorcycle, bicycle (train ids)
  static const std::set<int> ids{11, 12, 13, 14, 15, 16, 17, 18};
  return ids;
}

void MotionConfig::validate() const {
  if (xi < 0.0 || xi > 1.0) throw InvalidValue("MotionConfig: xi must be in [0,1]");
  if (tau < 0.0 || tau > 1.0) throw InvalidValue("MotionConfig: tau must be in [0,1]");
  if (!(eps_norm > 0.0)) throw InvalidValue("MotionConfig: eps_norm must be > 0");
}

MotionProbMap motion_probability(const FlowField& f, const FlowField& fr,
                                 const MotionConfig& cfg) {
  detail::require_same_size(f.width, f.height, fr.width, fr.height, "motion_probability");
  cfg.validate();
  MotionProbMap out(f.width, f.height);
  for (std::size_t i = 0; i < out.p.size(); ++i) {
    if (!f.valid[i] || !fr.valid[i]) {
      out.p[i] = 0.0;
      out.valid[i] = 0;
      continue;
    }
    const double na = std::hypot(f.u[i], f.v[i]);
    const double nb = std::hypot(fr.u[i], fr.v[i]);
    const bool za = na < cfg.eps_norm;
    const bool zb = nb < cfg.eps_norm;
    if (za && zb) {
      out.p[i] = 0.0;  // no motion evidence on either side
      continue;
    }
    double cos_theta, rho;
    if (za || zb) {
      // One vanishing vector: no usable direction, vanishing norm ratio.
      cos_theta = 1.0;
      rho = std::min(na, nb) / std::max(na, nb);
    } else {
      cos_theta = (f.u[i] * fr.u[i] + f.v[i] * fr.v[i]) / (na * nb);
      cos_theta = std::clamp(cos_theta, -1.0, 1.0);
      rho = std::min(na, nb) / std::max(na, nb);
    }
    out.p[i] = std::clamp(std::max((1.0 - cos_theta) / 2.0, 1.0 - rho), 0.0, 1.0);
  }
  return out;
}

BinaryMask consistency_mask(const MotionProbMap& p, const MotionConfig& cfg) {
  cfg.validate();
  BinaryMask out(p.width, p.height);
  for (std::size_t i = 0; i < out.bits.size(); ++i) {
    out.bits[i] = (p.valid[i] && p.p[i] < cfg.xi) ? 1 : 0;
  }
  return out;
}

BinaryMask dynamic_prior_mask(const LabelMap& s, const MotionConfig& cfg) {
  cfg.validate();
  BinaryMask out(s.width, s.height);
  for (std::size_t i = 0; i < out.bits.size(); ++i) {
    const int id = s.ids[i];
    if (id == kIgnoreLabel) continue;
    if (id < 0 || id > 254) throw UnknownClassId("dynamic_prior_mask: class id out of range");
    out.bits[i] = cfg.dynamic_class_ids.count(id) ? 1 : 0;
  }
  return out;
}

BinaryMask final_mask(const BinaryMask& md, const BinaryMask& mc, const BinaryMask& mb) {
  return mask_logic(mask_logic(md, mc, MaskOp::Or), mb, MaskOp::And);
}

BinaryMask motion_segmentation(const FlowField& sf, const FlowField& fr,
                               const LabelMap& s, const MotionConfig& cfg) {
  detail::require_same_size(sf.width, sf.height, s.width, s.height, "motion_segmentation");
  const MotionProbMap p = motion_probability(sf, fr, cfg);
  const BinaryMask md = dynamic_prior_mask(s, cfg);
  BinaryMask out(sf.width, sf.height);
  for (std::size_t i = 0; i < out.bits.size(); ++i) {
    out.bits[i] = (md.bits[i] && p.valid[i] && p.p[i] > cfg.tau) ? 1 : 0;
  }
  return out;
}

}  // namespace sfk
