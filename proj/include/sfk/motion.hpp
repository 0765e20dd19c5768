#pragma once

#include <set>

#include "sfk/core.hpp"

namespace sfk {

/// Cityscapes train ids of classes that can move in the world.
const std::set<int>& default_dynamic_class_ids();

struct MotionConfig {
  double xi = 0.5;        // consistency threshold (P < xi => consistent)
  double tau = 0.5;       // motion threshold (P > tau => moving)
  double eps_norm = 1e-3; // zero-vector guard, pixels
  std::set<int> dynamic_class_ids = default_dynamic_class_ids();

  void validate() const;
};

/// Per-pixel probability that the two flows disagree in direction or norm:
/// P = max{(1 - cos a)/2, 1 - min(|f|,|fr|)/max(|f|,|fr|)}.
/// If both norms fall below eps_norm, P = 0; if exactly one does, P = 1.
MotionProbMap motion_probability(const FlowField& f, const FlowField& fr,
                                 const MotionConfig& cfg);

/// 1 where P < xi (trusted region), 0 elsewhere. Invalid probability
/// pixels map to 0.
BinaryMask consistency_mask(const MotionProbMap& p, const MotionConfig& cfg);

/// 1 where the semantic class belongs to the dynamic set; ignore-label
/// pixels map to 0. Unlisted out-of-range ids raise UnknownClassId.
BinaryMask dynamic_prior_mask(const LabelMap& s, const MotionConfig& cfg);

/// M = (M^d OR M^c) AND M^b.
BinaryMask final_mask(const BinaryMask& md, const BinaryMask& mc, const BinaryMask& mb);

/// M^mot = M^d * [P > tau] with P computed between sf and fr.
BinaryMask motion_segmentation(const FlowField& sf, const FlowField& fr,
                               const LabelMap& s, const MotionConfig& cfg);

}  // namespace sfk
