#pragma once

#include <vector>

#include "sfk/core.hpp"
#include "sfk/geometry.hpp"

namespace sfk {

struct PhotometricConfig {
  double alpha_ssim = 0.85;
  int ssim_window = 3;       // odd
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;

  void validate() const;
};

struct DistillConfig {
  double alpha_r = 0.025;
  double alpha_d = 0.2;
  double smoothness_weight = 0.0;  // optional TV regularizer in refine_flow

  void validate() const;
};

/// Per-pixel SSIM+L1 mix:
///   psi = alpha_ssim * (1 - SSIM(a,b))/2 + (1 - alpha_ssim) * |a - b|_1
/// with channel-mean L1 and windowed SSIM (reflection padding).
ScalarMap photometric_error(const ImageBuffer& a, const ImageBuffer& b,
                            const PhotometricConfig& cfg);

/// Per-pixel minimum across source-view error maps; a pixel is invalid only
/// where every input is invalid.
ScalarMap min_reprojection(const std::vector<ScalarMap>& err_maps);

/// 1 where the warped reconstruction strictly beats the identity error.
BinaryMask automask(const ScalarMap& warped_err, const ScalarMap& identity_err);

/// Divide valid depths by their mean; the result has valid-mean 1.
DepthMap depth_normalize(const DepthMap& d);

/// Edge-aware first-order smoothness of mean-normalized depth:
/// mean |dx d*| e^-|dx I| + |dy d*| e^-|dy I|.
double smoothness_loss(const DepthMap& d, const ImageBuffer& img);

struct LossBreakdown {
  double total = 0.0;
  double rigid_term = 0.0;
  double teacher_term = 0.0;
  double photo_term = 0.0;
  ScalarMap rigid_map;
  ScalarMap teacher_map;
  ScalarMap photo_map;
};

/// Masked self-distillation objective over the student flow sf:
///   L = mean_p [ a_r*phi(sf,f_rigid)*(1-M) + a_d*phi(sf,f_teacher)*M
///                + psi(I_t, warp(I_s, sf))*M ]
/// phi is the per-component L1 distance. With several source images the
/// photometric maps combine through min_reprojection before masking.
/// Pixels where any flow input is invalid contribute zero.
LossBreakdown self_distillation_loss(const FlowField& sf, const FlowField& f_teacher,
                                     const FlowField& f_rigid, const BinaryMask& m,
                                     const ImageBuffer& it,
                                     const std::vector<ImageBuffer>& sources,
                                     const DistillConfig& cfg,
                                     const PhotometricConfig& pcfg);

/// Gradient of self_distillation_loss.total with respect to (u,v) at every
/// pixel. L1 terms use sign subgradients (sign(0)=0); the L1 part of psi
/// goes through bilinear_warp_jacobian; the SSIM part, when active, is
/// evaluated by local central differences with step 1e-3.
FlowField self_distillation_gradient(const FlowField& sf, const FlowField& f_teacher,
                                     const FlowField& f_rigid, const BinaryMask& m,
                                     const ImageBuffer& it,
                                     const std::vector<ImageBuffer>& sources,
                                     const DistillConfig& cfg,
                                     const PhotometricConfig& pcfg);

struct RefineResult {
  FlowField flow;
  std::vector<double> loss_history;  // objective before each step, then final
};

/// Plain gradient descent sf <- sf - lr * dL/dsf. smoothness_weight > 0 adds
/// an anisotropic TV pull on the flow components during the update.
RefineResult refine_flow(const FlowField& init, const FlowField& f_teacher,
                         const FlowField& f_rigid, const BinaryMask& m,
                         const ImageBuffer& it, const std::vector<ImageBuffer>& sources,
                         const DistillConfig& cfg, const PhotometricConfig& pcfg,
                         int steps, double lr);

}  // namespace sfk
