#pragma once

#include <array>
#include <utility>

#include "sfk/core.hpp"

namespace sfk {

/// Pinhole intrinsics (no distortion).
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_);
};

/// Rigid transform mapping target-camera coordinates into the source frame:
/// x_s = R * x_t + t.
struct RelativePose {
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
  std::array<double, 3> translation{0, 0, 0};

  RelativePose() = default;
  RelativePose(const std::array<double, 9>& r, const std::array<double, 3>& t,
               double tol = 1e-9);

  static RelativePose identity() { return {}; }

  RelativePose inverse() const;
  /// Composition: (other ∘ this), i.e. apply this first.
  RelativePose then(const RelativePose& other) const;

  std::array<double, 3> apply(const std::array<double, 3>& x) const;
};

/// Rotation about the z (optical) axis by angle radians.
RelativePose rotation_about_z(double angle, const std::array<double, 3>& t = {0, 0, 0});

struct ReprojectResult {
  double x = 0.0;       // source pixel x (undefined if behind_camera)
  double y = 0.0;       // source pixel y
  double depth = 0.0;   // z in the source camera frame
  bool behind_camera = false;
};

/// Back-project pixel (x,y) at depth d, transform by T and project into the
/// source view. Throws NonPositiveDepth for d <= 0; flags z_s <= 0 as
/// behind_camera (pixel coordinates undefined in that case).
ReprojectResult reproject(double x, double y, double d, const CameraIntrinsics& k,
                          const RelativePose& t);

/// Camera-motion flow: F(p) = reproject(p) - p. Invalid where the depth is
/// invalid or the point lands behind the source camera.
FlowField rigid_flow(const DepthMap& depth, const CameraIntrinsics& k,
                     const RelativePose& t);

/// 1 where the rigidly reprojected pixel stays inside [0,W-1]x[0,H-1] and in
/// front of the camera, 0 otherwise (including invalid-depth pixels).
BinaryMask boundary_mask(const DepthMap& depth, const CameraIntrinsics& k,
                         const RelativePose& t);

/// Sample src at p + f(p) with bilinear interpolation, clamping sample
/// coordinates to the image bounds.
ImageBuffer bilinear_warp(const ImageBuffer& src, const FlowField& f);

/// Partial derivatives of the warped image with respect to the flow
/// components. At integer sample coordinates the right-hand derivative is
/// used; outside the clamp range the derivative is 0.
std::pair<ImageBuffer, ImageBuffer> bilinear_warp_jacobian(const ImageBuffer& src,
                                                           const FlowField& f);

}  // namespace sfk
