#include "sfk/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace sfk {

CameraIntrinsics::CameraIntrinsics(double fx_, double fy_, double cx_, double cy_)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidValue("CameraIntrinsics: fx, fy must be > 0");
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw InvalidValue("CameraIntrinsics: principal point must be finite");
  }
}

namespace {

double det3(const std::array<double, 9>& r) {
  return r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
         r[2] * (r[3] * r[7] - r[4] * r[6]);
}

double orthonormality_defect(const std::array<double, 9>& r) {
  // max abs entry of R^T R - I
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += r[3 * k + i] * r[3 * k + j];
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

}  // namespace

RelativePose::RelativePose(const std::array<double, 9>& r, const std::array<double, 3>& t,
                           double tol)
    : rotation(r), translation(t) {
  if (orthonormality_defect(r) > tol) {
    throw NonOrthonormalRotation("RelativePose: R^T R deviates from identity");
  }
  if (std::abs(det3(r) - 1.0) > tol) {
    throw NonOrthonormalRotation("RelativePose: det(R) != +1");
  }
  for (double x : t) {
    if (!std::isfinite(x)) throw InvalidValue("RelativePose: non-finite translation");
  }
}

RelativePose RelativePose::inverse() const {
  RelativePose out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.rotation[3 * i + j] = rotation[3 * j + i];
  }
  for (int i = 0; i < 3; ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += out.rotation[3 * i + j] * translation[j];
    out.translation[i] = -s;
  }
  return out;
}

RelativePose RelativePose::then(const RelativePose& other) const {
  RelativePose out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += other.rotation[3 * i + k] * rotation[3 * k + j];
      out.rotation[3 * i + j] = s;
    }
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += other.rotation[3 * i + k] * translation[k];
    out.translation[i] = s + other.translation[i];
  }
  return out;
}

std::array<double, 3> RelativePose::apply(const std::array<double, 3>& x) const {
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) {
    out[i] = rotation[3 * i + 0] * x[0] + rotation[3 * i + 1] * x[1] +
             rotation[3 * i + 2] * x[2] + translation[i];
  }
  return out;
}

RelativePose rotation_about_z(double angle, const std::array<double, 3>& t) {
  const double c = std::cos(angle), s = std::sin(angle);
  RelativePose out;
  out.rotation = {c, -s, 0, s, c, 0, 0, 0, 1};
  out.translation = t;
  return out;
}

ReprojectResult reproject(double x, double y, double d, const CameraIntrinsics& k,
                          const RelativePose& t) {
  if (!(d > 0.0)) throw NonPositiveDepth("reproject: depth must be > 0");
  // Back-project to the target camera frame.
  const std::array<double, 3> pt{d * (x - k.cx) / k.fx, d * (y - k.cy) / k.fy, d};
  const std::array<double, 3> ps = t.apply(pt);
  ReprojectResult out;
  out.depth = ps[2];
  if (ps[2] <= 0.0) {
    out.behind_camera = true;
    return out;
  }
  out.x = k.fx * ps[0] / ps[2] + k.cx;
  out.y = k.fy * ps[1] / ps[2] + k.cy;
  return out;
}

FlowField rigid_flow(const DepthMap& depth, const CameraIntrinsics& k,
                     const RelativePose& t) {
  FlowField out(depth.width, depth.height);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      if (!depth.is_valid(x, y)) {
        out.set_invalid(x, y);
        continue;
      }
      const auto r = reproject(x, y, depth.at(x, y), k, t);
      if (r.behind_camera) {
        out.set_invalid(x, y);
      } else {
        out.set(x, y, r.x - x, r.y - y);
      }
    }
  }
  return out;
}

BinaryMask boundary_mask(const DepthMap& depth, const CameraIntrinsics& k,
                         const RelativePose& t) {
  BinaryMask out(depth.width, depth.height);
  for (int y = 0; y < depth.height; ++y) {
    for (int x = 0; x < depth.width; ++x) {
      if (!depth.is_valid(x, y)) continue;
      const auto r = reproject(x, y, depth.at(x, y), k, t);
      if (r.behind_camera) continue;
      if (r.x >= 0.0 && r.x <= depth.width - 1 && r.y >= 0.0 && r.y <= depth.height - 1) {
        out.at(x, y) = 1;
      }
    }
  }
  return out;
}

namespace {

struct Tap {
  int x0, x1, y0, y1;
  double fx, fy;
};

Tap sample_tap(double sx, double sy, int w, int h) {
  sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
  Tap t;
  t.x0 = static_cast<int>(std::floor(sx));
  t.y0 = static_cast<int>(std::floor(sy));
  t.x1 = std::min(t.x0 + 1, w - 1);
  t.y1 = std::min(t.y0 + 1, h - 1);
  t.fx = sx - t.x0;
  t.fy = sy - t.y0;
  return t;
}

}  // namespace

ImageBuffer bilinear_warp(const ImageBuffer& src, const FlowField& f) {
  detail::require_same_size(src.width, src.height, f.width, f.height, "bilinear_warp");
  ImageBuffer out(src.width, src.height, src.channels);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      const auto i = f.idx(x, y);
      const Tap t = sample_tap(x + f.u[i], y + f.v[i], src.width, src.height);
      for (int c = 0; c < src.channels; ++c) {
        const double top = (1 - t.fx) * src.at(t.x0, t.y0, c) + t.fx * src.at(t.x1, t.y0, c);
        const double bot = (1 - t.fx) * src.at(t.x0, t.y1, c) + t.fx * src.at(t.x1, t.y1, c);
        out.at(x, y, c) = (1 - t.fy) * top + t.fy * bot;
      }
    }
  }
  return out;
}

std::pair<ImageBuffer, ImageBuffer> bilinear_warp_jacobian(const ImageBuffer& src,
                                                           const FlowField& f) {
  detail::require_same_size(src.width, src.height, f.width, f.height,
                            "bilinear_warp_jacobian");
  ImageBuffer du(src.width, src.height, src.channels);
  ImageBuffer dv(src.width, src.height, src.channels);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      const auto i = f.idx(x, y);
      const double sx = x + f.u[i];
      const double sy = y + f.v[i];
      // Zero derivative once the clamp saturates.
      const bool live_x = sx >= 0.0 && sx < src.width - 1;
      const bool live_y = sy >= 0.0 && sy < src.height - 1;
      const Tap t = sample_tap(sx, sy, src.width, src.height);
      for (int c = 0; c < src.channels; ++c) {
        const double dx0 = src.at(t.x1, t.y0, c) - src.at(t.x0, t.y0, c);
        const double dx1 = src.at(t.x1, t.y1, c) - src.at(t.x0, t.y1, c);
        const double dy0 = src.at(t.x0, t.y1, c) - src.at(t.x0, t.y0, c);
        const double dy1 = src.at(t.x1, t.y1, c) - src.at(t.x1, t.y0, c);
        du.at(x, y, c) = live_x ? (1 - t.fy) * dx0 + t.fy * dx1 : 0.0;
        dv.at(x, y, c) = live_y ? (1 - t.fx) * dy0 + t.fx * dy1 : 0.0;
      }
    }
  }
  return {du, dv};
}

}  // namespace sfk
