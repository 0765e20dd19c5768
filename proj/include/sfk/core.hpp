#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sfk/errors.hpp"

namespace sfk {

// Grid convention: x rightward, y downward, origin at the top-left pixel
// center. All buffers are row-major; images are channel-interleaved.

/// H×W scalar raster with per-pixel validity. Used for error maps,
/// flow norms and other intermediate quantities.
struct ScalarMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  ScalarMap() = default;
  ScalarMap(int w, int h, double fill = 0.0);

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  bool is_valid(int x, int y) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }
  void set_valid(int x, int y, bool v) { valid[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t size() const { return values.size(); }
};

/// RGB (or single/dual channel) frame with samples in [0,1].
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, double fill = 0.0);

  // Validates finiteness and, for 3-channel buffers, the [0,1] range.
  static ImageBuffer from_data(int w, int h, int c, std::vector<double> samples);

  double& at(int x, int y, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

/// Metric depth per pixel; invalid pixels are excluded from every reduction.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int w, int h);

  // Valid entries must be strictly positive and finite.
  static DepthMap from_values(int w, int h, std::vector<double> values,
                              std::vector<std::uint8_t> valid);

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  bool is_valid(int x, int y) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, double d) {
    values[static_cast<std::size_t>(y) * width + x] = d;
    valid[static_cast<std::size_t>(y) * width + x] = 1;
  }
  void set_invalid(int x, int y) {
    values[static_cast<std::size_t>(y) * width + x] = 0.0;
    valid[static_cast<std::size_t>(y) * width + x] = 0;
  }
};

/// 2D displacement field, u positive rightward, v positive downward (pixels).
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<std::uint8_t> valid;

  FlowField() = default;
  FlowField(int w, int h);

  static FlowField from_components(int w, int h, std::vector<double> u,
                                   std::vector<double> v,
                                   std::vector<std::uint8_t> valid);

  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  bool is_valid(int x, int y) const { return valid[idx(x, y)] != 0; }
  void set(int x, int y, double du, double dv) {
    u[idx(x, y)] = du;
    v[idx(x, y)] = dv;
    valid[idx(x, y)] = 1;
  }
  void set_invalid(int x, int y) {
    u[idx(x, y)] = 0.0;
    v[idx(x, y)] = 0.0;
    valid[idx(x, y)] = 0;
  }
};

inline constexpr std::uint16_t kIgnoreLabel = 255;

/// Semantic class ids in [0,254]; 255 is the ignore label.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> ids;

  LabelMap() = default;
  LabelMap(int w, int h, std::uint16_t fill = kIgnoreLabel);

  std::uint16_t& at(int x, int y) { return ids[static_cast<std::size_t>(y) * width + x]; }
  std::uint16_t at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }
};

/// {0,1} per pixel.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, std::uint8_t fill = 0);

  static BinaryMask from_bits(int w, int h, std::vector<std::uint8_t> bits);

  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
};

/// Per-pixel motion probability in [0,1].
struct MotionProbMap {
  int width = 0;
  int height = 0;
  std::vector<double> p;
  std::vector<std::uint8_t> valid;

  MotionProbMap() = default;
  MotionProbMap(int w, int h);

  double& at(int x, int y) { return p[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return p[static_cast<std::size_t>(y) * width + x]; }
  bool is_valid(int x, int y) const { return valid[static_cast<std::size_t>(y) * width + x] != 0; }
};

enum class MaskOp { And, Or };

/// Per-pixel Euclidean norm sqrt(u^2+v^2); invalid where the flow is invalid.
ScalarMap flow_norm(const FlowField& f);

/// Elementwise min (And) or max (Or) of two masks.
BinaryMask mask_logic(const BinaryMask& a, const BinaryMask& b, MaskOp op);

/// Forward differences along x and y. Multi-channel input yields the
/// channel-averaged absolute gradient; last column/row gradients are 0.
std::pair<ScalarMap, ScalarMap> image_gradients(const ImageBuffer& img);

namespace detail {
void require_same_size(int wa, int ha, int wb, int hb, const char* what);
}

}  // namespace sfk
