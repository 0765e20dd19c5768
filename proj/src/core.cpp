#include "sfk/core.hpp"

#include <cmath>
#include <string>

namespace sfk {

namespace detail {

void require_same_size(int wa, int ha, int wb, int hb, const char* what) {
  if (wa != wb || ha != hb) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(wa) + "x" +
                            std::to_string(ha) + " vs " + std::to_string(wb) + "x" +
                            std::to_string(hb));
  }
}

}  // namespace detail

namespace {

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidValue(std::string(what) + ": non-finite sample");
  }
}

}  // namespace

ScalarMap::ScalarMap(int w, int h, double fill)
    : width(w), height(h),
      values(static_cast<std::size_t>(w) * h, fill),
      valid(static_cast<std::size_t>(w) * h, 1) {}

ImageBuffer::ImageBuffer(int w, int h, int c, double fill)
    : width(w), height(h), channels(c),
      data(static_cast<std::size_t>(w) * h * c, fill) {}

ImageBuffer ImageBuffer::from_data(int w, int h, int c, std::vector<double> samples) {
  if (c < 1 || c > 3) throw InvalidValue("ImageBuffer: channels must be 1, 2 or 3");
  if (samples.size() != static_cast<std::size_t>(w) * h * c) {
    throw DimensionMismatch("ImageBuffer: payload size does not match dimensions");
  }
  require_finite(samples, "ImageBuffer");
  if (c == 3) {
    for (double x : samples) {
      if (x < 0.0 || x > 1.0) throw InvalidValue("ImageBuffer: RGB sample outside [0,1]");
    }
  }
  ImageBuffer img;
  img.width = w;
  img.height = h;
  img.channels = c;
  img.data = std::move(samples);
  return img;
}

DepthMap::DepthMap(int w, int h)
    : width(w), height(h),
      values(static_cast<std::size_t>(w) * h, 0.0),
      valid(static_cast<std::size_t>(w) * h, 0) {}

DepthMap DepthMap::from_values(int w, int h, std::vector<double> values,
                               std::vector<std::uint8_t> valid) {
  const auto n = static_cast<std::size_t>(w) * h;
  if (values.size() != n || valid.size() != n) {
    throw DimensionMismatch("DepthMap: payload size does not match dimensions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i] && (!std::isfinite(values[i]) || values[i] <= 0.0)) {
      throw InvalidValue("DepthMap: valid entries must be finite and > 0");
    }
  }
  DepthMap d;
  d.width = w;
  d.height = h;
  d.values = std::move(values);
  d.valid = std::move(valid);
  return d;
}

FlowField::FlowField(int w, int h)
    : width(w), height(h),
      u(static_cast<std::size_t>(w) * h, 0.0),
      v(static_cast<std::size_t>(w) * h, 0.0),
      valid(static_cast<std::size_t>(w) * h, 1) {}

FlowField FlowField::from_components(int w, int h, std::vector<double> u,
                                     std::vector<double> v,
                                     std::vector<std::uint8_t> valid) {
  const auto n = static_cast<std::size_t>(w) * h;
  if (u.size() != n || v.size() != n || valid.size() != n) {
    throw DimensionMismatch("FlowField: payload size does not match dimensions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i] && (!std::isfinite(u[i]) || !std::isfinite(v[i]))) {
      throw InvalidValue("FlowField: valid entries must be finite");
    }
  }
  FlowField f;
  f.width = w;
  f.height = h;
  f.u = std::move(u);
  f.v = std::move(v);
  f.valid = std::move(valid);
  return f;
}

LabelMap::LabelMap(int w, int h, std::uint16_t fill)
    : width(w), height(h), ids(static_cast<std::size_t>(w) * h, fill) {}

BinaryMask::BinaryMask(int w, int h, std::uint8_t fill)
    : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

BinaryMask BinaryMask::from_bits(int w, int h, std::vector<std::uint8_t> bits) {
  if (bits.size() != static_cast<std::size_t>(w) * h) {
    throw DimensionMismatch("BinaryMask: payload size does not match dimensions");
  }
  for (auto b : bits) {
    if (b > 1) throw InvalidValue("BinaryMask: values must be 0 or 1");
  }
  BinaryMask m;
  m.width = w;
  m.height = h;
  m.bits = std::move(bits);
  return m;
}

MotionProbMap::MotionProbMap(int w, int h)
    : width(w), height(h),
      p(static_cast<std::size_t>(w) * h, 0.0),
      valid(static_cast<std::size_t>(w) * h, 1) {}

ScalarMap flow_norm(const FlowField& f) {
  ScalarMap out(f.width, f.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (f.valid[i]) {
      out.values[i] = std::hypot(f.u[i], f.v[i]);
    } else {
      out.values[i] = 0.0;
      out.valid[i] = 0;
    }
  }
  return out;
}

BinaryMask mask_logic(const BinaryMask& a, const BinaryMask& b, MaskOp op) {
  detail::require_same_size(a.width, a.height, b.width, b.height, "mask_logic");
  BinaryMask out(a.width, a.height);
  for (std::size_t i = 0; i < out.bits.size(); ++i) {
    out.bits[i] = op == MaskOp::And ? std::min(a.bits[i], b.bits[i])
                                    : std::max(a.bits[i], b.bits[i]);
  }
  return out;
}

std::pair<ScalarMap, ScalarMap> image_gradients(const ImageBuffer& img) {
  ScalarMap gx(img.width, img.height);
  ScalarMap gy(img.width, img.height);
  const bool multi = img.channels > 1;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double sx = 0.0, sy = 0.0;
      for (int c = 0; c < img.channels; ++c) {
        double dx = (x + 1 < img.width) ? img.at(x + 1, y, c) - img.at(x, y, c) : 0.0;
        double dy = (y + 1 < img.height) ? img.at(x, y + 1, c) - img.at(x, y, c) : 0.0;
        sx += multi ? std::abs(dx) : dx;
        sy += multi ? std::abs(dy) : dy;
      }
      gx.at(x, y) = sx / img.channels;
      gy.at(x, y) = sy / img.channels;
    }
  }
  return {gx, gy};
}

}  // namespace sfk
