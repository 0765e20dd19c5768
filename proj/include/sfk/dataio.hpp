#pragma once

#include <string>
#include <vector>

#include "sfk/core.hpp"
#include "sfk/geometry.hpp"

namespace sfk {

// File conventions (bit-exact):
//   depth:  16-bit single-channel PNG, meters = raw / 256, raw 0 = invalid
//   flow:   16-bit 3-channel PNG, u = (ch1 - 2^15)/64, v = (ch2 - 2^15)/64,
//           valid = (ch3 == 1)
//   labels: 8-bit single-channel PNG of class ids (255 = ignore)
//   masks:  8-bit single-channel PNG, 0/255 <-> 0/1
//   images: 8- or 16-bit RGB PNG, normalized to [0,1]
// Writers are atomic (temp file + rename).

DepthMap read_depth_png(const std::string& path);
void write_depth_png(const DepthMap& d, const std::string& path);

FlowField read_flow_png(const std::string& path);
void write_flow_png(const FlowField& f, const std::string& path);

LabelMap read_label_png(const std::string& path);
void write_label_png(const LabelMap& l, const std::string& path);

BinaryMask read_mask_png(const std::string& path);
void write_mask_png(const BinaryMask& m, const std::string& path);

ImageBuffer read_image(const std::string& path);
void write_image_png(const ImageBuffer& img, const std::string& path);

struct CameraModel {
  CameraIntrinsics intrinsics;
  std::vector<RelativePose> poses;  // one per source view
};

/// Calibration text format: first non-comment line "fx fy cx cy"; then one
/// 3x4 [R|t] block (three rows of four numbers) per source view. Rotations
/// are accepted up to an orthonormality defect of 1e-6 and re-orthonormalized.
CameraModel read_calib(const std::string& path);
void write_calib(const CameraModel& cam, const std::string& path);

/// Per-frame sample: target image plus neighbor sources and whatever ground
/// truth exists on disk under <root>/{image,depth,flow,semantic,mask,calib}/.
struct FrameBundle {
  std::string image_target;
  std::vector<std::string> image_sources;
  std::string depth_path;     // empty when absent
  std::string flow_path;
  std::string semantic_path;
  std::string mask_path;
  CameraModel camera;
  bool has_camera = false;
};

std::string format_frame_id(int frame, int width = 10);

/// Frame ids present under <root>/image, sorted.
std::vector<std::string> list_frames(const std::string& root);

/// Collect the files of one frame and verify that everything that exists
/// decodes to matching dimensions (one consolidated DecodeError otherwise).
FrameBundle read_bundle(const std::string& root, const std::string& frame_id);

// Deterministic visualizations.
// Flow: HSV wheel, hue = direction, saturation = magnitude / p95 magnitude
// (zero flow renders white). Depth/probability: linear 5-stop ramp
// dark-blue -> cyan -> green -> yellow -> red over the value range
// (depth normalized by its valid max, probability over [0,1]).
ImageBuffer colorize_flow(const FlowField& f);
ImageBuffer colorize_depth(const DepthMap& d);
ImageBuffer colorize_prob(const MotionProbMap& p);
ImageBuffer colorize_mask(const BinaryMask& m);

}  // namespace sfk
