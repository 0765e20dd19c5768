#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sfk/core.hpp"
#include "sfk/dataio.hpp"
#include "sfk/geometry.hpp"

namespace sfk {

/// Fronto-parallel textured background plane plus one independently
/// translating textured rectangle, observed by a translating camera.
/// Everything is closed-form, so ground truth is exact.
struct SceneSpec {
  int width = 96;
  int height = 64;
  int frames = 3;
  double background_depth = 20.0;               // meters
  double object_depth = 8.0;                    // meters, < background_depth
  int object_x = 30, object_y = 20;             // rect top-left in frame 0, pixels
  int object_w = 24, object_h = 16;
  std::array<double, 3> camera_translation{0.3, 0.0, 0.0};  // per frame step, meters
  std::array<double, 2> object_translation{3.0, 0.0};       // extra pixel motion per frame
  double fx = 80.0, fy = 80.0;
  double cx = 47.5, cy = 31.5;
  std::uint64_t texture_seed = 1;
  int background_class = 0;  // "road" train id
  int object_class = 13;     // "car" train id

  void validate() const;
};

/// One rendered frame with its exact ground truth. Flow fields describe
/// frame -> next frame motion (invalid on the last frame).
struct SynthFrame {
  ImageBuffer image;
  DepthMap depth;
  FlowField flow;        // full optical flow ground truth, t -> t+1
  FlowField rigid;       // camera-induced flow only, t -> t+1
  LabelMap semantic;
  BinaryMask moving;     // moving-object mask (object pixels, if it moves)
  BinaryMask occlusion;  // pixels whose t -> t+1 correspondence is covered
  RelativePose pose;     // T_{t -> t+1}
};

struct SynthScene {
  SceneSpec spec;
  CameraIntrinsics intrinsics;
  std::vector<SynthFrame> frames;
};

SynthScene render(const SceneSpec& spec);

/// Write the scene in the dataio directory layout, plus scene.spec with all
/// parameters. Flow/rigid-flow/masks cover frames 0..N-2.
void write_scene(const SynthScene& scene, const std::string& root);

SceneSpec read_scene_spec(const std::string& path);
void write_scene_spec(const SceneSpec& spec, const std::string& path);

/// Seeded Gaussian noise on both flow components; sigma in pixels.
FlowField perturb_flow(const FlowField& f, double sigma, std::uint64_t seed);

}  // namespace sfk
