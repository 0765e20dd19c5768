#include "sfk/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace sfk {

void SceneSpec::validate() const {
  if (width < 16 || height < 16) throw SpecError("SceneSpec: dimensions must be >= 16");
  if (frames < 2) throw SpecError("SceneSpec: need at least 2 frames");
  if (!(object_depth > 0.0) || !(background_depth > object_depth)) {
    throw SpecError("SceneSpec: need 0 < object_depth < background_depth");
  }
  if (object_w <= 0 || object_h <= 0) throw SpecError("SceneSpec: empty object rect");
  if (camera_translation[2] != 0.0) {
    throw SpecError("SceneSpec: camera translation along the optical axis is not supported");
  }
  if (!(fx > 0.0) || !(fy > 0.0)) throw SpecError("SceneSpec: fx, fy must be > 0");
}

namespace {

// Band-limited texture: sum of random-phase sinusoids per channel, smooth at
// sub-pixel scale.
class SineTexture {
 public:
  SineTexture(std::uint64_t seed, int waves = 5) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> wavelength(8.0, 40.0);
    std::uniform_real_distribution<double> angle(0.0, M_PI);
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < waves; ++k) {
        Wave w;
        const double lambda = wavelength(rng);
        const double a = angle(rng);
        w.kx = 2.0 * M_PI / lambda * std::cos(a);
        w.ky = 2.0 * M_PI / lambda * std::sin(a);
        w.phase = phase(rng);
        w.amp = 0.4 / waves;
        waves_[c].push_back(w);
      }
    }
  }

  double sample(double x, double y, int c) const {
    double v = 0.5;
    for (const auto& w : waves_[c]) v += w.amp * std::sin(w.kx * x + w.ky * y + w.phase);
    return std::clamp(v, 0.0, 1.0);
  }

 private:
  struct Wave {
    double kx, ky, phase, amp;
  };
  std::vector<Wave> waves_[3];
};

}  // namespace

SynthScene render(const SceneSpec& spec) {
  spec.validate();
  SynthScene scene;
  scene.spec = spec;
  scene.intrinsics = CameraIntrinsics(spec.fx, spec.fy, spec.cx, spec.cy);

  const SineTexture bg_tex(spec.texture_seed);
  const SineTexture obj_tex(spec.texture_seed + 0x9e3779b97f4a7c15ull);

  // Per-frame camera-induced pixel shift of a plane at depth d under the
  // step translation: (-fx*tx/d, -fy*ty/d).
  const double sx = spec.camera_translation[0];
  const double sy = spec.camera_translation[1];
  const auto cam_shift = [&](double d) {
    return std::array<double, 2>{-spec.fx * sx / d, -spec.fy * sy / d};
  };
  const auto bg_step = cam_shift(spec.background_depth);
  const auto obj_cam_step = cam_shift(spec.object_depth);
  // Actual object pixel motion per frame: camera part plus its own motion.
  const std::array<double, 2> obj_step{obj_cam_step[0] + spec.object_translation[0],
                                       obj_cam_step[1] + spec.object_translation[1]};
  const bool object_moves =
      spec.object_translation[0] != 0.0 || spec.object_translation[1] != 0.0;

  RelativePose step_pose;
  step_pose.translation = {-sx, -sy, 0.0};

  const auto rect_origin = [&](int f) {
    return std::array<double, 2>{spec.object_x + f * obj_step[0],
                                 spec.object_y + f * obj_step[1]};
  };
  const auto in_rect = [&](double x, double y, const std::array<double, 2>& o) {
    return x >= o[0] && x < o[0] + spec.object_w && y >= o[1] && y < o[1] + spec.object_h;
  };

  for (int f = 0; f < spec.frames; ++f) {
    SynthFrame fr;
    fr.image = ImageBuffer(spec.width, spec.height, 3);
    fr.depth = DepthMap(spec.width, spec.height);
    fr.flow = FlowField(spec.width, spec.height);
    fr.rigid = FlowField(spec.width, spec.height);
    fr.semantic = LabelMap(spec.width, spec.height);
    fr.moving = BinaryMask(spec.width, spec.height);
    fr.occlusion = BinaryMask(spec.width, spec.height);
    fr.pose = step_pose;

    const auto rect = rect_origin(f);
    const auto rect_next = rect_origin(f + 1);
    const bool last = f == spec.frames - 1;

    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const bool on_object = in_rect(x, y, rect);
        if (on_object) {
          for (int c = 0; c < 3; ++c) {
            fr.image.at(x, y, c) = obj_tex.sample(x - rect[0], y - rect[1], c);
          }
          fr.depth.set(x, y, spec.object_depth);
          fr.semantic.at(x, y) = static_cast<std::uint16_t>(spec.object_class);
          if (object_moves) fr.moving.at(x, y) = 1;
          if (!last) {
            fr.flow.set(x, y, obj_step[0], obj_step[1]);
            fr.rigid.set(x, y, obj_cam_step[0], obj_cam_step[1]);
          }
        } else {
          // Background texture is anchored to its frame-0 pixel coordinates.
          const double u0 = x + f * spec.fx * sx / spec.background_depth;
          const double v0 = y + f * spec.fy * sy / spec.background_depth;
          for (int c = 0; c < 3; ++c) fr.image.at(x, y, c) = bg_tex.sample(u0, v0, c);
          fr.depth.set(x, y, spec.background_depth);
          fr.semantic.at(x, y) = static_cast<std::uint16_t>(spec.background_class);
          if (!last) {
            fr.flow.set(x, y, bg_step[0], bg_step[1]);
            fr.rigid.set(x, y, bg_step[0], bg_step[1]);
            // Covered by the object in the next frame.
            if (in_rect(x + bg_step[0], y + bg_step[1], rect_next)) fr.occlusion.at(x, y) = 1;
          }
        }
        if (last) {
          fr.flow.set_invalid(x, y);
          fr.rigid.set_invalid(x, y);
        }
      }
    }
    scene.frames.push_back(std::move(fr));
  }
  return scene;
}

FlowField perturb_flow(const FlowField& f, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw InvalidValue("perturb_flow: sigma must be >= 0");
  FlowField out = f;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    const double nu = noise(rng);
    const double nv = noise(rng);
    if (out.valid[i]) {
      out.u[i] += nu;
      out.v[i] += nv;
    }
  }
  return out;
}

void write_scene_spec(const SceneSpec& spec, const std::string& path) {
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    out.precision(17);
    out << "width " << spec.width << "\nheight " << spec.height << "\nframes "
        << spec.frames << "\nbackground_depth " << spec.background_depth
        << "\nobject_depth " << spec.object_depth << "\nobject_x " << spec.object_x
        << "\nobject_y " << spec.object_y << "\nobject_w " << spec.object_w
        << "\nobject_h " << spec.object_h << "\ncamera_translation "
        << spec.camera_translation[0] << " " << spec.camera_translation[1] << " "
        << spec.camera_translation[2] << "\nobject_translation "
        << spec.object_translation[0] << " " << spec.object_translation[1] << "\nfx "
        << spec.fx << "\nfy " << spec.fy << "\ncx " << spec.cx << "\ncy " << spec.cy
        << "\ntexture_seed " << spec.texture_seed << "\nbackground_class "
        << spec.background_class << "\nobject_class " << spec.object_class << "\n";
    if (!out) throw ParseError("cannot write " + path);
  }
  fs::rename(tmp, target);
}

SceneSpec read_scene_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  SceneSpec spec;
  std::string key;
  while (in >> key) {
    if (key == "width") in >> spec.width;
    else if (key == "height") in >> spec.height;
    else if (key == "frames") in >> spec.frames;
    else if (key == "background_depth") in >> spec.background_depth;
    else if (key == "object_depth") in >> spec.object_depth;
    else if (key == "object_x") in >> spec.object_x;
    else if (key == "object_y") in >> spec.object_y;
    else if (key == "object_w") in >> spec.object_w;
    else if (key == "object_h") in >> spec.object_h;
    else if (key == "camera_translation")
      in >> spec.camera_translation[0] >> spec.camera_translation[1] >> spec.camera_translation[2];
    else if (key == "object_translation")
      in >> spec.object_translation[0] >> spec.object_translation[1];
    else if (key == "fx") in >> spec.fx;
    else if (key == "fy") in >> spec.fy;
    else if (key == "cx") in >> spec.cx;
    else if (key == "cy") in >> spec.cy;
    else if (key == "texture_seed") in >> spec.texture_seed;
    else if (key == "background_class") in >> spec.background_class;
    else if (key == "object_class") in >> spec.object_class;
    else throw ParseError(path + ": unknown key '" + key + "'");
    if (!in) throw ParseError(path + ": malformed value for '" + key + "'");
  }
  return spec;
}

void write_scene(const SynthScene& scene, const std::string& root) {
  const fs::path base(root);
  write_scene_spec(scene.spec, (base / "scene.spec").string());
  const int n = static_cast<int>(scene.frames.size());
  for (int f = 0; f < n; ++f) {
    const auto& fr = scene.frames[f];
    const std::string id = format_frame_id(f);
    write_image_png(fr.image, (base / "image" / (id + ".png")).string());
    write_depth_png(fr.depth, (base / "depth" / (id + ".png")).string());
    write_label_png(fr.semantic, (base / "semantic" / (id + ".png")).string());
    write_mask_png(fr.moving, (base / "mask" / (id + ".png")).string());
    if (f + 1 < n) {
      write_flow_png(fr.flow, (base / "flow" / (id + ".png")).string());
      write_flow_png(fr.rigid, (base / "rigid" / (id + ".png")).string());
      write_mask_png(fr.occlusion, (base / "occlusion" / (id + ".png")).string());
    }
    CameraModel cam;
    cam.intrinsics = scene.intrinsics;
    if (f > 0) cam.poses.push_back(fr.pose.inverse());  // T_{f -> f-1}
    if (f + 1 < n) cam.poses.push_back(fr.pose);        // T_{f -> f+1}
    write_calib(cam, (base / "calib" / (id + ".txt")).string());
  }
}

}  // namespace sfk
