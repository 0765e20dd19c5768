#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "sfk/motion.hpp"
#include "sfk/synth.hpp"

using namespace sfk;
namespace fs = std::filesystem;

TEST_CASE("static scene has zero flow and empty motion mask") {
  SceneSpec spec;
  spec.camera_translation = {0, 0, 0};
  spec.object_translation = {0, 0};
  const auto scene = render(spec);
  for (int f = 0; f + 1 < spec.frames; ++f) {
    const auto& fr = scene.frames[f];
    for (std::size_t i = 0; i < fr.flow.u.size(); ++i) {
      CHECK(fr.flow.u[i] == 0.0);
      CHECK(fr.flow.v[i] == 0.0);
    }
    for (auto b : fr.moving.bits) CHECK(b == 0);
  }
}

TEST_CASE("background flow matches the closed-form pinhole shift") {
  SceneSpec spec;
  spec.object_translation = {0, 0};  // object static relative to the world? no:
  // object pixels still move by the camera-induced shift at their depth;
  // background pixels must show exactly -fx*tx/d.
  const auto scene = render(spec);
  const double expect_u = -spec.fx * spec.camera_translation[0] / spec.background_depth;
  const auto& fr = scene.frames[0];
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      if (fr.semantic.at(x, y) != spec.background_class) continue;
      const auto i = fr.flow.idx(x, y);
      CHECK(fr.flow.u[i] == doctest::Approx(expect_u).epsilon(1e-12));
      CHECK(fr.flow.v[i] == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("rigid flow ground truth agrees with the geometry module") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> tr(-0.5, 0.5);
  for (int trial = 0; trial < 5; ++trial) {
    SceneSpec spec;
    spec.texture_seed = 100 + trial;
    spec.camera_translation = {tr(rng), tr(rng), 0.0};
    const auto scene = render(spec);
    for (int f = 0; f + 1 < spec.frames; ++f) {
      const auto& fr = scene.frames[f];
      const auto computed = rigid_flow(fr.depth, scene.intrinsics, fr.pose);
      for (std::size_t i = 0; i < computed.u.size(); ++i) {
        REQUIRE(computed.valid[i]);
        CHECK(std::abs(computed.u[i] - fr.rigid.u[i]) < 1e-9);
        CHECK(std::abs(computed.v[i] - fr.rigid.v[i]) < 1e-9);
      }
    }
  }
}

TEST_CASE("motion probability oracle: quiet background, loud object") {
  SceneSpec spec;  // defaults: object moves 3 px/frame on top of camera motion
  const auto scene = render(spec);
  const auto& fr = scene.frames[0];
  const auto p = motion_probability(fr.flow, fr.rigid, MotionConfig{});
  double min_obj = 1.0;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const auto i = p.valid[fr.flow.idx(x, y)];
      if (!i) continue;
      if (fr.moving.at(x, y)) {
        min_obj = std::min(min_obj, p.at(x, y));
      } else if (!fr.occlusion.at(x, y)) {
        CHECK(p.at(x, y) == doctest::Approx(0.0));
      }
    }
  }
  CHECK(min_obj > 0.3);  // defaults give a comfortable margin
}

TEST_CASE("final mask equals set algebra of ground-truth masks") {
  SceneSpec spec;
  const auto scene = render(spec);
  const auto& fr = scene.frames[0];
  const MotionConfig cfg;
  const auto p = motion_probability(fr.flow, fr.rigid, cfg);
  const auto mc = consistency_mask(p, cfg);
  const auto md = dynamic_prior_mask(fr.semantic, cfg);
  const auto mb = boundary_mask(fr.depth, scene.intrinsics, fr.pose);
  const auto m = final_mask(md, mc, mb);
  for (std::size_t i = 0; i < m.bits.size(); ++i) {
    const int expect = std::min<int>(std::max(md.bits[i], mc.bits[i]), mb.bits[i]);
    CHECK(m.bits[i] == expect);
  }
}

TEST_CASE("boundary mask equals the analytic out-of-frame band") {
  SceneSpec spec;
  spec.object_translation = {0, 0};
  spec.object_x = 1000;  // keep the object out of frame entirely
  const auto scene = render(spec);
  const auto& fr = scene.frames[0];
  const auto mb = boundary_mask(fr.depth, scene.intrinsics, fr.pose);
  const double shift = -spec.fx * spec.camera_translation[0] / spec.background_depth;
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double tx = x + shift;
      const bool inside = tx >= 0.0 && tx <= spec.width - 1;
      CHECK(mb.at(x, y) == (inside ? 1 : 0));
    }
  }
}

TEST_CASE("render is deterministic and seed-sensitive") {
  SceneSpec spec;
  const auto a = render(spec);
  const auto b = render(spec);
  CHECK(a.frames[0].image.data == b.frames[0].image.data);
  spec.texture_seed = 2;
  const auto c = render(spec);
  CHECK(a.frames[0].image.data != c.frames[0].image.data);
}

TEST_CASE("spec validation") {
  SceneSpec bad;
  bad.object_depth = 50.0;  // deeper than background
  CHECK_THROWS_AS(render(bad), SpecError);
  bad = SceneSpec{};
  bad.width = 4;
  CHECK_THROWS_AS(render(bad), SpecError);
  bad = SceneSpec{};
  bad.camera_translation = {0, 0, 0.5};
  CHECK_THROWS_AS(render(bad), SpecError);
}

TEST_CASE("perturb_flow determinism and statistics") {
  FlowField f(100, 100);
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 100; ++x) f.set(x, y, 1.0, -2.0);
  }
  const auto same = perturb_flow(f, 0.0, 9);
  CHECK(same.u == f.u);
  const auto a = perturb_flow(f, 2.0, 9);
  const auto b = perturb_flow(f, 2.0, 9);
  CHECK(a.u == b.u);
  CHECK(a.v == b.v);

  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    const double d = a.u[i] - f.u[i];
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(a.u.size());
  const double std_emp = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(std_emp == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("scene writes a complete bundle directory and spec file") {
  SceneSpec spec;
  spec.width = 48;
  spec.height = 32;
  spec.cx = 23.5;
  spec.cy = 15.5;
  const auto scene = render(spec);
  const fs::path root = fs::temp_directory_path() / "sfk_synth_scene";
  fs::remove_all(root);
  write_scene(scene, root.string());
  for (const char* sub : {"image", "depth", "flow", "semantic", "mask", "calib"}) {
    CHECK(fs::is_directory(root / sub));
  }
  CHECK(fs::exists(root / "scene.spec"));
  const auto back = read_scene_spec((root / "scene.spec").string());
  CHECK(back.width == spec.width);
  CHECK(back.cx == spec.cx);
  CHECK(back.texture_seed == spec.texture_seed);

  const auto frames = list_frames(root.string());
  CHECK(frames.size() == 3);
  const auto fb = read_bundle(root.string(), frames[1]);
  CHECK(fb.image_sources.size() == 2);
  CHECK(fb.has_camera);
  CHECK(fb.camera.poses.size() == 2);
  fs::remove_all(root);
}
