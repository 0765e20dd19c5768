#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "sfk/dataio.hpp"
#include "sfk/distill.hpp"
#include "sfk/metrics.hpp"
#include "sfk/motion.hpp"
#include "sfk/synth.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

int default_jobs() {
  if (const char* env = std::getenv("SFK_JOBS")) {
    const int j = std::atoi(env);
    if (j > 0) return j;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Index-parallel loop; aggregation stays order-independent because every
// task writes only its own slot.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_report(const json& report, const std::string& path) {
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    out << report.dump(2) << "\n";
    if (!out) throw sfk::ParseError("cannot write " + path);
  }
  fs::rename(tmp, target);
}

std::vector<std::string> png_stems(const std::string& dir) {
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) throw sfk::DecodeError("not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".png") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw sfk::DecodeError("no PNG files under " + dir);
  return out;
}

// Pose toward the next frame for a frame bundle whose calib lists poses in
// (previous, next) source order.
const sfk::RelativePose* pose_to_next(const sfk::FrameBundle& fb, const std::string& root,
                                      const std::string& id) {
  if (!fb.has_camera || fb.camera.poses.empty()) return nullptr;
  const int frame = std::stoi(id);
  const bool has_prev =
      frame > 0 &&
      fs::exists(fs::path(root) / "image" /
                 (sfk::format_frame_id(frame - 1, static_cast<int>(id.size())) + ".png"));
  const bool has_next = fs::exists(
      fs::path(root) / "image" /
      (sfk::format_frame_id(frame + 1, static_cast<int>(id.size())) + ".png"));
  if (!has_next) return nullptr;
  const std::size_t idx = has_prev ? 1 : 0;
  if (idx >= fb.camera.poses.size()) return nullptr;
  return &fb.camera.poses[idx];
}

struct FrameGeometry {
  std::string id;
  sfk::DepthMap depth;
  sfk::CameraIntrinsics intrinsics;
  sfk::RelativePose pose;
};

// Frames of a scene that have depth, calibration and a successor frame.
std::vector<FrameGeometry> load_geometry_frames(const std::string& root) {
  std::vector<FrameGeometry> out;
  for (const auto& id : sfk::list_frames(root)) {
    const auto fb = sfk::read_bundle(root, id);
    if (fb.depth_path.empty() || !fb.has_camera) continue;
    const auto* pose = pose_to_next(fb, root, id);
    if (!pose) continue;
    out.push_back({id, sfk::read_depth_png(fb.depth_path), fb.camera.intrinsics, *pose});
  }
  if (out.empty()) {
    throw sfk::DecodeError("no frames with depth + calib + successor under " + root);
  }
  return out;
}

sfk::FlowField load_rigid_for(const std::string& root, const FrameGeometry& g) {
  const auto path = fs::path(root) / "rigid" / (g.id + ".png");
  if (fs::exists(path)) return sfk::read_flow_png(path.string());
  return sfk::rigid_flow(g.depth, g.intrinsics, g.pose);
}

json motion_config_json(const sfk::MotionConfig& cfg) {
  return {{"xi", cfg.xi},
          {"tau", cfg.tau},
          {"eps_norm", cfg.eps_norm},
          {"dynamic_class_ids", cfg.dynamic_class_ids}};
}

// Concatenate equally sized rasters vertically so that single-call metrics
// equal global pixel pooling across frames.
template <typename T>
T vstack(const std::vector<T>& items);

template <>
sfk::FlowField vstack(const std::vector<sfk::FlowField>& items) {
  int h = 0;
  for (const auto& x : items) h += x.height;
  sfk::FlowField out(items.front().width, h);
  std::size_t off = 0;
  for (const auto& x : items) {
    std::copy(x.u.begin(), x.u.end(), out.u.begin() + off);
    std::copy(x.v.begin(), x.v.end(), out.v.begin() + off);
    std::copy(x.valid.begin(), x.valid.end(), out.valid.begin() + off);
    off += x.u.size();
  }
  return out;
}

template <>
sfk::BinaryMask vstack(const std::vector<sfk::BinaryMask>& items) {
  int h = 0;
  for (const auto& x : items) h += x.height;
  sfk::BinaryMask out(items.front().width, h);
  std::size_t off = 0;
  for (const auto& x : items) {
    std::copy(x.bits.begin(), x.bits.end(), out.bits.begin() + off);
    off += x.bits.size();
  }
  return out;
}

template <>
sfk::LabelMap vstack(const std::vector<sfk::LabelMap>& items) {
  int h = 0;
  for (const auto& x : items) h += x.height;
  sfk::LabelMap out(items.front().width, h);
  std::size_t off = 0;
  for (const auto& x : items) {
    std::copy(x.ids.begin(), x.ids.end(), out.ids.begin() + off);
    off += x.ids.size();
  }
  return out;
}

json flow_metrics_json(const sfk::FlowMetrics& m) {
  return {{"epe_noc", m.epe_noc},
          {"epe_all", m.epe_all},
          {"f1", m.f1},
          {"valid_all", m.valid_all},
          {"valid_noc", m.valid_noc}};
}

json depth_metrics_json(const sfk::DepthMetrics& m) {
  return {{"abs_rel", m.abs_rel}, {"sq_rel", m.sq_rel},   {"rmse", m.rmse},
          {"rmse_log", m.rmse_log}, {"delta1", m.delta1}, {"delta2", m.delta2},
          {"delta3", m.delta3}};
}

json seg_metrics_json(const sfk::SegMetrics& m) {
  return {{"pixel_acc", m.pixel_acc},
          {"mean_acc", m.mean_acc},
          {"mean_iou", m.mean_iou},
          {"fw_iou", m.fw_iou}};
}

struct MaskOutputs {
  sfk::BinaryMask dynamic, boundary, consistency, final_m;
};

MaskOutputs compute_masks(const std::string& root, const FrameGeometry& g,
                          const sfk::MotionConfig& cfg) {
  const auto fb = sfk::read_bundle(root, g.id);
  if (fb.flow_path.empty() || fb.semantic_path.empty()) {
    throw sfk::DecodeError("frame " + g.id + ": flow and semantic inputs required");
  }
  const auto flow = sfk::read_flow_png(fb.flow_path);
  const auto semantic = sfk::read_label_png(fb.semantic_path);
  const auto rigid = load_rigid_for(root, g);
  const auto prob = sfk::motion_probability(flow, rigid, cfg);
  MaskOutputs out{sfk::dynamic_prior_mask(semantic, cfg),
                  sfk::boundary_mask(g.depth, g.intrinsics, g.pose),
                  sfk::consistency_mask(prob, cfg), sfk::BinaryMask{}};
  out.final_m = sfk::final_mask(out.dynamic, out.consistency, out.boundary);
  return out;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Scene-understanding supervision and evaluation toolkit"};
  app.require_subcommand(1);
  int jobs = default_jobs();
  app.add_option("--jobs", jobs, "max concurrent frames (env SFK_JOBS)")
      ->check(CLI::PositiveNumber);

  sfk::MotionConfig motion_cfg;
  sfk::DistillConfig distill_cfg;
  sfk::PhotometricConfig photo_cfg;
  sfk::DepthEvalConfig depth_cfg;

  auto add_motion_flags = [&](CLI::App* cmd) {
    cmd->add_option("--xi", motion_cfg.xi, "consistency threshold");
    cmd->add_option("--tau", motion_cfg.tau, "motion threshold");
    cmd->add_option("--eps-norm", motion_cfg.eps_norm, "zero-flow guard, px");
  };
  auto add_photo_flags = [&](CLI::App* cmd) {
    cmd->add_option("--alpha-ssim", photo_cfg.alpha_ssim, "SSIM weight in psi");
    cmd->add_option("--ssim-window", photo_cfg.ssim_window, "SSIM window, odd");
    cmd->add_option("--alpha-r", distill_cfg.alpha_r, "rigid-term weight");
    cmd->add_option("--alpha-d", distill_cfg.alpha_d, "teacher-term weight");
    cmd->add_option("--smoothness-weight", distill_cfg.smoothness_weight,
                    "TV pull during refinement");
  };

  // ---- synth ----------------------------------------------------------
  auto* c_synth = app.add_subcommand("synth", "render the synthetic oracle scene");
  std::string out_dir;
  sfk::SceneSpec scene_spec;
  std::uint64_t seed = 1;
  c_synth->add_option("--out", out_dir, "output directory")->required();
  c_synth->add_option("--seed", seed, "texture seed");
  c_synth->add_option("--width", scene_spec.width);
  c_synth->add_option("--height", scene_spec.height);
  c_synth->add_option("--frames", scene_spec.frames);
  c_synth->add_option("--object-depth", scene_spec.object_depth);
  c_synth->add_option("--background-depth", scene_spec.background_depth);
  c_synth->add_option("--camera-tx", scene_spec.camera_translation[0]);
  c_synth->add_option("--camera-ty", scene_spec.camera_translation[1]);
  c_synth->add_option("--object-du", scene_spec.object_translation[0]);
  c_synth->add_option("--object-dv", scene_spec.object_translation[1]);

  // ---- geometry commands ---------------------------------------------
  std::string root;
  auto* c_rigid = app.add_subcommand("rigid-flow", "camera-motion flow from depth + pose");
  c_rigid->add_option("--root", root, "scene directory")->required();
  c_rigid->add_option("--out", out_dir, "output directory")->required();

  auto* c_bmask = app.add_subcommand("boundary-mask", "out-of-camera mask");
  c_bmask->add_option("--root", root)->required();
  c_bmask->add_option("--out", out_dir)->required();

  auto* c_prob = app.add_subcommand("motion-prob", "per-pixel motion probability");
  c_prob->add_option("--root", root)->required();
  c_prob->add_option("--out", out_dir)->required();
  add_motion_flags(c_prob);

  auto* c_masks = app.add_subcommand("masks", "dynamic/boundary/consistency/final masks");
  c_masks->add_option("--root", root)->required();
  c_masks->add_option("--out", out_dir)->required();
  add_motion_flags(c_masks);

  std::string flow_dir;
  auto* c_seg = app.add_subcommand("segment-motion", "motion segmentation mask");
  c_seg->add_option("--root", root)->required();
  c_seg->add_option("--out", out_dir)->required();
  c_seg->add_option("--flow", flow_dir, "student flow directory (default: <root>/flow)");
  add_motion_flags(c_seg);

  // ---- distillation ---------------------------------------------------
  auto* c_loss = app.add_subcommand("distill-loss", "masked self-distillation loss");
  c_loss->add_option("--root", root)->required();
  c_loss->add_option("--flow", flow_dir, "student flow directory (default: <root>/flow)");
  std::string report_path;
  c_loss->add_option("--report", report_path, "JSON report path")->required();
  add_motion_flags(c_loss);
  add_photo_flags(c_loss);

  auto* c_refine = app.add_subcommand("refine-flow", "gradient-descent flow refinement");
  int steps = 100;
  double lr = 0.5, noise_sigma = 0.0;
  std::uint64_t noise_seed = 1;
  c_refine->add_option("--root", root)->required();
  c_refine->add_option("--out", out_dir, "refined flow directory")->required();
  c_refine->add_option("--report", report_path, "JSON report path")->required();
  c_refine->add_option("--init-flow", flow_dir,
                       "initial flow directory (default: teacher flow <root>/flow)");
  c_refine->add_option("--steps", steps)->check(CLI::NonNegativeNumber);
  c_refine->add_option("--lr", lr);
  c_refine->add_option("--noise-sigma", noise_sigma, "Gaussian noise on the init, px");
  c_refine->add_option("--noise-seed", noise_seed);
  add_motion_flags(c_refine);
  add_photo_flags(c_refine);

  // ---- evaluation -----------------------------------------------------
  std::string pred_dir, gt_dir, noc_dir;
  auto* c_edepth = app.add_subcommand("eval-depth", "monocular depth metrics");
  c_edepth->add_option("--pred", pred_dir)->required();
  c_edepth->add_option("--gt", gt_dir)->required();
  c_edepth->add_option("--report", report_path)->required();
  c_edepth->add_option("--min-depth", depth_cfg.min_depth);
  c_edepth->add_option("--max-depth", depth_cfg.max_depth);
  bool no_median_scaling = false;
  c_edepth->add_flag("--no-median-scaling", no_median_scaling);

  auto* c_eflow = app.add_subcommand("eval-flow", "flow EPE / F1 metrics");
  c_eflow->add_option("--pred", pred_dir)->required();
  c_eflow->add_option("--gt", gt_dir)->required();
  c_eflow->add_option("--noc", noc_dir, "non-occluded mask directory");
  c_eflow->add_option("--report", report_path)->required();

  auto* c_emotion = app.add_subcommand("eval-motion", "motion segmentation metrics");
  c_emotion->add_option("--pred", pred_dir)->required();
  c_emotion->add_option("--gt", gt_dir)->required();
  c_emotion->add_option("--report", report_path)->required();

  auto* c_esem = app.add_subcommand("eval-sem", "semantic segmentation metrics");
  int class_count = 19;
  c_esem->add_option("--pred", pred_dir)->required();
  c_esem->add_option("--gt", gt_dir)->required();
  c_esem->add_option("--report", report_path)->required();
  c_esem->add_option("--classes", class_count);

  auto* c_viz = app.add_subcommand("viz", "colorized visualizations");
  std::string viz_type = "flow";
  c_viz->add_option("--input", pred_dir, "input directory")->required();
  c_viz->add_option("--out", out_dir)->required();
  c_viz->add_option("--type", viz_type, "flow|depth|prob|mask")
      ->check(CLI::IsMember({"flow", "depth", "prob", "mask"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // normalize every usage failure to exit code 2 (--help stays 0)
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  // ---- dispatch -------------------------------------------------------
  if (*c_synth) {
    scene_spec.texture_seed = seed;
    const auto scene = sfk::render(scene_spec);
    sfk::write_scene(scene, out_dir);
    std::cout << "wrote " << scene.frames.size() << " frames to " << out_dir << "\n";
    return 0;
  }

  if (*c_rigid || *c_bmask) {
    const auto frames = load_geometry_frames(root);
    parallel_for(frames.size(), jobs, [&](std::size_t i) {
      const auto& g = frames[i];
      if (*c_rigid) {
        const auto f = sfk::rigid_flow(g.depth, g.intrinsics, g.pose);
        sfk::write_flow_png(f, (fs::path(out_dir) / (g.id + ".png")).string());
      } else {
        const auto m = sfk::boundary_mask(g.depth, g.intrinsics, g.pose);
        sfk::write_mask_png(m, (fs::path(out_dir) / (g.id + ".png")).string());
      }
    });
    std::cout << "wrote " << frames.size() << " frames to " << out_dir << "\n";
    return 0;
  }

  if (*c_prob) {
    motion_cfg.validate();
    const auto frames = load_geometry_frames(root);
    parallel_for(frames.size(), jobs, [&](std::size_t i) {
      const auto& g = frames[i];
      const auto fb = sfk::read_bundle(root, g.id);
      if (fb.flow_path.empty()) throw sfk::DecodeError("frame " + g.id + ": flow required");
      const auto flow = sfk::read_flow_png(fb.flow_path);
      const auto rigid = load_rigid_for(root, g);
      const auto prob = sfk::motion_probability(flow, rigid, motion_cfg);
      sfk::write_image_png(sfk::colorize_prob(prob),
                           (fs::path(out_dir) / (g.id + ".png")).string());
      // 16-bit raw probability alongside the visualization (p = raw/65535)
      sfk::DepthMap raw(prob.width, prob.height);
      for (int y = 0; y < prob.height; ++y) {
        for (int x = 0; x < prob.width; ++x) {
          if (prob.is_valid(x, y)) {
            raw.set(x, y, std::max(prob.at(x, y), 1e-9) * 65535.0 / 256.0);
          }
        }
      }
      sfk::write_depth_png(raw, (fs::path(out_dir) / (g.id + "_raw.png")).string());
    });
    std::cout << "wrote " << frames.size() << " probability maps to " << out_dir << "\n";
    return 0;
  }

  if (*c_masks || *c_seg) {
    motion_cfg.validate();
    const auto frames = load_geometry_frames(root);
    parallel_for(frames.size(), jobs, [&](std::size_t i) {
      const auto& g = frames[i];
      if (*c_masks) {
        const auto m = compute_masks(root, g, motion_cfg);
        const fs::path base(out_dir);
        sfk::write_mask_png(m.dynamic, (base / "dynamic" / (g.id + ".png")).string());
        sfk::write_mask_png(m.boundary, (base / "boundary" / (g.id + ".png")).string());
        sfk::write_mask_png(m.consistency,
                            (base / "consistency" / (g.id + ".png")).string());
        sfk::write_mask_png(m.final_m, (base / "final" / (g.id + ".png")).string());
      } else {
        const auto fb = sfk::read_bundle(root, g.id);
        if (fb.semantic_path.empty()) {
          throw sfk::DecodeError("frame " + g.id + ": semantic input required");
        }
        const auto dir = flow_dir.empty() ? (fs::path(root) / "flow").string() : flow_dir;
        const auto sf = sfk::read_flow_png((fs::path(dir) / (g.id + ".png")).string());
        const auto semantic = sfk::read_label_png(fb.semantic_path);
        const auto rigid = load_rigid_for(root, g);
        const auto mot = sfk::motion_segmentation(sf, rigid, semantic, motion_cfg);
        sfk::write_mask_png(mot, (fs::path(out_dir) / (g.id + ".png")).string());
      }
    });
    std::cout << "wrote " << frames.size() << " frames to " << out_dir << "\n";
    return 0;
  }

  if (*c_loss || *c_refine) {
    motion_cfg.validate();
    distill_cfg.validate();
    photo_cfg.validate();
    const auto frames = load_geometry_frames(root);
    json per_frame = json::object();
    std::vector<json> results(frames.size());
    parallel_for(frames.size(), jobs, [&](std::size_t i) {
      const auto& g = frames[i];
      const auto fb = sfk::read_bundle(root, g.id);
      if (fb.flow_path.empty() || fb.semantic_path.empty()) {
        throw sfk::DecodeError("frame " + g.id + ": flow and semantic inputs required");
      }
      const auto teacher = sfk::read_flow_png(fb.flow_path);
      const auto it = sfk::read_image(fb.image_target);
      std::vector<sfk::ImageBuffer> sources;
      // the pose chain targets the next frame; warp from it
      const int frame = std::stoi(g.id);
      const auto next_path =
          fs::path(root) / "image" /
          (sfk::format_frame_id(frame + 1, static_cast<int>(g.id.size())) + ".png");
      sources.push_back(sfk::read_image(next_path.string()));
      const auto masks = compute_masks(root, g, motion_cfg);
      const auto rigid = load_rigid_for(root, g);

      if (*c_loss) {
        const auto sf_dir =
            flow_dir.empty() ? (fs::path(root) / "flow").string() : flow_dir;
        const auto sf = sfk::read_flow_png((fs::path(sf_dir) / (g.id + ".png")).string());
        const auto lb = sfk::self_distillation_loss(sf, teacher, rigid, masks.final_m, it,
                                                    sources, distill_cfg, photo_cfg);
        results[i] = {{"total", lb.total},
                      {"rigid_term", lb.rigid_term},
                      {"teacher_term", lb.teacher_term},
                      {"photo_term", lb.photo_term}};
      } else {
        sfk::FlowField init = teacher;
        if (!flow_dir.empty()) {
          init = sfk::read_flow_png((fs::path(flow_dir) / (g.id + ".png")).string());
        }
        if (noise_sigma > 0.0) init = sfk::perturb_flow(init, noise_sigma, noise_seed + i);
        const auto rr = sfk::refine_flow(init, teacher, rigid, masks.final_m, it, sources,
                                         distill_cfg, photo_cfg, steps, lr);
        sfk::write_flow_png(rr.flow, (fs::path(out_dir) / (g.id + ".png")).string());
        results[i] = {{"initial_loss", rr.loss_history.front()},
                      {"final_loss", rr.loss_history.back()},
                      {"loss_history", rr.loss_history}};
      }
    });
    double total = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      per_frame[frames[i].id] = results[i];
      total += results[i].contains("total") ? results[i]["total"].get<double>()
                                            : results[i]["final_loss"].get<double>();
    }
    json report{{"command", *c_loss ? "distill-loss" : "refine-flow"},
                {"config",
                 {{"motion", motion_config_json(motion_cfg)},
                  {"alpha_r", distill_cfg.alpha_r},
                  {"alpha_d", distill_cfg.alpha_d},
                  {"smoothness_weight", distill_cfg.smoothness_weight},
                  {"alpha_ssim", photo_cfg.alpha_ssim},
                  {"ssim_window", photo_cfg.ssim_window},
                  {"steps", steps},
                  {"lr", lr},
                  {"noise_sigma", noise_sigma},
                  {"noise_seed", noise_seed}}},
                {"frames", per_frame},
                {"aggregate", {{"mean_loss", total / frames.size()}}}};
    write_report(report, report_path);
    std::cout << "mean loss " << total / frames.size() << " over " << frames.size()
              << " frames\n";
    return 0;
  }

  if (*c_edepth) {
    depth_cfg.median_scaling = !no_median_scaling;
    depth_cfg.validate();
    const auto ids = png_stems(pred_dir);
    std::vector<json> results(ids.size());
    std::vector<sfk::DepthMetrics> per_frame(ids.size());
    parallel_for(ids.size(), jobs, [&](std::size_t i) {
      const auto pred =
          sfk::read_depth_png((fs::path(pred_dir) / (ids[i] + ".png")).string());
      const auto gt = sfk::read_depth_png((fs::path(gt_dir) / (ids[i] + ".png")).string());
      per_frame[i] = sfk::eval_depth(pred, gt, depth_cfg);
      results[i] = depth_metrics_json(per_frame[i]);
    });
    // aggregate: mean of per-frame metrics (standard monocular protocol)
    sfk::DepthMetrics agg;
    for (const auto& m : per_frame) {
      agg.abs_rel += m.abs_rel;
      agg.sq_rel += m.sq_rel;
      agg.rmse += m.rmse;
      agg.rmse_log += m.rmse_log;
      agg.delta1 += m.delta1;
      agg.delta2 += m.delta2;
      agg.delta3 += m.delta3;
    }
    const double n = static_cast<double>(ids.size());
    agg.abs_rel /= n;
    agg.sq_rel /= n;
    agg.rmse /= n;
    agg.rmse_log /= n;
    agg.delta1 /= n;
    agg.delta2 /= n;
    agg.delta3 /= n;
    json frames_json = json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) frames_json[ids[i]] = results[i];
    json report{{"command", "eval-depth"},
                {"config",
                 {{"min_depth", depth_cfg.min_depth},
                  {"max_depth", depth_cfg.max_depth},
                  {"median_scaling", depth_cfg.median_scaling}}},
                {"frames", frames_json},
                {"aggregate", depth_metrics_json(agg)}};
    write_report(report, report_path);
    std::cout << "abs_rel " << agg.abs_rel << "  rmse " << agg.rmse << "  d1 "
              << agg.delta1 << "\n";
    return 0;
  }

  if (*c_eflow) {
    const auto ids = png_stems(pred_dir);
    std::vector<sfk::FlowField> preds(ids.size()), gts(ids.size());
    std::vector<sfk::BinaryMask> nocs(ids.size());
    std::vector<json> results(ids.size());
    parallel_for(ids.size(), jobs, [&](std::size_t i) {
      preds[i] = sfk::read_flow_png((fs::path(pred_dir) / (ids[i] + ".png")).string());
      gts[i] = sfk::read_flow_png((fs::path(gt_dir) / (ids[i] + ".png")).string());
      nocs[i] = noc_dir.empty()
                    ? sfk::BinaryMask(gts[i].width, gts[i].height, 1)
                    : sfk::read_mask_png((fs::path(noc_dir) / (ids[i] + ".png")).string());
      results[i] = flow_metrics_json(sfk::eval_flow(preds[i], gts[i], nocs[i]));
    });
    // aggregate: global pixel pooling
    const auto agg =
        sfk::eval_flow(vstack(preds), vstack(gts), vstack(nocs));
    json frames_json = json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) frames_json[ids[i]] = results[i];
    json report{{"command", "eval-flow"},
                {"config", {{"noc", !noc_dir.empty()}}},
                {"frames", frames_json},
                {"aggregate", flow_metrics_json(agg)}};
    write_report(report, report_path);
    std::cout << "epe_all " << agg.epe_all << "  epe_noc " << agg.epe_noc << "  f1 "
              << agg.f1 << "\n";
    return 0;
  }

  if (*c_emotion) {
    const auto ids = png_stems(pred_dir);
    std::vector<sfk::BinaryMask> preds(ids.size()), gts(ids.size());
    std::vector<json> results(ids.size());
    parallel_for(ids.size(), jobs, [&](std::size_t i) {
      preds[i] = sfk::read_mask_png((fs::path(pred_dir) / (ids[i] + ".png")).string());
      gts[i] = sfk::read_mask_png((fs::path(gt_dir) / (ids[i] + ".png")).string());
      results[i] = seg_metrics_json(sfk::eval_motion_seg(preds[i], gts[i]));
    });
    const auto agg = sfk::eval_motion_seg(vstack(preds), vstack(gts));
    json frames_json = json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) frames_json[ids[i]] = results[i];
    json report{{"command", "eval-motion"},
                {"config", json::object()},
                {"frames", frames_json},
                {"aggregate", seg_metrics_json(agg)}};
    write_report(report, report_path);
    std::cout << "pixel_acc " << agg.pixel_acc << "  mean_iou " << agg.mean_iou << "\n";
    return 0;
  }

  if (*c_esem) {
    const auto ids = png_stems(pred_dir);
    std::vector<sfk::LabelMap> preds(ids.size()), gts(ids.size());
    std::vector<json> results(ids.size());
    parallel_for(ids.size(), jobs, [&](std::size_t i) {
      preds[i] = sfk::read_label_png((fs::path(pred_dir) / (ids[i] + ".png")).string());
      gts[i] = sfk::read_label_png((fs::path(gt_dir) / (ids[i] + ".png")).string());
      const auto m = sfk::eval_semantic(preds[i], gts[i], class_count);
      results[i] = {{"miou_class", m.miou_class},
                    {"miou_category", m.miou_category},
                    {"pixel_acc", m.pixel_acc}};
    });
    const auto agg = sfk::eval_semantic(vstack(preds), vstack(gts), class_count);
    json frames_json = json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) frames_json[ids[i]] = results[i];
    json report{{"command", "eval-sem"},
                {"config", {{"classes", class_count}}},
                {"frames", frames_json},
                {"aggregate",
                 {{"miou_class", agg.miou_class},
                  {"miou_category", agg.miou_category},
                  {"pixel_acc", agg.pixel_acc}}}};
    write_report(report, report_path);
    std::cout << "miou_class " << agg.miou_class << "  pixel_acc " << agg.pixel_acc
              << "\n";
    return 0;
  }

  if (*c_viz) {
    const auto ids = png_stems(pred_dir);
    parallel_for(ids.size(), jobs, [&](std::size_t i) {
      const auto in = (fs::path(pred_dir) / (ids[i] + ".png")).string();
      const auto out = (fs::path(out_dir) / (ids[i] + ".png")).string();
      sfk::ImageBuffer img;
      if (viz_type == "flow") {
        img = sfk::colorize_flow(sfk::read_flow_png(in));
      } else if (viz_type == "depth") {
        img = sfk::colorize_depth(sfk::read_depth_png(in));
      } else if (viz_type == "prob") {
        const auto d = sfk::read_depth_png(in);
        sfk::MotionProbMap p(d.width, d.height);
        for (std::size_t k = 0; k < p.p.size(); ++k) {
          p.valid[k] = d.valid[k];
          p.p[k] = std::clamp(d.values[k] * 256.0 / 65535.0, 0.0, 1.0);
        }
        img = sfk::colorize_prob(p);
      } else {
        img = sfk::colorize_mask(sfk::read_mask_png(in));
      }
      sfk::write_image_png(img, out);
    });
    std::cout << "wrote " << ids.size() << " visualizations to " << out_dir << "\n";
    return 0;
  }

  return 0;
}

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sfk::DecodeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
  } catch (const sfk::WrongBitDepth& e) {
    std::cerr << "data error: " << e.what() << "\n";
  } catch (const sfk::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
  } catch (const sfk::DimensionMismatch& e) {
    std::cerr << "data error: " << e.what() << "\n";
  } catch (const sfk::UnknownClassId& e) {
    std::cerr << "data error: " << e.what() << "\n";
  } catch (const sfk::NonOrthonormalRotation& e) {
    std::cerr << "data error: " << e.what() << "\n";
  } catch (const sfk::SpecError& e) {
    std::cerr << "data error: " << e.what() << "\n";
  } catch (const sfk::Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 3;
}
