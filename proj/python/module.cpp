#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sfk/distill.hpp"
#include "sfk/geometry.hpp"
#include "sfk/metrics.hpp"
#include "sfk/motion.hpp"
#include "sfk/synth.hpp"

namespace py = pybind11;
using namespace sfk;

namespace {

using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using LArray = py::array_t<std::uint16_t, py::array::c_style | py::array::forcecast>;

// Depth arrays are HxW float; NaN or non-positive entries count as invalid.
DepthMap to_depth(const DArray& a) {
  if (a.ndim() != 2) throw InvalidValue("depth array must be HxW");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  DepthMap d(w, h);
  auto r = a.unchecked<2>();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = r(y, x);
      if (std::isfinite(v) && v > 0) d.set(x, y, v);
    }
  return d;
}

DArray from_depth(const DepthMap& d) {
  DArray out({d.height, d.width});
  auto r = out.mutable_unchecked<2>();
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) r(y, x) = d.is_valid(x, y) ? d.at(x, y) : 0.0;
  return out;
}

// Flow arrays are HxWx2 float (u, v); NaN entries count as invalid.
FlowField to_flow(const DArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 2) throw InvalidValue("flow array must be HxWx2");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  FlowField f(w, h);
  auto r = a.unchecked<3>();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double u = r(y, x, 0), v = r(y, x, 1);
      if (std::isfinite(u) && std::isfinite(v)) f.set(x, y, u, v);
    }
  return f;
}

py::tuple from_flow(const FlowField& f) {
  DArray out({f.height, f.width, 2});
  BArray valid({f.height, f.width});
  auto r = out.mutable_unchecked<3>();
  auto rv = valid.mutable_unchecked<2>();
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      const std::size_t i = f.idx(x, y);
      r(y, x, 0) = f.u[i];
      r(y, x, 1) = f.v[i];
      rv(y, x) = f.valid[i];
    }
  return py::make_tuple(out, valid);
}

BinaryMask to_mask(const BArray& a) {
  if (a.ndim() != 2) throw InvalidValue("mask array must be HxW");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  std::vector<std::uint8_t> bits(a.data(), a.data() + a.size());
  for (auto& b : bits) b = b ? 1 : 0;
  return BinaryMask::from_bits(w, h, std::move(bits));
}

BArray from_mask(const BinaryMask& m) {
  BArray out({m.height, m.width});
  std::copy(m.bits.begin(), m.bits.end(), out.mutable_data());
  return out;
}

LabelMap to_labels(const LArray& a) {
  if (a.ndim() != 2) throw InvalidValue("label array must be HxW");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  LabelMap l(w, h);
  std::copy(a.data(), a.data() + a.size(), l.ids.begin());
  return l;
}

ImageBuffer to_image(const DArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw InvalidValue("image array must be HxWx3");
  const int h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return ImageBuffer::from_data(w, h, 3,
                                std::vector<double>(a.data(), a.data() + a.size()));
}

DArray from_image(const ImageBuffer& img) {
  DArray out({img.height, img.width, img.channels});
  std::copy(img.data.begin(), img.data.end(), out.mutable_data());
  return out;
}

CameraIntrinsics to_intrinsics(const py::tuple& t) {
  if (t.size() != 4) throw InvalidValue("intrinsics must be (fx, fy, cx, cy)");
  return CameraIntrinsics(t[0].cast<double>(), t[1].cast<double>(), t[2].cast<double>(),
                          t[3].cast<double>());
}

RelativePose to_pose(const DArray& rotation, const py::tuple& translation) {
  if (rotation.ndim() != 2 || rotation.shape(0) != 3 || rotation.shape(1) != 3)
    throw InvalidValue("rotation must be 3x3");
  if (translation.size() != 3) throw InvalidValue("translation must have 3 entries");
  RelativePose p;
  std::copy(rotation.data(), rotation.data() + 9, p.rotation.begin());
  for (int i = 0; i < 3; ++i) p.translation[i] = translation[i].cast<double>();
  return RelativePose(p.rotation, p.translation);  // revalidates orthonormality
}

MotionConfig motion_cfg(double xi, double tau, double eps_norm) {
  MotionConfig c;
  c.xi = xi;
  c.tau = tau;
  c.eps_norm = eps_norm;
  c.validate();
  return c;
}

py::tuple prob_tuple(const MotionProbMap& p) {
  DArray out({p.height, p.width});
  BArray valid({p.height, p.width});
  std::copy(p.p.begin(), p.p.end(), out.mutable_data());
  std::copy(p.valid.begin(), p.valid.end(), valid.mutable_data());
  return py::make_tuple(out, valid);
}

}  // namespace

PYBIND11_MODULE(_sceneflowkit, m) {
  m.doc() = "Supervision-signal and evaluation core for multi-task scene understanding";

  py::register_exception<Error>(m, "SfkError");

  m.def(
      "rigid_flow",
      [](const DArray& depth, const py::tuple& intrinsics, const DArray& rotation,
         const py::tuple& translation) {
        return from_flow(rigid_flow(to_depth(depth), to_intrinsics(intrinsics),
                                    to_pose(rotation, translation)));
      },
      py::arg("depth"), py::arg("intrinsics"), py::arg("rotation"), py::arg("translation"),
      "Camera-motion flow from depth, intrinsics (fx, fy, cx, cy) and relative pose. "
      "Returns (flow HxWx2, valid HxW).");

  m.def(
      "boundary_mask",
      [](const DArray& depth, const py::tuple& intrinsics, const DArray& rotation,
         const py::tuple& translation) {
        return from_mask(boundary_mask(to_depth(depth), to_intrinsics(intrinsics),
                                       to_pose(rotation, translation)));
      },
      py::arg("depth"), py::arg("intrinsics"), py::arg("rotation"), py::arg("translation"),
      "1 where the rigid reprojection stays inside the frame and in front of the camera.");

  m.def(
      "motion_probability",
      [](const DArray& flow, const DArray& rigid, double xi, double tau, double eps_norm) {
        return prob_tuple(
            motion_probability(to_flow(flow), to_flow(rigid), motion_cfg(xi, tau, eps_norm)));
      },
      py::arg("flow"), py::arg("rigid"), py::arg("xi") = 0.5, py::arg("tau") = 0.5,
      py::arg("eps_norm") = 1e-3,
      "Per-pixel motion probability in [0,1] from optical vs camera-motion flow. "
      "Returns (prob HxW, valid HxW).");

  m.def(
      "consistency_mask",
      [](const DArray& flow, const DArray& rigid, double xi, double tau, double eps_norm) {
        const auto cfg = motion_cfg(xi, tau, eps_norm);
        return from_mask(consistency_mask(
            motion_probability(to_flow(flow), to_flow(rigid), cfg), cfg));
      },
      py::arg("flow"), py::arg("rigid"), py::arg("xi") = 0.5, py::arg("tau") = 0.5,
      py::arg("eps_norm") = 1e-3, "1 where the two flows agree (probability < xi).");

  m.def(
      "dynamic_prior_mask",
      [](const LArray& labels) {
        return from_mask(dynamic_prior_mask(to_labels(labels), MotionConfig{}));
      },
      py::arg("labels"), "1 on classes that can move (Cityscapes train ids 11-18).");

  m.def(
      "final_mask",
      [](const BArray& dynamic, const BArray& consistency, const BArray& boundary) {
        return from_mask(final_mask(to_mask(dynamic), to_mask(consistency), to_mask(boundary)));
      },
      py::arg("dynamic"), py::arg("consistency"), py::arg("boundary"),
      "(dynamic OR consistency) AND boundary.");

  m.def(
      "motion_segmentation",
      [](const DArray& flow, const DArray& rigid, const LArray& labels, double tau) {
        MotionConfig cfg;
        cfg.tau = tau;
        cfg.validate();
        return from_mask(motion_segmentation(to_flow(flow), to_flow(rigid),
                                             to_labels(labels), cfg));
      },
      py::arg("flow"), py::arg("rigid"), py::arg("labels"), py::arg("tau") = 0.5,
      "Moving-object mask: dynamic class AND motion probability > tau.");

  m.def(
      "self_distillation_loss",
      [](const DArray& sf, const DArray& teacher, const DArray& rigid, const BArray& mask,
         const DArray& target, const std::vector<DArray>& sources, double alpha_r,
         double alpha_d, double alpha_ssim) {
        DistillConfig cfg;
        cfg.alpha_r = alpha_r;
        cfg.alpha_d = alpha_d;
        PhotometricConfig pcfg;
        pcfg.alpha_ssim = alpha_ssim;
        std::vector<ImageBuffer> srcs;
        for (const auto& s : sources) srcs.push_back(to_image(s));
        const auto lb = self_distillation_loss(to_flow(sf), to_flow(teacher), to_flow(rigid),
                                               to_mask(mask), to_image(target), srcs, cfg, pcfg);
        return py::dict(py::arg("total") = lb.total, py::arg("rigid_term") = lb.rigid_term,
                        py::arg("teacher_term") = lb.teacher_term,
                        py::arg("photo_term") = lb.photo_term);
      },
      py::arg("flow"), py::arg("teacher"), py::arg("rigid"), py::arg("mask"),
      py::arg("target"), py::arg("sources"), py::arg("alpha_r") = 0.025,
      py::arg("alpha_d") = 0.2, py::arg("alpha_ssim") = 0.85,
      "Masked distillation objective; returns the scalar terms as a dict.");

  m.def(
      "refine_flow",
      [](const DArray& init, const DArray& teacher, const DArray& rigid, const BArray& mask,
         const DArray& target, const std::vector<DArray>& sources, int steps, double lr,
         double alpha_r, double alpha_d, double alpha_ssim) {
        DistillConfig cfg;
        cfg.alpha_r = alpha_r;
        cfg.alpha_d = alpha_d;
        PhotometricConfig pcfg;
        pcfg.alpha_ssim = alpha_ssim;
        std::vector<ImageBuffer> srcs;
        for (const auto& s : sources) srcs.push_back(to_image(s));
        const auto rr = refine_flow(to_flow(init), to_flow(teacher), to_flow(rigid),
                                    to_mask(mask), to_image(target), srcs, cfg, pcfg, steps, lr);
        return py::make_tuple(from_flow(rr.flow), rr.loss_history);
      },
      py::arg("init"), py::arg("teacher"), py::arg("rigid"), py::arg("mask"),
      py::arg("target"), py::arg("sources"), py::arg("steps") = 100, py::arg("lr") = 300.0,
      py::arg("alpha_r") = 0.025, py::arg("alpha_d") = 0.2, py::arg("alpha_ssim") = 0.85,
      "Gradient-descent flow refinement; returns ((flow, valid), loss_history).");

  m.def(
      "bilinear_warp",
      [](const DArray& src, const DArray& flow) {
        return from_image(bilinear_warp(to_image(src), to_flow(flow)));
      },
      py::arg("src"), py::arg("flow"), "Backward warp with clamp-to-edge sampling.");

  m.def(
      "eval_depth",
      [](const DArray& pred, const DArray& gt, double min_depth, double max_depth,
         bool median_scaling) {
        DepthEvalConfig cfg;
        cfg.min_depth = min_depth;
        cfg.max_depth = max_depth;
        cfg.median_scaling = median_scaling;
        cfg.validate();
        const auto r = eval_depth(to_depth(pred), to_depth(gt), cfg);
        return py::dict(py::arg("abs_rel") = r.abs_rel, py::arg("sq_rel") = r.sq_rel,
                        py::arg("rmse") = r.rmse, py::arg("rmse_log") = r.rmse_log,
                        py::arg("delta1") = r.delta1, py::arg("delta2") = r.delta2,
                        py::arg("delta3") = r.delta3);
      },
      py::arg("pred"), py::arg("gt"), py::arg("min_depth") = 1e-3,
      py::arg("max_depth") = 80.0, py::arg("median_scaling") = true,
      "Monocular depth metrics, capped range, optional median scaling.");

  m.def(
      "eval_flow",
      [](const DArray& pred, const DArray& gt, py::object noc) {
        const auto p = to_flow(pred), g = to_flow(gt);
        const BinaryMask n = noc.is_none() ? BinaryMask(g.width, g.height, 1)
                                           : to_mask(noc.cast<BArray>());
        const auto r = eval_flow(p, g, n);
        return py::dict(py::arg("epe_noc") = r.epe_noc, py::arg("epe_all") = r.epe_all,
                        py::arg("f1") = r.f1, py::arg("valid_all") = r.valid_all,
                        py::arg("valid_noc") = r.valid_noc);
      },
      py::arg("pred"), py::arg("gt"), py::arg("noc") = py::none(),
      "Endpoint error and 3px-and-5% outlier rate.");

  m.def(
      "eval_motion_seg",
      [](const BArray& pred, const BArray& gt) {
        const auto r = eval_motion_seg(to_mask(pred), to_mask(gt));
        return py::dict(py::arg("pixel_acc") = r.pixel_acc, py::arg("mean_acc") = r.mean_acc,
                        py::arg("mean_iou") = r.mean_iou, py::arg("fw_iou") = r.fw_iou);
      },
      py::arg("pred"), py::arg("gt"), "Two-class segmentation metrics.");

  m.def(
      "eval_semantic",
      [](const LArray& pred, const LArray& gt, int classes) {
        const auto r = eval_semantic(to_labels(pred), to_labels(gt), classes);
        return py::dict(py::arg("miou_class") = r.miou_class,
                        py::arg("miou_category") = r.miou_category,
                        py::arg("pixel_acc") = r.pixel_acc);
      },
      py::arg("pred"), py::arg("gt"), py::arg("classes") = 19,
      "Semantic segmentation metrics over train ids, 255 ignored.");

  m.def(
      "render_scene",
      [](int width, int height, int frames, std::uint64_t seed) {
        SceneSpec spec;
        spec.width = width;
        spec.height = height;
        spec.frames = frames;
        spec.cx = (width - 1) / 2.0;
        spec.cy = (height - 1) / 2.0;
        spec.texture_seed = seed;
        const auto scene = render(spec);
        py::list out;
        for (const auto& f : scene.frames) {
          LArray sem({f.semantic.height, f.semantic.width});
          std::copy(f.semantic.ids.begin(), f.semantic.ids.end(), sem.mutable_data());
          out.append(py::dict(
              py::arg("image") = from_image(f.image), py::arg("depth") = from_depth(f.depth),
              py::arg("flow") = from_flow(f.flow), py::arg("rigid") = from_flow(f.rigid),
              py::arg("semantic") = sem, py::arg("moving") = from_mask(f.moving),
              py::arg("occlusion") = from_mask(f.occlusion)));
        }
        return py::make_tuple(
            py::make_tuple(scene.intrinsics.fx, scene.intrinsics.fy, scene.intrinsics.cx,
                           scene.intrinsics.cy),
            out);
      },
      py::arg("width") = 96, py::arg("height") = 64, py::arg("frames") = 3,
      py::arg("seed") = 1,
      "Synthetic scene with exact ground truth; returns (intrinsics, frame dicts).");
}
