#include "sfk/distill.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace sfk {

void PhotometricConfig::validate() const {
  if (alpha_ssim < 0.0 || alpha_ssim > 1.0) {
    throw InvalidValue("PhotometricConfig: alpha_ssim must be in [0,1]");
  }
  if (ssim_window < 1 || ssim_window % 2 == 0) {
    throw InvalidValue("PhotometricConfig: ssim_window must be odd and >= 1");
  }
  if (c1 <= 0.0 || c2 <= 0.0) throw InvalidValue("PhotometricConfig: c1, c2 must be > 0");
}

void DistillConfig::validate() const {
  if (alpha_r < 0.0 || alpha_d < 0.0 || smoothness_weight < 0.0) {
    throw InvalidValue("DistillConfig: weights must be >= 0");
  }
}

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

// SSIM at one pixel/channel; b is an accessor so a single warped sample can
// be overridden without copying the image.
double ssim_at(const ImageBuffer& a, const std::function<double(int, int, int)>& b,
               int x, int y, int c, const PhotometricConfig& cfg) {
  const int r = cfg.ssim_window / 2;
  double ma = 0, mb = 0, aa = 0, bb = 0, ab = 0;
  int n = 0;
  for (int dy = -r; dy <= r; ++dy) {
    const int yy = reflect(y + dy, a.height);
    for (int dx = -r; dx <= r; ++dx) {
      const int xx = reflect(x + dx, a.width);
      const double va = a.at(xx, yy, c);
      const double vb = b(xx, yy, c);
      ma += va;
      mb += vb;
      aa += va * va;
      bb += vb * vb;
      ab += va * vb;
      ++n;
    }
  }
  ma /= n;
  mb /= n;
  const double sa = aa / n - ma * ma;
  const double sb = bb / n - mb * mb;
  const double sab = ab / n - ma * mb;
  return ((2 * ma * mb + cfg.c1) * (2 * sab + cfg.c2)) /
         ((ma * ma + mb * mb + cfg.c1) * (sa + sb + cfg.c2));
}

double ssim_term_at(const ImageBuffer& a, const std::function<double(int, int, int)>& b,
                    int x, int y, const PhotometricConfig& cfg) {
  double s = 0.0;
  for (int c = 0; c < a.channels; ++c) s += ssim_at(a, b, x, y, c, cfg);
  return cfg.alpha_ssim * (1.0 - s / a.channels) / 2.0;
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

ScalarMap photometric_error(const ImageBuffer& a, const ImageBuffer& b,
                            const PhotometricConfig& cfg) {
  detail::require_same_size(a.width, a.height, b.width, b.height, "photometric_error");
  if (a.channels != b.channels) throw DimensionMismatch("photometric_error: channel count");
  cfg.validate();
  auto bat = [&b](int x, int y, int c) { return b.at(x, y, c); };
  ScalarMap out(a.width, a.height);
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      double l1 = 0.0;
      for (int c = 0; c < a.channels; ++c) l1 += std::abs(a.at(x, y, c) - b.at(x, y, c));
      l1 /= a.channels;
      double e = (1.0 - cfg.alpha_ssim) * l1;
      if (cfg.alpha_ssim > 0.0) e += ssim_term_at(a, bat, x, y, cfg);
      out.at(x, y) = e;
    }
  }
  return out;
}

ScalarMap min_reprojection(const std::vector<ScalarMap>& err_maps) {
  if (err_maps.empty()) throw InvalidValue("min_reprojection: empty map list");
  const auto& first = err_maps.front();
  ScalarMap out(first.width, first.height);
  for (const auto& m : err_maps) {
    detail::require_same_size(first.width, first.height, m.width, m.height,
                              "min_reprojection");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& m : err_maps) {
      if (!m.valid[i]) continue;
      best = std::min(best, m.values[i]);
      any = true;
    }
    out.values[i] = any ? best : 0.0;
    out.valid[i] = any ? 1 : 0;
  }
  return out;
}

BinaryMask automask(const ScalarMap& warped_err, const ScalarMap& identity_err) {
  detail::require_same_size(warped_err.width, warped_err.height, identity_err.width,
                            identity_err.height, "automask");
  BinaryMask out(warped_err.width, warped_err.height);
  for (std::size_t i = 0; i < out.bits.size(); ++i) {
    out.bits[i] = (warped_err.valid[i] && identity_err.valid[i] &&
                   warped_err.values[i] < identity_err.values[i])
                      ? 1
                      : 0;
  }
  return out;
}

DepthMap depth_normalize(const DepthMap& d) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (d.valid[i]) {
      sum += d.values[i];
      ++n;
    }
  }
  if (n == 0) throw NoValidPixels("depth_normalize: no valid pixels");
  const double mean = sum / n;
  DepthMap out = d;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (out.valid[i]) out.values[i] /= mean;
  }
  return out;
}

double smoothness_loss(const DepthMap& d, const ImageBuffer& img) {
  detail::require_same_size(d.width, d.height, img.width, img.height, "smoothness_loss");
  const DepthMap dn = depth_normalize(d);
  const auto [gx, gy] = image_gradients(img);
  double acc = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      if (!dn.is_valid(x, y)) continue;
      double ddx = 0.0, ddy = 0.0;
      if (x + 1 < d.width && dn.is_valid(x + 1, y)) ddx = dn.at(x + 1, y) - dn.at(x, y);
      if (y + 1 < d.height && dn.is_valid(x, y + 1)) ddy = dn.at(x, y + 1) - dn.at(x, y);
      acc += std::abs(ddx) * std::exp(-std::abs(gx.at(x, y))) +
             std::abs(ddy) * std::exp(-std::abs(gy.at(x, y)));
      ++n;
    }
  }
  if (n == 0) throw NoValidPixels("smoothness_loss: no valid pixels");
  return acc / n;
}

namespace {

struct PhotoState {
  std::vector<ImageBuffer> warped;
  std::vector<ScalarMap> psi;       // full photometric error per source
  ScalarMap psi_min;
  std::vector<int> argmin;          // source index per pixel (-1 if none)
};

PhotoState photometric_state(const FlowField& sf, const ImageBuffer& it,
                             const std::vector<ImageBuffer>& sources,
                             const PhotometricConfig& pcfg) {
  if (sources.empty()) throw InvalidValue("self_distillation: no source images");
  PhotoState st;
  for (const auto& s : sources) {
    st.warped.push_back(bilinear_warp(s, sf));
    st.psi.push_back(photometric_error(it, st.warped.back(), pcfg));
  }
  st.psi_min = min_reprojection(st.psi);
  st.argmin.assign(st.psi_min.size(), -1);
  for (std::size_t i = 0; i < st.psi_min.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < st.psi.size(); ++s) {
      if (st.psi[s].values[i] < best) {
        best = st.psi[s].values[i];
        st.argmin[i] = static_cast<int>(s);
      }
    }
  }
  return st;
}

void check_distill_dims(const FlowField& sf, const FlowField& f_teacher,
                        const FlowField& f_rigid, const BinaryMask& m,
                        const ImageBuffer& it, const std::vector<ImageBuffer>& sources) {
  detail::require_same_size(sf.width, sf.height, f_teacher.width, f_teacher.height,
                            "self_distillation: teacher flow");
  detail::require_same_size(sf.width, sf.height, f_rigid.width, f_rigid.height,
                            "self_distillation: rigid flow");
  detail::require_same_size(sf.width, sf.height, m.width, m.height,
                            "self_distillation: mask");
  detail::require_same_size(sf.width, sf.height, it.width, it.height,
                            "self_distillation: target image");
  for (const auto& s : sources) {
    detail::require_same_size(sf.width, sf.height, s.width, s.height,
                              "self_distillation: source image");
  }
}

}  // namespace

LossBreakdown self_distillation_loss(const FlowField& sf, const FlowField& f_teacher,
                                     const FlowField& f_rigid, const BinaryMask& m,
                                     const ImageBuffer& it,
                                     const std::vector<ImageBuffer>& sources,
                                     const DistillConfig& cfg,
                                     const PhotometricConfig& pcfg) {
  check_distill_dims(sf, f_teacher, f_rigid, m, it, sources);
  cfg.validate();
  const PhotoState st = photometric_state(sf, it, sources, pcfg);

  LossBreakdown lb;
  lb.rigid_map = ScalarMap(sf.width, sf.height);
  lb.teacher_map = ScalarMap(sf.width, sf.height);
  lb.photo_map = ScalarMap(sf.width, sf.height);
  const double n = static_cast<double>(sf.width) * sf.height;
  for (std::size_t i = 0; i < lb.rigid_map.size(); ++i) {
    if (!sf.valid[i] || !f_teacher.valid[i] || !f_rigid.valid[i]) {
      lb.rigid_map.valid[i] = lb.teacher_map.valid[i] = lb.photo_map.valid[i] = 0;
      continue;
    }
    const double mask = m.bits[i];
    lb.rigid_map.values[i] = cfg.alpha_r * (1.0 - mask) *
                             (std::abs(sf.u[i] - f_rigid.u[i]) +
                              std::abs(sf.v[i] - f_rigid.v[i]));
    lb.teacher_map.values[i] = cfg.alpha_d * mask *
                               (std::abs(sf.u[i] - f_teacher.u[i]) +
                                std::abs(sf.v[i] - f_teacher.v[i]));
    lb.photo_map.values[i] = mask * st.psi_min.values[i];
    lb.rigid_term += lb.rigid_map.values[i];
    lb.teacher_term += lb.teacher_map.values[i];
    lb.photo_term += lb.photo_map.values[i];
  }
  lb.rigid_term /= n;
  lb.teacher_term /= n;
  lb.photo_term /= n;
  lb.total = lb.rigid_term + lb.teacher_term + lb.photo_term;
  return lb;
}

FlowField self_distillation_gradient(const FlowField& sf, const FlowField& f_teacher,
                                     const FlowField& f_rigid, const BinaryMask& m,
                                     const ImageBuffer& it,
                                     const std::vector<ImageBuffer>& sources,
                                     const DistillConfig& cfg,
                                     const PhotometricConfig& pcfg) {
  check_distill_dims(sf, f_teacher, f_rigid, m, it, sources);
  cfg.validate();
  pcfg.validate();
  const PhotoState st = photometric_state(sf, it, sources, pcfg);
  std::vector<std::pair<ImageBuffer, ImageBuffer>> jac;
  for (const auto& s : sources) jac.push_back(bilinear_warp_jacobian(s, sf));

  const int w = sf.width, h = sf.height;
  const double n = static_cast<double>(w) * h;
  const int r = pcfg.ssim_window / 2;
  const int box = 2 * r;  // SSIM influence radius incl. reflection
  const double fd_step = 1e-3;

  FlowField grad(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = sf.idx(x, y);
      if (!sf.valid[i] || !f_teacher.valid[i] || !f_rigid.valid[i]) {
        grad.set(x, y, 0.0, 0.0);
        continue;
      }
      const double mask = m.bits[i];
      double gu = cfg.alpha_r * (1.0 - mask) * sgn(sf.u[i] - f_rigid.u[i]) +
                  cfg.alpha_d * mask * sgn(sf.u[i] - f_teacher.u[i]);
      double gv = cfg.alpha_r * (1.0 - mask) * sgn(sf.v[i] - f_rigid.v[i]) +
                  cfg.alpha_d * mask * sgn(sf.v[i] - f_teacher.v[i]);

      // L1 part of psi, analytic through the warp Jacobian (local to p).
      if (mask > 0.0 && st.argmin[i] >= 0) {
        const int s0 = st.argmin[i];
        const auto& wimg = st.warped[s0];
        double lu = 0.0, lv = 0.0;
        for (int c = 0; c < it.channels; ++c) {
          const double s = sgn(wimg.at(x, y, c) - it.at(x, y, c));
          lu += s * jac[s0].first.at(x, y, c);
          lv += s * jac[s0].second.at(x, y, c);
        }
        gu += (1.0 - pcfg.alpha_ssim) * lu / it.channels;
        gv += (1.0 - pcfg.alpha_ssim) * lv / it.channels;
      }

      // SSIM part by central differences: perturbing (u,v) at p moves the
      // warped sample at p, which touches SSIM windows centered within the
      // influence box (masked pixels only).
      if (pcfg.alpha_ssim > 0.0) {
        for (int comp = 0; comp < 2; ++comp) {
          double diff = 0.0;
          for (int side = 0; side < 2; ++side) {
            const double delta = side == 0 ? fd_step : -fd_step;
            const double su = x + sf.u[i] + (comp == 0 ? delta : 0.0);
            const double sv = y + sf.v[i] + (comp == 1 ? delta : 0.0);
            // Perturbed warped value at p for every source.
            std::vector<double> pert(sources.size() * it.channels);
            for (std::size_t s = 0; s < sources.size(); ++s) {
              const auto& img = sources[s];
              const double cxs = std::clamp(su, 0.0, static_cast<double>(img.width - 1));
              const double cys = std::clamp(sv, 0.0, static_cast<double>(img.height - 1));
              const int x0 = static_cast<int>(std::floor(cxs));
              const int y0 = static_cast<int>(std::floor(cys));
              const int x1 = std::min(x0 + 1, img.width - 1);
              const int y1 = std::min(y0 + 1, img.height - 1);
              const double fx = cxs - x0;
              const double fy = cys - y0;
              for (int c = 0; c < it.channels; ++c) {
                const double top = (1 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
                const double bot = (1 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
                pert[s * it.channels + c] = (1 - fy) * top + fy * bot;
              }
            }
            double sum = 0.0;
            for (int qy = std::max(0, y - box); qy <= std::min(h - 1, y + box); ++qy) {
              for (int qx = std::max(0, x - box); qx <= std::min(w - 1, x + box); ++qx) {
                const auto qi = sf.idx(qx, qy);
                if (!m.bits[qi] || st.argmin[qi] < 0) continue;
                if (!sf.valid[qi] || !f_teacher.valid[qi] || !f_rigid.valid[qi]) continue;
                const int qs = st.argmin[qi];
                const auto& wimg = st.warped[qs];
                auto bat = [&](int bx, int by, int bc) {
                  if (bx == x && by == y) return pert[qs * it.channels + bc];
                  return wimg.at(bx, by, bc);
                };
                sum += ssim_term_at(it, bat, qx, qy, pcfg);
              }
            }
            diff += side == 0 ? sum : -sum;
          }
          const double g = diff / (2.0 * fd_step);
          if (comp == 0) {
            gu += g;
          } else {
            gv += g;
          }
        }
      }
      grad.set(x, y, gu / n, gv / n);
    }
  }
  return grad;
}

RefineResult refine_flow(const FlowField& init, const FlowField& f_teacher,
                         const FlowField& f_rigid, const BinaryMask& m,
                         const ImageBuffer& it, const std::vector<ImageBuffer>& sources,
                         const DistillConfig& cfg, const PhotometricConfig& pcfg,
                         int steps, double lr) {
  if (steps < 0) throw InvalidValue("refine_flow: steps must be >= 0");
  if (!(lr > 0.0)) throw InvalidValue("refine_flow: lr must be > 0");
  RefineResult rr;
  rr.flow = init;
  for (int step = 0; step < steps; ++step) {
    const auto lb = self_distillation_loss(rr.flow, f_teacher, f_rigid, m, it, sources,
                                           cfg, pcfg);
    rr.loss_history.push_back(lb.total);
    FlowField g = self_distillation_gradient(rr.flow, f_teacher, f_rigid, m, it, sources,
                                             cfg, pcfg);
    if (cfg.smoothness_weight > 0.0) {
      // Anisotropic TV subgradient on each flow component.
      const double wgt = cfg.smoothness_weight / (static_cast<double>(init.width) *
                                                  init.height);
      for (int y = 0; y < init.height; ++y) {
        for (int x = 0; x < init.width; ++x) {
          const auto i = rr.flow.idx(x, y);
          double tu = 0.0, tv = 0.0;
          if (x + 1 < init.width) {
            tu -= sgn(rr.flow.u[rr.flow.idx(x + 1, y)] - rr.flow.u[i]);
            tv -= sgn(rr.flow.v[rr.flow.idx(x + 1, y)] - rr.flow.v[i]);
          }
          if (x > 0) {
            tu += sgn(rr.flow.u[i] - rr.flow.u[rr.flow.idx(x - 1, y)]);
            tv += sgn(rr.flow.v[i] - rr.flow.v[rr.flow.idx(x - 1, y)]);
          }
          if (y + 1 < init.height) {
            tu -= sgn(rr.flow.u[rr.flow.idx(x, y + 1)] - rr.flow.u[i]);
            tv -= sgn(rr.flow.v[rr.flow.idx(x, y + 1)] - rr.flow.v[i]);
          }
          if (y > 0) {
            tu += sgn(rr.flow.u[i] - rr.flow.u[rr.flow.idx(x, y - 1)]);
            tv += sgn(rr.flow.v[i] - rr.flow.v[rr.flow.idx(x, y - 1)]);
          }
          g.u[i] += wgt * tu;
          g.v[i] += wgt * tv;
        }
      }
    }
    for (std::size_t i = 0; i < rr.flow.u.size(); ++i) {
      if (!rr.flow.valid[i]) continue;
      rr.flow.u[i] -= lr * g.u[i];
      rr.flow.v[i] -= lr * g.v[i];
    }
  }
  const auto lb = self_distillation_loss(rr.flow, f_teacher, f_rigid, m, it, sources,
                                         cfg, pcfg);
  rr.loss_history.push_back(lb.total);
  return rr;
}

}  // namespace sfk
