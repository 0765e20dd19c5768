#include "sfk/dataio.hpp"

#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace sfk {

namespace {

cv::Mat imread_checked(const std::string& path, int flags) {
  cv::Mat m = cv::imread(path, flags);
  if (m.empty()) throw DecodeError("cannot decode " + path);
  return m;
}

void atomic_imwrite(const std::string& path, const cv::Mat& m) {
  std::vector<std::uint8_t> png;
  if (!cv::imencode(".png", m, png, {cv::IMWRITE_PNG_COMPRESSION, 6})) {
    throw DecodeError("cannot encode " + path);
  }
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(reinterpret_cast<const char*>(png.data()),
              static_cast<std::streamsize>(png.size()));
    if (!out) throw DecodeError("cannot write " + path);
  }
  fs::rename(tmp, target);
}

}  // namespace

DepthMap read_depth_png(const std::string& path) {
  cv::Mat raw = imread_checked(path, cv::IMREAD_UNCHANGED);
  if (raw.type() != CV_16UC1) throw WrongBitDepth(path + ": expected 16-bit single-channel PNG");
  DepthMap d(raw.cols, raw.rows);
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) {
      const std::uint16_t v = raw.at<std::uint16_t>(y, x);
      if (v == 0) {
        d.set_invalid(x, y);
      } else {
        d.set(x, y, v / 256.0);
      }
    }
  }
  return d;
}

void write_depth_png(const DepthMap& d, const std::string& path) {
  cv::Mat raw(d.height, d.width, CV_16UC1);
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      double v = d.is_valid(x, y) ? std::round(d.at(x, y) * 256.0) : 0.0;
      raw.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(std::clamp(v, 0.0, 65535.0));
    }
  }
  atomic_imwrite(path, raw);
}

FlowField read_flow_png(const std::string& path) {
  cv::Mat raw = imread_checked(path, cv::IMREAD_UNCHANGED);
  if (raw.type() != CV_16UC3) throw WrongBitDepth(path + ": expected 16-bit 3-channel PNG");
  FlowField f(raw.cols, raw.rows);
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) {
      // OpenCV loads BGR; the file convention is (u, v, valid) in RGB order.
      const auto px = raw.at<cv::Vec3w>(y, x);
      const std::uint16_t cu = px[2], cv_ = px[1], cvalid = px[0];
      if (cvalid == 1) {
        f.set(x, y, (cu - 32768.0) / 64.0, (cv_ - 32768.0) / 64.0);
      } else {
        f.set_invalid(x, y);
      }
    }
  }
  return f;
}

void write_flow_png(const FlowField& f, const std::string& path) {
  cv::Mat raw(f.height, f.width, CV_16UC3);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const auto i = f.idx(x, y);
      std::uint16_t cu = 0, cv_ = 0, cvalid = 0;
      if (f.valid[i]) {
        cu = static_cast<std::uint16_t>(
            std::clamp(std::round(f.u[i] * 64.0 + 32768.0), 0.0, 65535.0));
        cv_ = static_cast<std::uint16_t>(
            std::clamp(std::round(f.v[i] * 64.0 + 32768.0), 0.0, 65535.0));
        cvalid = 1;
      }
      raw.at<cv::Vec3w>(y, x) = cv::Vec3w(cvalid, cv_, cu);
    }
  }
  atomic_imwrite(path, raw);
}

LabelMap read_label_png(const std::string& path) {
  cv::Mat raw = imread_checked(path, cv::IMREAD_UNCHANGED);
  if (raw.type() != CV_8UC1) throw WrongBitDepth(path + ": expected 8-bit single-channel PNG");
  LabelMap l(raw.cols, raw.rows);
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) l.at(x, y) = raw.at<std::uint8_t>(y, x);
  }
  return l;
}

void write_label_png(const LabelMap& l, const std::string& path) {
  cv::Mat raw(l.height, l.width, CV_8UC1);
  for (int y = 0; y < l.height; ++y) {
    for (int x = 0; x < l.width; ++x) {
      raw.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(l.at(x, y));
    }
  }
  atomic_imwrite(path, raw);
}

BinaryMask read_mask_png(const std::string& path) {
  cv::Mat raw = imread_checked(path, cv::IMREAD_UNCHANGED);
  if (raw.type() != CV_8UC1) throw WrongBitDepth(path + ": expected 8-bit single-channel PNG");
  BinaryMask m(raw.cols, raw.rows);
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) m.at(x, y) = raw.at<std::uint8_t>(y, x) >= 128 ? 1 : 0;
  }
  return m;
}

void write_mask_png(const BinaryMask& m, const std::string& path) {
  cv::Mat raw(m.height, m.width, CV_8UC1);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) raw.at<std::uint8_t>(y, x) = m.at(x, y) ? 255 : 0;
  }
  atomic_imwrite(path, raw);
}

ImageBuffer read_image(const std::string& path) {
  cv::Mat raw = imread_checked(path, cv::IMREAD_UNCHANGED);
  double scale;
  if (raw.type() == CV_8UC3) {
    scale = 255.0;
  } else if (raw.type() == CV_16UC3) {
    scale = 65535.0;
  } else if (raw.type() == CV_8UC1) {
    scale = 255.0;
  } else {
    throw WrongBitDepth(path + ": expected 8/16-bit RGB or 8-bit gray PNG");
  }
  const int ch = raw.channels() == 3 ? 3 : 1;
  ImageBuffer img(raw.cols, raw.rows, ch);
  for (int y = 0; y < raw.rows; ++y) {
    for (int x = 0; x < raw.cols; ++x) {
      if (ch == 3) {
        if (raw.depth() == CV_8U) {
          const auto px = raw.at<cv::Vec3b>(y, x);
          img.at(x, y, 0) = px[2] / scale;  // BGR -> RGB
          img.at(x, y, 1) = px[1] / scale;
          img.at(x, y, 2) = px[0] / scale;
        } else {
          const auto px = raw.at<cv::Vec3w>(y, x);
          img.at(x, y, 0) = px[2] / scale;
          img.at(x, y, 1) = px[1] / scale;
          img.at(x, y, 2) = px[0] / scale;
        }
      } else {
        img.at(x, y, 0) = raw.at<std::uint8_t>(y, x) / scale;
      }
    }
  }
  return img;
}

void write_image_png(const ImageBuffer& img, const std::string& path) {
  if (img.channels != 3 && img.channels != 1) {
    throw InvalidValue("write_image_png: 1 or 3 channels required");
  }
  cv::Mat raw(img.height, img.width, img.channels == 3 ? CV_8UC3 : CV_8UC1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.channels == 3) {
        cv::Vec3b px;
        for (int c = 0; c < 3; ++c) {
          px[2 - c] = static_cast<std::uint8_t>(
              std::clamp(std::round(img.at(x, y, c) * 255.0), 0.0, 255.0));
        }
        raw.at<cv::Vec3b>(y, x) = px;
      } else {
        raw.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(
            std::clamp(std::round(img.at(x, y, 0) * 255.0), 0.0, 255.0));
      }
    }
  }
  atomic_imwrite(path, raw);
}

namespace {

std::array<double, 9> reorthonormalize(const std::array<double, 9>& r) {
  // Modified Gram-Schmidt on rows.
  std::array<std::array<double, 3>, 3> rows;
  for (int i = 0; i < 3; ++i) rows[i] = {r[3 * i], r[3 * i + 1], r[3 * i + 2]};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < i; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += rows[i][k] * rows[j][k];
      for (int k = 0; k < 3; ++k) rows[i][k] -= dot * rows[j][k];
    }
    double nrm = std::sqrt(rows[i][0] * rows[i][0] + rows[i][1] * rows[i][1] +
                           rows[i][2] * rows[i][2]);
    if (nrm <= 0.0) throw NonOrthonormalRotation("degenerate rotation row");
    for (int k = 0; k < 3; ++k) rows[i][k] /= nrm;
  }
  std::array<double, 9> out;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) out[3 * i + k] = rows[i][k];
  }
  return out;
}

double det3(const std::array<double, 9>& r) {
  return r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) +
         r[2] * (r[3] * r[7] - r[4] * r[6]);
}

std::vector<double> parse_numbers(const std::string& line) {
  std::istringstream iss(line);
  std::vector<double> out;
  double x;
  while (iss >> x) out.push_back(x);
  return out;
}

}  // namespace

CameraModel read_calib(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto nums = parse_numbers(line);
    if (!nums.empty()) rows.push_back(std::move(nums));
  }
  if (rows.empty() || rows[0].size() != 4) {
    throw ParseError(path + ": first line must be 'fx fy cx cy'");
  }
  if ((rows.size() - 1) % 3 != 0) {
    throw ParseError(path + ": pose blocks must be three 3x4 rows each");
  }
  CameraModel cam;
  cam.intrinsics = CameraIntrinsics(rows[0][0], rows[0][1], rows[0][2], rows[0][3]);
  for (std::size_t b = 1; b + 2 < rows.size() + 1; b += 3) {
    std::array<double, 9> r{};
    std::array<double, 3> t{};
    for (int i = 0; i < 3; ++i) {
      if (rows[b + i].size() != 4) throw ParseError(path + ": pose rows need 4 numbers");
      for (int j = 0; j < 3; ++j) r[3 * i + j] = rows[b + i][j];
      t[i] = rows[b + i][3];
    }
    if (det3(r) < 0.0) throw NonOrthonormalRotation(path + ": det(R) < 0");
    const auto ro = reorthonormalize(r);
    double defect = 0.0;
    for (int i = 0; i < 9; ++i) defect = std::max(defect, std::abs(ro[i] - r[i]));
    if (defect > 1e-6) throw NonOrthonormalRotation(path + ": rotation not orthonormal");
    cam.poses.emplace_back(ro, t);
  }
  return cam;
}

void write_calib(const CameraModel& cam, const std::string& path) {
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    out.precision(17);
    out << cam.intrinsics.fx << " " << cam.intrinsics.fy << " " << cam.intrinsics.cx
        << " " << cam.intrinsics.cy << "\n";
    for (const auto& p : cam.poses) {
      for (int i = 0; i < 3; ++i) {
        out << p.rotation[3 * i] << " " << p.rotation[3 * i + 1] << " "
            << p.rotation[3 * i + 2] << " " << p.translation[i] << "\n";
      }
    }
    if (!out) throw ParseError("cannot write " + path);
  }
  fs::rename(tmp, target);
}

std::string format_frame_id(int frame, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, frame);
  return buf;
}

std::vector<std::string> list_frames(const std::string& root) {
  std::vector<std::string> out;
  const fs::path dir = fs::path(root) / "image";
  if (!fs::is_directory(dir)) throw DecodeError("missing image directory under " + root);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".png") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FrameBundle read_bundle(const std::string& root, const std::string& frame_id) {
  const fs::path base(root);
  FrameBundle fb;
  fb.image_target = (base / "image" / (frame_id + ".png")).string();
  if (!fs::exists(fb.image_target)) throw DecodeError("missing " + fb.image_target);

  // Adjacent frames, when numeric ids, act as source views.
  try {
    const int id = std::stoi(frame_id);
    for (int nb : {id - 1, id + 1}) {
      if (nb < 0) continue;
      const auto p = base / "image" / (format_frame_id(nb, static_cast<int>(frame_id.size())) + ".png");
      if (fs::exists(p)) fb.image_sources.push_back(p.string());
    }
  } catch (const std::exception&) {
    // non-numeric ids: no neighbor lookup
  }

  auto optional_path = [&](const char* sub) {
    const auto p = base / sub / (frame_id + ".png");
    return fs::exists(p) ? p.string() : std::string();
  };
  fb.depth_path = optional_path("depth");
  fb.flow_path = optional_path("flow");
  fb.semantic_path = optional_path("semantic");
  fb.mask_path = optional_path("mask");
  const auto calib = base / "calib" / (frame_id + ".txt");
  if (fs::exists(calib)) {
    fb.camera = read_calib(calib.string());
    fb.has_camera = true;
  }

  // Consolidated dimension check across whatever exists.
  const ImageBuffer img = read_image(fb.image_target);
  std::string problems;
  auto check = [&](int w, int h, const std::string& what) {
    if (w != img.width || h != img.height) {
      problems += (problems.empty() ? "" : "; ") + what + " is " + std::to_string(w) + "x" +
                  std::to_string(h) + " vs image " + std::to_string(img.width) + "x" +
                  std::to_string(img.height);
    }
  };
  if (!fb.depth_path.empty()) {
    const auto d = read_depth_png(fb.depth_path);
    check(d.width, d.height, fb.depth_path);
  }
  if (!fb.flow_path.empty()) {
    const auto f = read_flow_png(fb.flow_path);
    check(f.width, f.height, fb.flow_path);
  }
  if (!fb.semantic_path.empty()) {
    const auto l = read_label_png(fb.semantic_path);
    check(l.width, l.height, fb.semantic_path);
  }
  if (!fb.mask_path.empty()) {
    const auto m = read_mask_png(fb.mask_path);
    check(m.width, m.height, fb.mask_path);
  }
  if (!problems.empty()) throw DecodeError("frame " + frame_id + ": " + problems);
  return fb;
}

namespace {

void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  rgb[0] = r + m;
  rgb[1] = g + m;
  rgb[2] = b + m;
}

void ramp_color(double t, double rgb[3]) {
  // dark blue -> cyan -> green -> yellow -> red
  static const double stops[5][3] = {
      {0.05, 0.05, 0.4}, {0.0, 0.8, 0.9}, {0.0, 0.7, 0.1}, {0.95, 0.9, 0.0}, {0.85, 0.05, 0.05}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int k = std::min(static_cast<int>(t), 3);
  const double f = t - k;
  for (int c = 0; c < 3; ++c) rgb[c] = stops[k][c] * (1 - f) + stops[k + 1][c] * f;
}

}  // namespace

ImageBuffer colorize_flow(const FlowField& f) {
  std::vector<double> mags;
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    if (f.valid[i]) mags.push_back(std::hypot(f.u[i], f.v[i]));
  }
  double p95 = 1.0;
  if (!mags.empty()) {
    const std::size_t k = static_cast<std::size_t>(0.95 * (mags.size() - 1));
    std::nth_element(mags.begin(), mags.begin() + k, mags.end());
    p95 = std::max(mags[k], 1e-9);
  }
  ImageBuffer out(f.width, f.height, 3, 0.0);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const auto i = f.idx(x, y);
      double rgb[3] = {0, 0, 0};
      if (f.valid[i]) {
        const double mag = std::hypot(f.u[i], f.v[i]);
        double ang = std::atan2(f.v[i], f.u[i]);   // [-pi, pi]
        double hue = (ang + M_PI) / (2.0 * M_PI);  // [0, 1]
        if (hue >= 1.0) hue = 0.0;
        hsv_to_rgb(hue, std::clamp(mag / p95, 0.0, 1.0), 1.0, rgb);
      }
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = std::clamp(rgb[c], 0.0, 1.0);
    }
  }
  return out;
}

ImageBuffer colorize_depth(const DepthMap& d) {
  double dmax = 0.0;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (d.valid[i]) dmax = std::max(dmax, d.values[i]);
  }
  if (dmax <= 0.0) dmax = 1.0;
  ImageBuffer out(d.width, d.height, 3, 0.0);
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      double rgb[3] = {0, 0, 0};
      if (d.is_valid(x, y)) ramp_color(d.at(x, y) / dmax, rgb);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = rgb[c];
    }
  }
  return out;
}

ImageBuffer colorize_prob(const MotionProbMap& p) {
  ImageBuffer out(p.width, p.height, 3, 0.0);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      double rgb[3] = {0, 0, 0};
      if (p.is_valid(x, y)) ramp_color(p.at(x, y), rgb);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = rgb[c];
    }
  }
  return out;
}

ImageBuffer colorize_mask(const BinaryMask& m) {
  ImageBuffer out(m.width, m.height, 3, 0.0);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const double v = m.at(x, y) ? 1.0 : 0.0;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = v;
    }
  }
  return out;
}

}  // namespace sfk
