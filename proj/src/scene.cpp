#include "pidcnn/scene.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace pidcnn {
namespace {

CameraView make_camera(const Vec3& direction) {
  const Vec3 view = normalized(direction);
  const Vec3 world_up{0.0, 0.0, 1.0};
  const Vec3 up = normalized(world_up - view * dot(world_up, view));
  return {view, up, cross(up, view)};
}

// Antiderivative of sqrt(r^2 - t^2).
double half_chord_integral(double t, double r) {
  t = std::clamp(t, -r, r);
  return 0.5 * (t * std::sqrt(std::max(0.0, r * r - t * t)) + r * r * std::asin(t / r));
}

}  // namespace

CameraRig build_rig(std::size_t image_size, double half_extent) {
  if (image_size < 16) throw std::invalid_argument("build_rig: image size must be at least 16 pixels");
  if (!(half_extent > 0.0)) throw std::invalid_argument("build_rig: half extent must be positive");
  CameraRig rig;
  rig.cameras = {make_camera(scene::kLeftObserver), make_camera(scene::kRightObserver)};
  rig.half_extent = half_extent;
  rig.image_size = image_size;
  return rig;
}

double sight_angle_degrees(const CameraRig& rig) {
  const double c = std::clamp(dot(rig.cameras[0].view, rig.cameras[1].view), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

PixelCoord project(const Vec3& p, const CameraRig& rig, std::size_t camera) {
  const auto& cam = rig.cameras.at(camera);
  const double span = 2.0 * rig.half_extent;
  const double size = static_cast<double>(rig.image_size);
  return {(rig.half_extent - dot(p, cam.up)) / span * size, (dot(p, cam.right) + rig.half_extent) / span * size};
}

double ball_radius_pixels(const CameraRig& rig) {
  return 0.5 * scene::kBallDiameter * static_cast<double>(rig.image_size) / (2.0 * rig.half_extent);
}

double disc_rectangle_overlap(double cx, double cy, double radius, double x0, double x1, double y0, double y1) {
  const double lo = std::max(x0, cx - radius);
  const double hi = std::min(x1, cx + radius);
  if (!(lo < hi) || !(y0 < y1)) return 0.0;

  // Between breakpoints the upper and lower arcs are each either inside
  // [y0, y1] or clamped to one of its edges, so each piece integrates in closed form.
  std::vector<double> cuts{lo, hi};
  for (double y : {y0, y1}) {
    const double dy = y - cy;
    if (std::abs(dy) < radius) {
      const double dx = std::sqrt(radius * radius - dy * dy);
      for (double u : {cx - dx, cx + dx}) {
        if (u > lo && u < hi) cuts.push_back(u);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());

  double area = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b) - cx;
    const double h = std::sqrt(std::max(0.0, radius * radius - mid * mid));
    const double arc = half_chord_integral(b - cx, radius) - half_chord_integral(a - cx, radius);
    const double width = b - a;
    // integral of clamp(cy + h(u), y0, y1) and clamp(cy - h(u), y0, y1)
    double top, bottom;
    if (cy + h >= y1) {
      top = y1 * width;
    } else if (cy + h <= y0) {
      top = y0 * width;
    } else {
      top = cy * width + arc;
    }
    if (cy - h <= y0) {
      bottom = y0 * width;
    } else if (cy - h >= y1) {
      bottom = y1 * width;
    } else {
      bottom = cy * width - arc;
    }
    area += top - bottom;
  }
  return std::max(0.0, area);
}

void render_view(const Vec3& position, const CameraRig& rig, std::size_t camera, std::span<std::uint8_t> out) {
  const std::size_t size = rig.image_size;
  if (out.size() != size * size) throw std::invalid_argument("render_view: output buffer has the wrong size");
  std::fill(out.begin(), out.end(), std::uint8_t{0});
  const PixelCoord c = project(position, rig, camera);
  const double r = ball_radius_pixels(rig);
  const auto clamp_index = [&](double v) {
    return static_cast<std::ptrdiff_t>(std::clamp(v, 0.0, static_cast<double>(size)));
  };
  const std::ptrdiff_t r0 = clamp_index(std::floor(c.row - r)), r1 = clamp_index(std::ceil(c.row + r));
  const std::ptrdiff_t c0 = clamp_index(std::floor(c.col - r)), c1 = clamp_index(std::ceil(c.col + r));
  const double r_sq = r * r;
  for (std::ptrdiff_t i = r0; i < r1; ++i) {
    for (std::ptrdiff_t j = c0; j < c1; ++j) {
      const double y0 = static_cast<double>(i), x0 = static_cast<double>(j);
      double far_sq = 0.0;
      for (double y : {y0, y0 + 1.0})
        for (double x : {x0, x0 + 1.0}) far_sq = std::max(far_sq, (y - c.row) * (y - c.row) + (x - c.col) * (x - c.col));
      const double coverage =
          far_sq <= r_sq ? 1.0 : disc_rectangle_overlap(c.col, c.row, r, x0, x0 + 1.0, y0, y0 + 1.0);
      out[static_cast<std::size_t>(i) * size + static_cast<std::size_t>(j)] =
          static_cast<std::uint8_t>(std::lround(std::clamp(coverage, 0.0, 1.0) * 255.0));
    }
  }
}

FrameRecord render_frame(const Vec3& position, const CameraRig& rig) {
  FrameRecord f;
  f.position = position;
  f.left.resize(rig.image_size * rig.image_size);
  f.right.resize(rig.image_size * rig.image_size);
  render_view(position, rig, 0, f.left);
  render_view(position, rig, 1, f.right);
  return f;
}

Vec3 sample_position(Rng& rng) {
  const double b = scene::kSpawnBound;
  const double x = rng.uniform(-b, b);
  const double y = rng.uniform(-b, b);
  const double z = rng.uniform(-b, b);
  return {x, y, z};
}

std::size_t target_length(std::size_t frames) {
  switch (frames) {
    case 1:
      return 3;
    case 2:
      return 9;
    case 3:
      return 18;
    default:
      throw std::invalid_argument("target_length: frame count must be 1, 2 or 3, got " + std::to_string(frames));
  }
}

std::vector<double> ground_truth(std::span<const Vec3> positions) {
  const std::size_t frames = positions.size();
  std::vector<double> out;
  out.reserve(target_length(frames));
  for (const auto& q : positions) out.insert(out.end(), {q.x, q.y, q.z});
  std::vector<Vec3> velocities;
  for (std::size_t i = 0; i + 1 < frames; ++i) velocities.push_back(positions[i + 1] - positions[i]);
  for (const auto& v : velocities) out.insert(out.end(), {v.x, v.y, v.z});
  if (frames == 3) {
    const Vec3 a = velocities[1] - velocities[0];
    out.insert(out.end(), {a.x, a.y, a.z});
  }
  return out;
}

void TargetNormalizer::normalize(std::span<double> values) {
  for (double& v : values) v = normalize(v);
}

void TargetNormalizer::denormalize(std::span<double> values) {
  for (double& v : values) v = denormalize(v);
}

}  // namespace pidcnn
