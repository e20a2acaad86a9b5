#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pidcnn/rng.hpp"

namespace pidcnn {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
  bool operator==(const Vec3&) const = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return a * (1.0 / norm(a)); }

namespace scene {

inline constexpr Vec3 kLeftObserver{-4.0, -5.0, 5.0};
inline constexpr Vec3 kRightObserver{-5.0, -4.0, 5.0};
inline constexpr double kBallDiameter = 10.0;
inline constexpr double kCoordinateBound = 50.0;
inline constexpr double kSpawnBound = 45.0;
/// Half-width of the rendered window in world units. The ±45 cube projects to
/// about ±74.4 on these camera axes, so 80 leaves a ball-radius margin.
inline constexpr double kDefaultHalfExtent = 80.0;
inline constexpr std::size_t kViews = 2;

}  // namespace scene

/// One orthographic camera: looks along -view; image up/right span the image plane.
struct CameraView {
  Vec3 view;   // unit vector from the scene centre towards the observer
  Vec3 up;     // world z projected onto the image plane
  Vec3 right;  // up x view
};

struct CameraRig {
  std::array<CameraView, scene::kViews> cameras;
  double half_extent = scene::kDefaultHalfExtent;
  std::size_t image_size = 256;
};

/// Throws std::invalid_argument for image_size < 16 or half_extent <= 0.
CameraRig build_rig(std::size_t image_size = 256, double half_extent = scene::kDefaultHalfExtent);

/// Angle between the two lines of sight, degrees.
double sight_angle_degrees(const CameraRig& rig);

struct PixelCoord {
  double row = 0.0, col = 0.0;  // continuous; pixel (i, j) spans [i, i+1) x [j, j+1)
};

PixelCoord project(const Vec3& p, const CameraRig& rig, std::size_t camera);

double ball_radius_pixels(const CameraRig& rig);

/// Exact area of the intersection of a disc with an axis-aligned rectangle.
double disc_rectangle_overlap(double cx, double cy, double radius, double x0, double x1, double y0, double y1);

/// Renders one view: disc of the ball at full intensity 255 on a 0 background,
/// rim pixels at round(255 * covered area). `out` holds image_size^2 bytes.
void render_view(const Vec3& position, const CameraRig& rig, std::size_t camera, std::span<std::uint8_t> out);

struct FrameRecord {
  Vec3 position;
  std::vector<std::uint8_t> left;
  std::vector<std::uint8_t> right;
};

FrameRecord render_frame(const Vec3& position, const CameraRig& rig);

/// Three independent uniforms on (-45, 45).
Vec3 sample_position(Rng& rng);

/// Number of target components for T frames: 3 for T=1, 9 for T=2, 18 for T=3.
std::size_t target_length(std::size_t frames);

/// [q1..qT, v1..v(T-1), a] with v_i = q(i+1) - q(i) and a = v2 - v1.
/// Throws std::invalid_argument unless 1 <= T <= 3.
std::vector<double> ground_truth(std::span<const Vec3> positions);

/// Scales every target component by the standard deviation of uniform(-45, 45).
struct TargetNormalizer {
  static inline const double kSigma = 90.0 / std::sqrt(12.0);

  static double normalize(double v) { return v / kSigma; }
  static double denormalize(double v) { return v * kSigma; }
  static void normalize(std::span<double> values);
  static void denormalize(std::span<double> values);
};

}  // namespace pidcnn
