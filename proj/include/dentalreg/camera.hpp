#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "dentalreg/geometry.hpp"

namespace dentalreg {

/// The seven registration variables: translation (mm), rotation about the
/// model X/Y/Z axes (degrees), and focal length (mm).
struct CameraParams {
  double tx = 0.0;
  double ty = 0.0;
  double tz = 0.0;
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;
  double f = 50.0;

  bool finite() const {
    return std::isfinite(tx) && std::isfinite(ty) && std::isfinite(tz) &&
           std::isfinite(rx) && std::isfinite(ry) && std::isfinite(rz) &&
           std::isfinite(f);
  }
};

/// Fixed intrinsic conventions: 35 mm-equivalent sensor, square pixels,
/// principal point at the image center, and a base standoff Z0 added to tz
/// so the translation ranges straddle a plausible portrait distance.
struct IntrinsicConventions {
  int image_width_px = 1000;
  int image_height_px = 1000;
  double sensor_width_mm = 36.0;
  double principal_point_x = 500.0;
  double principal_point_y = 500.0;
  double base_standoff_mm = 400.0;
  double z_near_mm = 1.0;

  /// Pixels per millimeter of sensor; square pixels, same scale on both axes.
  double pixel_scale() const { return image_width_px / sensor_width_mm; }

  static IntrinsicConventions for_image(int width_px, int height_px,
                                        double sensor_mm = 36.0,
                                        double standoff_mm = 400.0) {
    IntrinsicConventions ic;
    ic.image_width_px = width_px;
    ic.image_height_px = height_px;
    ic.sensor_width_mm = sensor_mm;
    ic.principal_point_x = width_px / 2.0;
    ic.principal_point_y = height_px / 2.0;
    ic.base_standoff_mm = standoff_mm;
    return ic;
  }

  bool valid() const {
    return sensor_width_mm > 0 && image_width_px >= 1 && image_height_px >= 1 &&
           principal_point_x >= 0 && principal_point_x <= image_width_px &&
           principal_point_y >= 0 && principal_point_y <= image_height_px &&
           z_near_mm > 0;
  }
};

/// Row-major 3x3 rotation, R = Rz(rz) * Ry(ry) * Rx(rx), angles in degrees.
inline std::array<double, 9> rotation_matrix_deg(double rx_deg, double ry_deg,
                                                 double rz_deg) {
  const double ax = deg_to_rad(rx_deg);
  const double ay = deg_to_rad(ry_deg);
  const double az = deg_to_rad(rz_deg);
  const double cx = std::cos(ax), sx = std::sin(ax);
  const double cy = std::cos(ay), sy = std::sin(ay);
  const double cz = std::cos(az), sz = std::sin(az);
  return {cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,
          sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,
          -sy,     cy * sx,               cy * cx};
}

/// Precomputed rigid transform from model frame to camera frame.
struct PoseTransform {
  std::array<double, 9> r{1, 0, 0, 0, 1, 0, 0, 0, 1};
  double tx = 0.0, ty = 0.0, tz = 0.0;

  Point3 apply(const Point3& p) const {
    return {r[0] * p.x + r[1] * p.y + r[2] * p.z + tx,
            r[3] * p.x + r[4] * p.y + r[5] * p.z + ty,
            r[6] * p.x + r[7] * p.y + r[8] * p.z + tz};
  }
};

inline PoseTransform make_pose(const CameraParams& c,
                               const IntrinsicConventions& ic) {
  PoseTransform pose;
  pose.r = rotation_matrix_deg(c.rx, c.ry, c.rz);
  pose.tx = c.tx;
  pose.ty = c.ty;
  pose.tz = c.tz + ic.base_standoff_mm;
  return pose;
}

/// R*p + t with t = (tx, ty, tz + Z0); the camera sits at the origin looking
/// along +Z.
inline Point3 to_camera_frame(const Point3& p, const CameraParams& c,
                              const IntrinsicConventions& ic) {
  return make_pose(c, ic).apply(p);
}

/// Pinhole projection of a camera-frame point. Empty optional means the point
/// is at or behind the near plane; the projection is undefined there and must
/// never be read as a pixel position.
inline std::optional<Point2> project_camera_frame(
    const Point3& q, double focal_mm, const IntrinsicConventions& ic) {
  if (q.z < ic.z_near_mm) return std::nullopt;
  const double s = ic.pixel_scale() * focal_mm / q.z;
  return Point2{ic.principal_point_x + s * q.x, ic.principal_point_y + s * q.y};
}

inline std::optional<Point2> project(const Point3& p, const CameraParams& c,
                                     const IntrinsicConventions& ic) {
  return project_camera_frame(to_camera_frame(p, c, ic), c.f, ic);
}

/// Element-wise projection, order preserved.
inline std::vector<std::optional<Point2>> project_all(
    const std::vector<Point3>& points, const CameraParams& c,
    const IntrinsicConventions& ic) {
  const PoseTransform pose = make_pose(c, ic);
  std::vector<std::optional<Point2>> out;
  out.reserve(points.size());
  for (const Point3& p : points)
    out.push_back(project_camera_frame(pose.apply(p), c.f, ic));
  return out;
}

}  // namespace dentalreg
