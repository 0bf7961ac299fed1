#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dentalreg/bitmask.hpp"
#include "dentalreg/camera.hpp"
#include "dentalreg/mesh.hpp"

namespace dentalreg {

/// Binary raster of the projected mesh, same dimensions as the target
/// photograph segmentation.
using SilhouetteImage = Bitmask;

namespace detail {

inline double edge_fn(const Point2& a, const Point2& b, double px, double py) {
  return (b.u - a.u) * (py - a.v) - (b.v - a.v) * (px - a.u);
}

// Top or left edge of a screen-clockwise triangle (u right, v down):
// horizontal rightward, or going upward.
inline bool edge_is_top_left(const Point2& a, const Point2& b) {
  return (a.v == b.v && b.u > a.u) || (b.v < a.v);
}

/// Sets every pixel whose center lies inside the triangle; ties on shared
/// edges resolved by the top-left rule so adjacent triangles never claim a
/// center twice.
inline void fill_triangle(Bitmask& mask, Point2 p0, Point2 p1, Point2 p2) {
  double area2 = edge_fn(p0, p1, p2.u, p2.v);
  if (area2 == 0.0) return;
  if (area2 < 0.0) std::swap(p1, p2);

  const double min_u = std::min({p0.u, p1.u, p2.u});
  const double max_u = std::max({p0.u, p1.u, p2.u});
  const double min_v = std::min({p0.v, p1.v, p2.v});
  const double max_v = std::max({p0.v, p1.v, p2.v});

  // pixel centers at (x + 0.5, y + 0.5)
  const int x0 = std::max(0, static_cast<int>(std::ceil(min_u - 0.5)));
  const int x1 = std::min(mask.width() - 1, static_cast<int>(std::floor(max_u - 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(min_v - 0.5)));
  const int y1 = std::min(mask.height() - 1, static_cast<int>(std::floor(max_v - 0.5)));
  if (x0 > x1 || y0 > y1) return;

  const Point2* va[3] = {&p0, &p1, &p2};
  bool top_left[3];
  for (int e = 0; e < 3; ++e)
    top_left[e] = edge_is_top_left(*va[e], *va[(e + 1) % 3]);

  for (int y = y0; y <= y1; ++y) {
    const double cy = y + 0.5;
    for (int x = x0; x <= x1; ++x) {
      const double cx = x + 0.5;
      bool inside = true;
      for (int e = 0; e < 3 && inside; ++e) {
        const double w = edge_fn(*va[e], *va[(e + 1) % 3], cx, cy);
        inside = w > 0.0 || (w == 0.0 && top_left[e]);
      }
      if (inside) mask.set(x, y);
    }
  }
}

}  // namespace detail

/// Projects the mesh and fills the union of its triangles (no depth buffer).
/// Triangles with any vertex behind the near plane are skipped; the result
/// may be empty when the mesh is off-screen or behind the camera.
inline SilhouetteImage rasterize_silhouette(const DentalMesh& mesh,
                                            const CameraParams& c,
                                            const IntrinsicConventions& ic) {
  SilhouetteImage out(ic.image_width_px, ic.image_height_px);
  const PoseTransform pose = make_pose(c, ic);
  const double scale = ic.pixel_scale() * c.f;

  std::vector<Point2> projected(mesh.vertices.size());
  std::vector<char> in_front(mesh.vertices.size(), 0);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Point3 q = pose.apply(mesh.vertices[i]);
    if (q.z >= ic.z_near_mm) {
      in_front[i] = 1;
      const double s = scale / q.z;
      projected[i] = {ic.principal_point_x + s * q.x,
                      ic.principal_point_y + s * q.y};
    }
  }

  for (const auto& t : mesh.triangles) {
    if (!in_front[t[0]] || !in_front[t[1]] || !in_front[t[2]]) continue;
    detail::fill_triangle(out, projected[t[0]], projected[t[1]], projected[t[2]]);
  }
  return out;
}

}  // namespace dentalreg
