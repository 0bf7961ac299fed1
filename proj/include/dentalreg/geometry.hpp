#pragma once

#include <cmath>

namespace dentalreg {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

/// Point in the 3D model frame, millimeters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Pixel position: u rightward, v downward.
struct Point2 {
  double u = 0.0;
  double v = 0.0;
};

inline Point3 operator+(const Point3& a, const Point3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}

inline Point3 operator-(const Point3& a, const Point3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}

inline Point3 operator*(double s, const Point3& p) {
  return {s * p.x, s * p.y, s * p.z};
}

inline double dot(const Point3& a, const Point3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Point3& p) { return std::sqrt(dot(p, p)); }

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.u - b.u, a.v - b.v);
}

inline bool finite(const Point3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

inline bool finite(const Point2& p) {
  return std::isfinite(p.u) && std::isfinite(p.v);
}

}  // namespace dentalreg
