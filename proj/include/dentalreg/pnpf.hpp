#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "dentalreg/camera.hpp"
#include "dentalreg/errors.hpp"
#include "dentalreg/landmarks.hpp"
#include "dentalreg/scores.hpp"

namespace dentalreg {

enum class RmseMode {
  Standard,  // sqrt(mean of squared pixel distances)
  Literal    // sqrt(mean of unsquared pixel distances), the formula as printed
};

struct SolverOptions {
  int min_pairs = 6;
  RmseMode rmse_mode = RmseMode::Standard;
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
  double cost_tolerance = 1e-12;  // relative cost change
  std::vector<double> focal_starts_mm = {20.0, 35.0, 50.0, 85.0, 135.0};
  double rotation_seed_deg = 30.0;
  int max_starts = 45;
};

struct PnPSolution {
  CameraParams params{};
  double rmse_px = std::numeric_limits<double>::infinity();
  int n_pairs = 0;
  bool converged = false;
  int restarts_used = 0;
  bool coplanar = false;  // 3D points coplanar within 1e-6 mm
};

using LandmarkPairs = std::vector<std::pair<Point3, Point2>>;

/// Reprojection RMSE in pixels; empty when any 3D point falls behind the
/// near plane (invalid pose, scored as +inf by callers).
inline std::optional<double> reprojection_rmse(const LandmarkPairs& pairs,
                                               const CameraParams& c,
                                               const IntrinsicConventions& ic,
                                               RmseMode mode = RmseMode::Standard) {
  if (pairs.empty()) throw TooFewPairs("reprojection_rmse needs at least one pair");
  const PoseTransform pose = make_pose(c, ic);
  double acc = 0.0;
  for (const auto& [a, b] : pairs) {
    const auto uv = project_camera_frame(pose.apply(a), c.f, ic);
    if (!uv) return std::nullopt;
    const double d2 = (uv->u - b.u) * (uv->u - b.u) + (uv->v - b.v) * (uv->v - b.v);
    acc += mode == RmseMode::Standard ? d2 : std::sqrt(d2);
  }
  return std::sqrt(acc / static_cast<double>(pairs.size()));
}

namespace detail {

inline CameraParams params_from_seven(const Eigen::Matrix<double, 7, 1>& p) {
  return CameraParams{p[0], p[1], p[2], p[3], p[4], p[5], p[6]};
}

inline Eigen::Matrix<double, 7, 1> seven_from_params(const CameraParams& c) {
  Eigen::Matrix<double, 7, 1> p;
  p << c.tx, c.ty, c.tz, c.rx, c.ry, c.rz, c.f;
  return p;
}

/// Residual vector (du, dv per pair); false when any point is behind the
/// near plane.
inline bool residuals(const LandmarkPairs& pairs, const CameraParams& c,
                      const IntrinsicConventions& ic, Eigen::VectorXd& r) {
  const PoseTransform pose = make_pose(c, ic);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto uv = project_camera_frame(pose.apply(pairs[i].first), c.f, ic);
    if (!uv) return false;
    r[2 * i] = uv->u - pairs[i].second.u;
    r[2 * i + 1] = uv->v - pairs[i].second.v;
  }
  return true;
}

struct LmOutcome {
  Eigen::Matrix<double, 7, 1> p;
  double cost = std::numeric_limits<double>::infinity();  // sum of squares
  bool converged = false;
  bool valid = false;
};

/// Damped least squares on the summed squared pixel residuals. Accepted
/// steps are monotone non-increasing in cost.
inline LmOutcome levenberg_marquardt(const LandmarkPairs& pairs,
                                     const IntrinsicConventions& ic,
                                     Eigen::Matrix<double, 7, 1> p,
                                     const SolverOptions& opt) {
  const int n_res = 2 * static_cast<int>(pairs.size());
  Eigen::VectorXd r(n_res), r_try(n_res), r_plus(n_res), r_minus(n_res);
  Eigen::MatrixXd jac(n_res, 7);

  LmOutcome out;
  if (!residuals(pairs, params_from_seven(p), ic, r)) return out;
  out.valid = true;
  double cost = r.squaredNorm();
  double lambda = 1e-3;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    // central-difference Jacobian; one-sided fallback near the near plane
    for (int j = 0; j < 7; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(p[j]));
      Eigen::Matrix<double, 7, 1> pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      const bool ok_p = residuals(pairs, params_from_seven(pp), ic, r_plus);
      const bool ok_m = residuals(pairs, params_from_seven(pm), ic, r_minus);
      if (ok_p && ok_m)
        jac.col(j) = (r_plus - r_minus) / (2.0 * h);
      else if (ok_p)
        jac.col(j) = (r_plus - r) / h;
      else if (ok_m)
        jac.col(j) = (r - r_minus) / h;
      else
        jac.col(j).setZero();
    }

    const Eigen::Matrix<double, 7, 1> g = jac.transpose() * r;
    if (g.norm() < opt.gradient_tolerance) {
      out.converged = true;
      break;
    }
    const Eigen::Matrix<double, 7, 7> hessian = jac.transpose() * jac;

    bool improved = false;
    for (int inner = 0; inner < 12; ++inner) {
      Eigen::Matrix<double, 7, 7> damped = hessian;
      for (int j = 0; j < 7; ++j)
        damped(j, j) += lambda * std::max(hessian(j, j), 1e-12);
      const Eigen::Matrix<double, 7, 1> delta = damped.ldlt().solve(-g);
      Eigen::Matrix<double, 7, 1> p_try = p + delta;
      p_try[6] = std::max(p_try[6], 0.1);  // keep focal positive

      if (residuals(pairs, params_from_seven(p_try), ic, r_try)) {
        const double cost_try = r_try.squaredNorm();
        if (cost_try < cost) {
          const double rel = (cost - cost_try) / std::max(cost, 1e-300);
          p = p_try;
          r = r_try;
          cost = cost_try;
          lambda = std::max(lambda * 0.3, 1e-12);
          improved = true;
          if (rel < opt.cost_tolerance) out.converged = true;
          break;
        }
      }
      lambda *= 4.0;
      if (lambda > 1e14) break;
    }
    if (!improved || out.converged) break;
  }

  out.p = p;
  out.cost = cost;
  return out;
}

/// Similarity-based start: back-projects the 2D centroid at a depth that
/// matches the observed pixel spread under the given rotation and focal.
inline Eigen::Matrix<double, 7, 1> initial_guess(const LandmarkPairs& pairs,
                                                 const IntrinsicConventions& ic,
                                                 double rx, double ry, double rz,
                                                 double f) {
  const auto rot = rotation_matrix_deg(rx, ry, rz);
  Point3 mean3{};
  Point2 mean2{};
  const double n = static_cast<double>(pairs.size());
  std::vector<Point3> rotated(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Point3& a = pairs[i].first;
    rotated[i] = {rot[0] * a.x + rot[1] * a.y + rot[2] * a.z,
                  rot[3] * a.x + rot[4] * a.y + rot[5] * a.z,
                  rot[6] * a.x + rot[7] * a.y + rot[8] * a.z};
    mean3 = mean3 + rotated[i];
    mean2.u += pairs[i].second.u / n;
    mean2.v += pairs[i].second.v / n;
  }
  mean3 = (1.0 / n) * mean3;

  double spread3 = 0.0, spread2 = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    spread3 += std::hypot(rotated[i].x - mean3.x, rotated[i].y - mean3.y) / n;
    spread2 += std::hypot(pairs[i].second.u - mean2.u, pairs[i].second.v - mean2.v) / n;
  }

  const double m = ic.pixel_scale();
  double depth = ic.base_standoff_mm;
  if (spread2 > 1e-9 && spread3 > 1e-9)
    depth = std::clamp(m * f * spread3 / spread2, 20.0, 5000.0);

  Eigen::Matrix<double, 7, 1> p;
  p[0] = (mean2.u - ic.principal_point_x) * depth / (m * f) - mean3.x;
  p[1] = (mean2.v - ic.principal_point_y) * depth / (m * f) - mean3.y;
  p[2] = depth - ic.base_standoff_mm - mean3.z;
  p[3] = rx;
  p[4] = ry;
  p[5] = rz;
  p[6] = f;
  return p;
}

struct ShapeSpread {
  double collinear_std_mm = 0.0;  // extent along the 2nd principal axis
  double coplanar_std_mm = 0.0;   // extent along the 3rd principal axis
};

inline ShapeSpread shape_spread(const LandmarkPairs& pairs) {
  const double n = static_cast<double>(pairs.size());
  Point3 mean{};
  for (const auto& [a, b] : pairs) mean = mean + a;
  mean = (1.0 / n) * mean;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& [a, b] : pairs) {
    const Eigen::Vector3d d(a.x - mean.x, a.y - mean.y, a.z - mean.z);
    cov += d * d.transpose() / n;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Eigen::Vector3d ev = es.eigenvalues();  // ascending
  return {std::sqrt(std::max(ev[1], 0.0)), std::sqrt(std::max(ev[0], 0.0))};
}

}  // namespace detail

/// Recovers pose + focal length from landmark pairs by damped nonlinear
/// least squares over a deterministic start grid (focal lengths crossed with
/// rotation seeds), keeping the lowest-RMSE result. No randomness: identical
/// inputs give bit-identical solutions.
inline PnPSolution solve_pnpf(const LandmarkPairs& pairs,
                              const IntrinsicConventions& ic,
                              const SolverOptions& opt = {}) {
  if (static_cast<int>(pairs.size()) < opt.min_pairs)
    throw TooFewPairs("solve_pnpf needs at least " + std::to_string(opt.min_pairs) +
                      " pairs, got " + std::to_string(pairs.size()));
  for (const auto& [a, b] : pairs)
    if (!finite(a) || !finite(b))
      throw ParseError("solve_pnpf: non-finite landmark coordinates");

  const detail::ShapeSpread spread = detail::shape_spread(pairs);
  if (spread.collinear_std_mm < 1e-7)
    throw Degenerate("3D landmarks are collinear");

  const double r = opt.rotation_seed_deg;
  const double rotation_seeds[9][3] = {
      {0, 0, 0}, {r, 0, 0}, {-r, 0, 0}, {0, r, 0}, {0, -r, 0},
      {0, 0, r}, {0, 0, -r}, {r, r, r}, {-r, -r, -r}};

  PnPSolution best;
  best.n_pairs = static_cast<int>(pairs.size());
  best.coplanar = spread.coplanar_std_mm < 1e-6;

  int starts = 0;
  for (double f : opt.focal_starts_mm) {
    for (const auto& rot : rotation_seeds) {
      if (starts >= opt.max_starts) break;
      ++starts;
      const auto p0 = detail::initial_guess(pairs, ic, rot[0], rot[1], rot[2], f);
      const detail::LmOutcome lm = detail::levenberg_marquardt(pairs, ic, p0, opt);
      if (!lm.valid) continue;
      const CameraParams cand = detail::params_from_seven(lm.p);
      const auto rmse = reprojection_rmse(pairs, cand, ic, opt.rmse_mode);
      if (!rmse) continue;
      if (*rmse < best.rmse_px) {
        best.params = cand;
        best.rmse_px = *rmse;
        best.converged = lm.converged;
      }
    }
  }
  best.restarts_used = starts;
  return best;
}

/// Pairs the landmark sets, solves, and wraps the result as a comparison
/// score; pairing/degeneracy failures become an unscorable outcome rather
/// than an error so ranking keeps every (AM, PM) cell.
inline ComparisonScore score_landmark_comparison(const LandmarkSet3D& mesh_landmarks,
                                                 const LandmarkSet2D& photo_landmarks,
                                                 LandmarkSubset subset,
                                                 const IntrinsicConventions& ic,
                                                 const SolverOptions& opt = {}) {
  ComparisonScore score;
  score.method = subset == LandmarkSubset::Set1   ? Method::LandmarksSet1
                 : subset == LandmarkSubset::Set2 ? Method::LandmarksSet2
                                                  : Method::LandmarksSet3;
  try {
    const LandmarkPairs pairs =
        pair_landmarks(mesh_landmarks, photo_landmarks, subset, opt.min_pairs);
    const PnPSolution sol = solve_pnpf(pairs, ic, opt);
    score.score = sol.rmse_px;
    score.params = sol.params;
    score.has_params = true;
    score.converged = sol.converged;
    score.coplanar = sol.coplanar;
    score.restarts = sol.restarts_used;
    if (!std::isfinite(sol.rmse_px)) {
      score.unscorable = true;
      score.unscorable_reason = "no valid pose candidate";
    }
  } catch (const TooFewPairs& e) {
    score.unscorable = true;
    score.unscorable_reason = e.what();
  } catch (const Degenerate& e) {
    score.unscorable = true;
    score.unscorable_reason = e.what();
  }
  return score;
}

}  // namespace dentalreg
