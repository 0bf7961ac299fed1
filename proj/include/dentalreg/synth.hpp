#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dentalreg/camera.hpp"
#include "dentalreg/errors.hpp"
#include "dentalreg/image_io.hpp"
#include "dentalreg/landmarks.hpp"
#include "dentalreg/manifest.hpp"
#include "dentalreg/mesh.hpp"
#include "dentalreg/raster.hpp"
#include "dentalreg/regfit.hpp"
#include "dentalreg/rng.hpp"

namespace dentalreg {

/// One anterior tooth block: extruded rounded-rectangle crown.
struct ToothSpec {
  double width_mm = 8.0;
  double height_mm = 10.0;
  double depth_mm = 3.2;
  double tilt_deg = 0.0;           // in-plane rotation of the crown
  double incisal_asym_mm = 0.0;    // shear of the biting edge
  double incisal_bulge_mm = 0.0;   // curvature of the biting edge
  double corner_frac = 0.18;       // incisal corner radius, fraction of width
  double gingival_frac = 0.30;     // gum-side corner radius, fraction of width
  double gap_after_mm = 0.4;       // gap to the next tooth along the arch
  double vertical_offset_mm = 0;   // step of the whole crown along the gum line
};

/// Parametric dentition: six anterior upper teeth (FDI 13 12 11 21 22 23,
/// left to right in viewer coordinates) along a circular arch.
struct SubjectSpec {
  std::uint64_t seed = 0;
  double perturbation = 1.0;
  std::array<ToothSpec, 6> teeth{};
  double arch_radius_mm = 22.0;
};

struct Subject {
  SubjectSpec spec;
  DentalMesh mesh;          // centroid at origin
  LandmarkSet3D landmarks;  // full 30-name vocabulary, same frame as mesh
};

namespace detail {

struct Vec2 {
  double x, y;
};

/// Incisal bulge + shear + in-plane tilt, shared by the outline and the
/// landmark anchors so landmarks stay on the deformed surface.
inline Vec2 crown_deform(const ToothSpec& tooth, double x, double y) {
  const double w2 = tooth.width_mm / 2.0;
  const double h2 = tooth.height_mm / 2.0;
  double sy = y;
  if (y > 0.0) {
    const double u = std::clamp(x / w2, -1.0, 1.0);
    sy += tooth.incisal_bulge_mm * (1.0 - u * u) * (y / h2);
  }
  const double blend = (sy + h2) / tooth.height_mm;
  sy += tooth.incisal_asym_mm * (x / w2) * blend;
  const double t = deg_to_rad(tooth.tilt_deg);
  return {x * std::cos(t) - sy * std::sin(t), x * std::sin(t) + sy * std::cos(t)};
}

/// Closed crown outline: rounded rectangle with distinct incisal and
/// gingival corner radii, 4 corners x (segments+1) points, deformed by
/// crown_deform. Star-shaped around the origin.
inline std::vector<Vec2> crown_profile(const ToothSpec& tooth, int segments = 3) {
  const double w2 = tooth.width_mm / 2.0;
  const double h2 = tooth.height_mm / 2.0;
  const double cap = 0.45 * std::min(w2, h2);
  const double ri = std::min(tooth.corner_frac * tooth.width_mm, cap);
  const double rg = std::min(tooth.gingival_frac * tooth.width_mm, cap);
  // corner centers, walked counter-clockwise starting at (+x, +y incisal)
  const Vec2 centers[4] = {{w2 - ri, h2 - ri}, {-(w2 - ri), h2 - ri},
                           {-(w2 - rg), -(h2 - rg)}, {w2 - rg, -(h2 - rg)}};
  const double radius[4] = {ri, ri, rg, rg};
  const double base_angle[4] = {0.0, 0.5 * kPi, kPi, 1.5 * kPi};
  std::vector<Vec2> pts;
  pts.reserve(4 * (segments + 1));
  for (int c = 0; c < 4; ++c)
    for (int s = 0; s <= segments; ++s) {
      const double a = base_angle[c] + 0.5 * kPi * s / segments;
      pts.push_back({centers[c].x + radius[c] * std::cos(a),
                     centers[c].y + radius[c] * std::sin(a)});
    }
  for (Vec2& p : pts) p = crown_deform(tooth, p.x, p.y);
  return pts;
}

/// Placement of one tooth on the arch: world = anchor + x*tangent + y*up
/// + z*facial, with the facial surface on the arch and the body extruded
/// behind it.
struct ToothFrame {
  Point3 anchor;
  Point3 tangent;
  Point3 up{0, 1, 0};
  Point3 facial;

  Point3 world(double x, double y, double z) const {
    return {anchor.x + x * tangent.x + y * up.x + z * facial.x,
            anchor.y + x * tangent.y + y * up.y + z * facial.y,
            anchor.z + x * tangent.z + y * up.z + z * facial.z};
  }
};

inline ToothFrame tooth_frame(double arc_s, double radius) {
  const double theta = arc_s / radius;
  ToothFrame f;
  f.anchor = {radius * std::sin(theta), 0.0, radius * (1.0 - std::cos(theta))};
  f.tangent = {std::cos(theta), 0.0, std::sin(theta)};
  f.facial = {std::sin(theta), 0.0, -std::cos(theta)};  // toward the camera
  return f;
}

inline void append_tooth(DentalMesh& mesh, const ToothSpec& tooth,
                         const ToothFrame& frame) {
  const std::vector<Vec2> profile = crown_profile(tooth);
  const int n = static_cast<int>(profile.size());
  const int base = static_cast<int>(mesh.vertices.size());
  for (const Vec2& p : profile) mesh.vertices.push_back(frame.world(p.x, p.y, 0.0));
  for (const Vec2& p : profile)
    mesh.vertices.push_back(frame.world(p.x, p.y, -tooth.depth_mm));
  const int front_center = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back(frame.world(0.0, 0.0, 0.0));
  const int back_center = front_center + 1;
  mesh.vertices.push_back(frame.world(0.0, 0.0, -tooth.depth_mm));

  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    mesh.triangles.push_back({front_center, base + i, base + j});
    mesh.triangles.push_back({back_center, base + n + j, base + n + i});
    mesh.triangles.push_back({base + i, base + n + i, base + j});
    mesh.triangles.push_back({base + j, base + n + i, base + n + j});
  }
}

}  // namespace detail

/// Deterministic per seed. Perturbation 0 yields the canonical average
/// dentition for every seed; the default scale 1.0 individualizes crown
/// sizes, tilts, gaps, and arch curvature.
inline Subject generate_subject(std::uint64_t seed, double perturbation = 1.0) {
  if (perturbation < 0) throw InvalidConfig("perturbation must be >= 0");
  Rng rng(mix_seed(seed, 0xD47A));
  const double p = perturbation;

  SubjectSpec spec;
  spec.seed = seed;
  spec.perturbation = perturbation;
  const double widths[6] = {7.9, 6.6, 8.5, 8.5, 6.6, 7.9};
  const double heights[6] = {10.2, 9.3, 10.8, 10.8, 9.3, 10.2};
  for (int t = 0; t < 6; ++t) {
    ToothSpec& tooth = spec.teeth[t];
    tooth.width_mm = widths[t] * (1.0 + p * rng.uniform(-0.17, 0.17));
    tooth.height_mm = heights[t] * (1.0 + p * rng.uniform(-0.22, 0.22));
    tooth.depth_mm = 3.2 * (1.0 + p * rng.uniform(-0.15, 0.15));
    tooth.tilt_deg = p * rng.uniform(-15.0, 15.0);
    tooth.incisal_asym_mm = p * rng.uniform(-1.4, 1.4);
    tooth.incisal_bulge_mm = p * rng.uniform(-1.6, 1.6);
    tooth.corner_frac = 0.18 + p * rng.uniform(-0.06, 0.10);
    tooth.gingival_frac = 0.30 + p * rng.uniform(-0.12, 0.15);
    tooth.gap_after_mm = std::max(0.05, 0.4 + p * rng.uniform(-0.15, 0.55));
    tooth.vertical_offset_mm = p * rng.uniform(-2.5, 2.5);
  }
  spec.arch_radius_mm = 22.0 * (1.0 + p * rng.uniform(-0.30, 0.30));

  Subject subject;
  subject.spec = spec;

  // arc positions: midline between teeth 2 and 3
  double total = 0.0;
  for (int t = 0; t < 6; ++t) {
    total += spec.teeth[t].width_mm;
    if (t < 5) total += spec.teeth[t].gap_after_mm;
  }
  std::array<double, 6> arc_center{};
  double cursor = -total / 2.0;
  for (int t = 0; t < 6; ++t) {
    arc_center[t] = cursor + spec.teeth[t].width_mm / 2.0;
    cursor += spec.teeth[t].width_mm + spec.teeth[t].gap_after_mm;
  }

  std::array<detail::ToothFrame, 6> frames;
  for (int t = 0; t < 6; ++t) {
    frames[t] = detail::tooth_frame(arc_center[t], spec.arch_radius_mm);
    frames[t].anchor.y += spec.teeth[t].vertical_offset_mm;
    detail::append_tooth(subject.mesh, spec.teeth[t], frames[t]);
  }

  // landmark anchors on the facial surface; incisal edge is +y (down in the
  // image when rotations are zero: upper teeth hang from the top)
  auto at = [&](int t, double fx, double fy) {
    const ToothSpec& tooth = spec.teeth[t];
    const detail::Vec2 q = detail::crown_deform(tooth, fx * tooth.width_mm / 2.0,
                                                fy * tooth.height_mm / 2.0);
    return frames[t].world(q.x, q.y, 0.0);
  };
  auto mid = [](const Point3& a, const Point3& b) { return 0.5 * (a + b); };

  auto smile_corner = [&](int t, int side) { return at(t, 0.84 * side, 0.96); };
  auto smile_mid = [&](int t) { return at(t, 0.0, 1.0); };
  auto medial_edge = [&](int t, int side) { return at(t, 1.0 * side, 0.0); };
  auto gingival_apex = [&](int t) { return at(t, 0.0, -1.0); };
  auto gingival_corner = [&](int t, int side) { return at(t, 0.84 * side, -0.84); };

  std::vector<Point3> positions = {
      smile_corner(0, -1),                              // smile.13.distal
      smile_mid(0),                                     // smile.13.tip
      mid(smile_corner(0, 1), smile_corner(1, -1)),     // smile.13-12
      smile_mid(1),                                     // smile.12.mid
      mid(smile_corner(1, 1), smile_corner(2, -1)),     // smile.12-11
      smile_mid(2),                                     // smile.11.mid
      smile_corner(2, 1),                               // smile.11.mesial
      smile_corner(3, -1),                              // smile.21.mesial
      smile_mid(3),                                     // smile.21.mid
      mid(smile_corner(3, 1), smile_corner(4, -1)),     // smile.21-22
      smile_mid(4),                                     // smile.22.mid
      mid(smile_corner(4, 1), smile_corner(5, -1)),     // smile.22-23
      smile_mid(5),                                     // smile.23.tip
      smile_corner(5, 1),                               // smile.23.distal
      mid(medial_edge(0, 1), medial_edge(1, -1)),       // medial.13-12
      mid(medial_edge(1, 1), medial_edge(2, -1)),       // medial.12-11
      mid(medial_edge(2, 1), medial_edge(3, -1)),       // medial.11-21
      mid(medial_edge(3, 1), medial_edge(4, -1)),       // medial.21-22
      mid(medial_edge(4, 1), medial_edge(5, -1)),       // medial.22-23
      gingival_apex(0),                                 // gingival.13
      mid(gingival_corner(0, 1), gingival_corner(1, -1)),
      gingival_apex(1),
      mid(gingival_corner(1, 1), gingival_corner(2, -1)),
      gingival_apex(2),
      mid(gingival_corner(2, 1), gingival_corner(3, -1)),
      gingival_apex(3),
      mid(gingival_corner(3, 1), gingival_corner(4, -1)),
      gingival_apex(4),
      mid(gingival_corner(4, 1), gingival_corner(5, -1)),
      gingival_apex(5),                                 // gingival.23
  };

  // center the mesh and keep the landmarks in the same frame
  const Point3 centroid = mesh_centroid(subject.mesh);
  for (Point3& v : subject.mesh.vertices) v = v - centroid;
  subject.mesh.centroid_offset = centroid;
  for (Point3& q : positions) q = q - centroid;

  for (std::size_t i = 0; i < kLandmarkVocabulary.size(); ++i)
    subject.landmarks.landmarks.push_back(
        {kLandmarkVocabulary[i].name, positions[i], true});
  return subject;
}

enum class OcclusionLevel { A, B, C };  // none / partial / heavy

inline char occlusion_level_tag(OcclusionLevel level) {
  switch (level) {
    case OcclusionLevel::A: return 'A';
    case OcclusionLevel::B: return 'B';
    case OcclusionLevel::C: return 'C';
  }
  return '?';
}

/// Camera draw ranges, kept inside the optimizer's search bounds and narrow
/// enough that a frontal smile photograph is plausible.
struct CameraSampler {
  double tx_mm = 8.0;
  double ty_mm = 8.0;
  double tz_min_mm = -80.0, tz_max_mm = 80.0;
  double rx_deg = 20.0;
  double ry_deg = 30.0;
  double rz_deg = 10.0;
  double f_min_mm = 40.0, f_max_mm = 90.0;

  CameraParams draw(Rng& rng) const {
    CameraParams c;
    c.tx = rng.uniform(-tx_mm, tx_mm);
    c.ty = rng.uniform(-ty_mm, ty_mm);
    c.tz = rng.uniform(tz_min_mm, tz_max_mm);
    c.rx = rng.uniform(-rx_deg, rx_deg);
    c.ry = rng.uniform(-ry_deg, ry_deg);
    c.rz = rng.uniform(-rz_deg, rz_deg);
    c.f = rng.uniform(f_min_mm, f_max_mm);
    return c;
  }
};

struct RenderOptions {
  int image_width = 320;
  int image_height = 240;
  double sensor_width_mm = 36.0;
  double base_standoff_mm = 400.0;
  int margin_px = 4;
  int max_tries = 100;
  CameraSampler sampler{};
};

struct SyntheticCase {
  std::string id;
  OcclusionLevel level = OcclusionLevel::A;
  CameraParams true_camera{};
  IntrinsicConventions ic{};
  SegmentationImage seg;
  LandmarkSet2D landmarks2d;
  double occlusion_fraction = 0.0;
};

/// Renders a subject into an ingestible case: segmentation under a camera
/// drawn until the whole mesh projects in frame, a lip-style occlusion band
/// over the lower part of the silhouette, and 2D landmarks that are the
/// exact projections of the 3D ones (those inside the band marked absent).
inline SyntheticCase render_case(const Subject& subject, OcclusionLevel level,
                                 std::uint64_t case_seed,
                                 const RenderOptions& opt = {}) {
  Rng rng(mix_seed(case_seed, 0xCA5E));
  SyntheticCase out;
  out.level = level;
  out.ic = IntrinsicConventions::for_image(opt.image_width, opt.image_height,
                                           opt.sensor_width_mm, opt.base_standoff_mm);

  bool placed = false;
  for (int attempt = 0; attempt < opt.max_tries && !placed; ++attempt) {
    const CameraParams cand = opt.sampler.draw(rng);
    placed = true;
    const PoseTransform pose = make_pose(cand, out.ic);
    for (const Point3& v : subject.mesh.vertices) {
      const auto uv = project_camera_frame(pose.apply(v), cand.f, out.ic);
      if (!uv || uv->u < opt.margin_px || uv->u >= opt.image_width - opt.margin_px ||
          uv->v < opt.margin_px || uv->v >= opt.image_height - opt.margin_px) {
        placed = false;
        break;
      }
    }
    if (placed) out.true_camera = cand;
  }
  if (!placed)
    throw InFrameExhausted("no in-frame camera draw after " +
                           std::to_string(opt.max_tries) + " tries");

  out.seg.width = opt.image_width;
  out.seg.height = opt.image_height;
  out.seg.roi = rasterize_silhouette(subject.mesh, out.true_camera, out.ic);
  out.seg.occlusion = Bitmask(opt.image_width, opt.image_height);

  double band_fraction = 0.0;
  if (level == OcclusionLevel::B) band_fraction = rng.uniform(0.10, 0.25);
  if (level == OcclusionLevel::C) band_fraction = rng.uniform(0.25, 0.50);
  out.occlusion_fraction = band_fraction;

  int band_top = opt.image_height;  // first occluded row
  const auto box = out.seg.roi.bounding_box();
  if (band_fraction > 0.0 && box) {
    const int band_rows = static_cast<int>(std::ceil(band_fraction * box->height()));
    band_top = box->max_y - band_rows + 1;
    for (int y = band_top; y <= box->max_y; ++y)
      for (int x = 0; x < opt.image_width; ++x) out.seg.occlusion.set(x, y);
  }

  const PoseTransform pose = make_pose(out.true_camera, out.ic);
  for (const auto& lm : subject.landmarks.landmarks) {
    const auto uv = project_camera_frame(pose.apply(lm.position), out.true_camera.f, out.ic);
    Landmark<Point2> lm2;
    lm2.name = lm.name;
    if (uv) {
      lm2.position = *uv;
      lm2.present = static_cast<int>(std::floor(uv->v)) < band_top;
    } else {
      lm2.present = false;
    }
    out.landmarks2d.landmarks.push_back(std::move(lm2));
  }
  return out;
}

struct CohortSpec {
  int count_a = 0;
  int count_b = 0;
  int count_c = 0;
  std::uint64_t seed = 1;
  double perturbation = 1.0;
  RenderOptions render{};
};

/// Writes a complete ingestible cohort (OBJ + landmark JSON + segmentation
/// PNG per case, plus the manifest with truth pairings). Byte-identical for
/// identical spec + seed.
inline CaseManifest write_cohort(const CohortSpec& spec,
                                 const std::filesystem::path& out_dir,
                                 bool overwrite = false) {
  if (spec.count_a + spec.count_b + spec.count_c <= 0)
    throw InvalidConfig("cohort needs at least one case");
  const std::filesystem::path manifest_path = out_dir / "manifest.json";
  if (std::filesystem::exists(manifest_path) && !overwrite)
    throw IoError("refusing to overwrite existing cohort at " + out_dir.string() +
                  " (use force)");
  std::filesystem::create_directories(out_dir / "cases");

  CaseManifest manifest;
  manifest.base_dir = out_dir;
  int global_index = 0;
  auto emit_level = [&](OcclusionLevel level, int count) {
    for (int k = 0; k < count; ++k, ++global_index) {
      char id_buf[16];
      std::snprintf(id_buf, sizeof(id_buf), "%c%03d", occlusion_level_tag(level), k + 1);
      const std::string id = id_buf;
      const std::uint64_t case_seed = mix_seed(spec.seed, global_index + 1);

      const Subject subject = generate_subject(case_seed, spec.perturbation);
      SyntheticCase c = render_case(subject, level, case_seed, spec.render);
      c.id = id;

      const std::filesystem::path dir = out_dir / "cases" / id;
      std::filesystem::create_directories(dir);
      save_obj(subject.mesh, dir / "mesh.obj");
      save_landmarks3d(subject.landmarks, dir / "landmarks3d.json");
      save_landmarks2d(c.landmarks2d, dir / "landmarks2d.json");
      write_png_rgb(encode_segmentation(c.seg), dir / "segmentation.png");

      manifest.am_cases.push_back({id, dir / "segmentation.png", dir / "landmarks2d.json"});
      manifest.pm_cases.push_back({id, dir / "mesh.obj", dir / "landmarks3d.json"});
      manifest.truth[id] = id;
    }
  };
  emit_level(OcclusionLevel::A, spec.count_a);
  emit_level(OcclusionLevel::B, spec.count_b);
  emit_level(OcclusionLevel::C, spec.count_c);

  save_manifest(manifest, manifest_path);
  return manifest;
}

}  // namespace dentalreg
