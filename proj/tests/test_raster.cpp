#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dentalreg/raster.hpp"
#include "dentalreg/rng.hpp"
#include "dentalreg/synth.hpp"

using namespace dentalreg;

namespace {

DentalMesh square_mesh(double side_mm, double z_mm = 0.0) {
  DentalMesh m;
  const double s = side_mm / 2.0;
  m.vertices = {{-s, -s, z_mm}, {s, -s, z_mm}, {s, s, z_mm}, {-s, s, z_mm}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

}  // namespace

TEST_CASE("front-facing square covers the principal point") {
  const IntrinsicConventions ic = IntrinsicConventions::for_image(200, 200);
  CameraParams c;
  c.f = 50;
  const SilhouetteImage s = rasterize_silhouette(square_mesh(40.0), c, ic);
  CHECK(s.get(100, 100));
  CHECK(s.count() > 0);
}

TEST_CASE("mesh behind the camera gives an empty bitmask") {
  const IntrinsicConventions ic = IntrinsicConventions::for_image(200, 200);
  CameraParams c;
  c.tz = -900;  // Z = -500
  const SilhouetteImage s = rasterize_silhouette(square_mesh(40.0), c, ic);
  CHECK_FALSE(s.any());
}

TEST_CASE("projected square area matches the closed form within 2%") {
  const IntrinsicConventions ic = IntrinsicConventions::for_image(1000, 1000);
  const double s_mm = 36.0, f = 50.0, z = 400.0;
  CameraParams c;
  c.f = f;
  c.tz = z - ic.base_standoff_mm;
  const SilhouetteImage mask = rasterize_silhouette(square_mesh(s_mm), c, ic);
  const double side_px = ic.pixel_scale() * f * s_mm / z;
  const double expected = side_px * side_px;
  CHECK(std::abs(static_cast<double>(mask.count()) - expected) <= 0.02 * expected);
}

TEST_CASE("two triangles of a square tile it exactly, no overlap, no gap") {
  const IntrinsicConventions ic = IntrinsicConventions::for_image(120, 120);
  CameraParams c;
  c.f = 50;
  const DentalMesh square = square_mesh(30.0);

  DentalMesh t0 = square, t1 = square;
  t0.triangles = {square.triangles[0]};
  t1.triangles = {square.triangles[1]};
  const SilhouetteImage a = rasterize_silhouette(t0, c, ic);
  const SilhouetteImage b = rasterize_silhouette(t1, c, ic);
  const SilhouetteImage whole = rasterize_silhouette(square, c, ic);

  // every pixel claimed by exactly one of the two triangles
  CHECK(masked_counts(a, b, Bitmask(120, 120)).a_and_b == 0);
  CHECK(a.count() + b.count() == whole.count());
}

TEST_CASE("silhouette of a triangle subset is a subset of the full silhouette") {
  const Subject subject = generate_subject(5, 1.0);
  const IntrinsicConventions ic = IntrinsicConventions::for_image(320, 240);
  CameraParams c;
  c.f = 60;
  c.rx = 8;
  c.ry = -12;

  DentalMesh partial = subject.mesh;
  partial.triangles.resize(partial.triangles.size() / 2);
  const SilhouetteImage full = rasterize_silhouette(subject.mesh, c, ic);
  const SilhouetteImage part = rasterize_silhouette(partial, c, ic);
  CHECK(part.count() > 0);
  CHECK(is_subset(part, full));
}

TEST_CASE("translating in X moves the bounding box by round(m f dx / Z) +- 1") {
  const IntrinsicConventions ic = IntrinsicConventions::for_image(640, 480);
  const double z = 400.0;
  CameraParams c;
  c.f = 50;
  c.tz = z - ic.base_standoff_mm;
  const DentalMesh planar = square_mesh(30.0);

  const auto base_box = rasterize_silhouette(planar, c, ic).bounding_box();
  REQUIRE(base_box);
  for (double dx : {3.0, 8.0, -12.0}) {
    CameraParams moved = c;
    moved.tx = dx;
    const auto box = rasterize_silhouette(planar, moved, ic).bounding_box();
    REQUIRE(box);
    const long expected = std::lround(ic.pixel_scale() * c.f * dx / z);
    CHECK(std::abs(box->min_x - base_box->min_x - expected) <= 1);
    CHECK(std::abs(box->max_x - base_box->max_x - expected) <= 1);
  }
}

TEST_CASE("partially-behind triangles are skipped, not clipped") {
  const IntrinsicConventions ic = IntrinsicConventions::for_image(100, 100);
  DentalMesh m;
  m.vertices = {{-5, -5, 0}, {5, -5, 0}, {0, 5, -399.5}};  // last vertex at Z = 0.5
  m.triangles = {{0, 1, 2}};
  CameraParams c;
  c.f = 50;
  CHECK_FALSE(rasterize_silhouette(m, c, ic).any());
}
