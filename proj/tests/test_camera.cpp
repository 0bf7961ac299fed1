#include <catch2/catch_amalgamated.hpp>

#include "dentalreg/camera.hpp"
#include "dentalreg/rng.hpp"

using namespace dentalreg;

namespace {

IntrinsicConventions test_ic() {
  return IntrinsicConventions::for_image(1000, 1000, 36.0, 400.0);
}

}  // namespace

TEST_CASE("to_camera_frame applies R*p + t with the base standoff") {
  const IntrinsicConventions ic = test_ic();

  CameraParams c;
  Point3 q = to_camera_frame({0, 0, 0}, c, ic);
  CHECK(q.x == Catch::Approx(0.0).margin(1e-12));
  CHECK(q.y == Catch::Approx(0.0).margin(1e-12));
  CHECK(q.z == Catch::Approx(400.0).margin(1e-12));

  c = CameraParams{};
  c.rz = 90.0;
  q = to_camera_frame({1, 0, 0}, c, ic);
  CHECK(q.x == Catch::Approx(0.0).margin(1e-12));
  CHECK(q.y == Catch::Approx(1.0).margin(1e-12));
  CHECK(q.z == Catch::Approx(400.0).margin(1e-12));

  c = CameraParams{};
  c.rx = 90.0;
  q = to_camera_frame({0, 0, 10}, c, ic);
  CHECK(q.x == Catch::Approx(0.0).margin(1e-12));
  CHECK(q.y == Catch::Approx(-10.0).margin(1e-12));
  CHECK(q.z == Catch::Approx(400.0).margin(1e-12));
}

TEST_CASE("project maps the optical axis to the principal point") {
  const IntrinsicConventions ic = test_ic();
  CameraParams c;
  c.f = 50.0;

  const auto center = project({0, 0, 0}, c, ic);
  REQUIRE(center);
  CHECK(center->u == Catch::Approx(500.0).margin(1e-9));
  CHECK(center->v == Catch::Approx(500.0).margin(1e-9));

  const auto off = project({36, 0, 0}, c, ic);
  REQUIRE(off);
  CHECK(off->u == Catch::Approx(625.0).margin(1e-9));
  CHECK(off->v == Catch::Approx(500.0).margin(1e-9));

  CHECK_FALSE(project({0, 0, -500}, c, ic));  // Z = -100, behind the near plane
}

TEST_CASE("project_all preserves order and per-element validity") {
  const IntrinsicConventions ic = test_ic();
  CameraParams c;
  c.f = 50.0;

  CHECK(project_all({}, c, ic).empty());

  const auto one = project_all({{0, 0, 0}}, c, ic);
  REQUIRE(one.size() == 1);
  REQUIRE(one[0]);
  CHECK(one[0]->u == Catch::Approx(500.0));

  const auto mixed = project_all({{0, 0, 0}, {0, 0, -500}, {10, 0, 0}}, c, ic);
  REQUIRE(mixed.size() == 3);
  CHECK(mixed[0].has_value());
  CHECK_FALSE(mixed[1].has_value());
  CHECK(mixed[2].has_value());
}

TEST_CASE("scaling focal length and camera-frame depth together is invariant") {
  const IntrinsicConventions ic = test_ic();
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const Point3 p{rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-30, 30)};
    CameraParams c;
    c.tx = rng.uniform(-20, 20);
    c.ty = rng.uniform(-20, 20);
    c.tz = rng.uniform(-100, 100);
    c.f = rng.uniform(20, 100);
    const double k = rng.uniform(0.5, 3.0);

    const double z = p.z + c.tz + ic.base_standoff_mm;
    CameraParams scaled = c;
    scaled.f = k * c.f;
    scaled.tz = k * z - ic.base_standoff_mm - p.z;

    const auto a = project(p, c, ic);
    const auto b = project(p, scaled, ic);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->u == Catch::Approx(b->u).margin(1e-6));
    CHECK(a->v == Catch::Approx(b->v).margin(1e-6));
  }
}

TEST_CASE("rotating the camera equals pre-rotating the point") {
  const IntrinsicConventions ic = test_ic();
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    CameraParams c;
    c.rx = rng.uniform(-60, 60);
    c.ry = rng.uniform(-60, 60);
    c.rz = rng.uniform(-60, 60);
    c.f = 50;
    const Point3 p{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)};

    const auto r = rotation_matrix_deg(c.rx, c.ry, c.rz);
    const Point3 pre{r[0] * p.x + r[1] * p.y + r[2] * p.z,
                     r[3] * p.x + r[4] * p.y + r[5] * p.z,
                     r[6] * p.x + r[7] * p.y + r[8] * p.z};
    CameraParams no_rot;
    no_rot.f = c.f;

    const auto a = project(p, c, ic);
    const auto b = project(pre, no_rot, ic);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->u == Catch::Approx(b->u).margin(1e-9));
    CHECK(a->v == Catch::Approx(b->v).margin(1e-9));
  }
}

TEST_CASE("BehindCamera exactly when camera-frame Z is under the near plane") {
  const IntrinsicConventions ic = test_ic();
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    CameraParams c;
    c.tz = rng.uniform(-450, 100);
    c.rx = rng.uniform(-90, 90);
    const Point3 p{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const Point3 q = to_camera_frame(p, c, ic);
    CHECK(project(p, c, ic).has_value() == (q.z >= ic.z_near_mm));
  }
}

TEST_CASE("projection is finite and smooth in each parameter") {
  const IntrinsicConventions ic = test_ic();
  CameraParams c;
  c.tx = 3;
  c.ty = -4;
  c.tz = 30;
  c.rx = 10;
  c.ry = -15;
  c.rz = 5;
  c.f = 60;
  const Point3 p{8, -6, 4};

  double* fields[7] = {&c.tx, &c.ty, &c.tz, &c.rx, &c.ry, &c.rz, &c.f};
  for (double* field : fields) {
    const double h = 1e-5;
    const double saved = *field;
    *field = saved + h;
    const auto plus = project(p, c, ic);
    *field = saved - h;
    const auto minus = project(p, c, ic);
    *field = saved;
    REQUIRE(plus);
    REQUIRE(minus);
    const double du = (plus->u - minus->u) / (2 * h);
    const double dv = (plus->v - minus->v) / (2 * h);
    CHECK(std::isfinite(du));
    CHECK(std::isfinite(dv));
  }
}
