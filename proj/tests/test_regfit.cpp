#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "dentalreg/regfit.hpp"
#include "dentalreg/rng.hpp"
#include "dentalreg/synth.hpp"

using namespace dentalreg;

namespace {

Bitmask random_mask(Rng& rng, int w, int h, double density) {
  Bitmask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (rng.uniform() < density) m.set(x, y);
  return m;
}

/// Brute-force per-pixel oracle for the inverted masked DICE.
double masked_dice_oracle(const Bitmask& a, const Bitmask& b, const Bitmask& m) {
  long na = 0, nb = 0, ni = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      const bool pa = a.get(x, y) && !m.get(x, y);
      const bool pb = b.get(x, y) && !m.get(x, y);
      if (pa) ++na;
      if (pb) ++nb;
      if (pa && pb) ++ni;
    }
  if (na + nb == 0) return 1.0;
  return 1.0 - 2.0 * static_cast<double>(ni) / static_cast<double>(na + nb);
}

}  // namespace

TEST_CASE("masked dice basics") {
  Bitmask a(8, 8), b(8, 8), m(8, 8);
  for (int i = 0; i < 4; ++i) a.set(i, 0);
  SECTION("perfect overlap") {
    CHECK(masked_dice_error(a, a, m) == 0.0);
  }
  SECTION("disjoint sets") {
    for (int i = 0; i < 4; ++i) b.set(i, 5);
    CHECK(masked_dice_error(a, b, m) == 1.0);
  }
  SECTION("half overlap from the printed arithmetic") {
    // |a\m| = 4, |b\m| = 4, overlap 2 -> 1 - 2*2/8 = 0.5
    for (int i = 2; i < 6; ++i) b.set(i, 0);
    CHECK(masked_dice_error(a, b, m) == 0.5);
  }
}

TEST_CASE("empty after mask is flagged worst") {
  Bitmask a(4, 4), b(4, 4), m(4, 4);
  a.set(1, 1);
  b.set(2, 2);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) m.set(x, y);
  const MaskedDiceResult r = masked_dice(a, b, m);
  CHECK(r.error == 1.0);
  CHECK(r.empty_after_mask);
}

TEST_CASE("dimension mismatch raises") {
  CHECK_THROWS_AS(masked_dice_error(Bitmask(4, 4), Bitmask(5, 4), Bitmask(4, 4)),
                  DimensionMismatch);
}

TEST_CASE("masked dice agrees bit-exactly with the counting oracle") {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(40));
    const int h = 1 + static_cast<int>(rng.below(40));
    const Bitmask a = random_mask(rng, w, h, rng.uniform());
    const Bitmask b = random_mask(rng, w, h, rng.uniform());
    const Bitmask m = random_mask(rng, w, h, rng.uniform(0, 0.8));
    const double got = masked_dice_error(a, b, m);
    const double want = masked_dice_oracle(a, b, m);
    REQUIRE(got == want);  // same arithmetic on the same counts, bit-exact
    REQUIRE(got == masked_dice_error(b, a, m));  // symmetry
    REQUIRE(got >= 0.0);
    REQUIRE(got <= 1.0);
  }
}

TEST_CASE("growing the mask never resurrects masked pixels") {
  Rng rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const Bitmask a = random_mask(rng, 24, 24, 0.4);
    const Bitmask b = random_mask(rng, 24, 24, 0.4);
    Bitmask m = random_mask(rng, 24, 24, 0.2);
    Bitmask m_big = m;
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x)
        if (rng.uniform() < 0.2) m_big.set(x, y);

    // with m' >= m, only pixels outside m' matter: pre-masking the operands
    // with m' must give the same value
    Bitmask a_pre(24, 24), b_pre(24, 24);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 24; ++x) {
        if (a.get(x, y) && !m_big.get(x, y)) a_pre.set(x, y);
        if (b.get(x, y) && !m_big.get(x, y)) b_pre.set(x, y);
      }
    CHECK(masked_dice_error(a, b, m_big) ==
          masked_dice_error(a_pre, b_pre, Bitmask(24, 24)));
  }
}

TEST_CASE("region fitness scores the generating camera as near perfect") {
  const Subject subject = generate_subject(500, 1.0);
  const SyntheticCase c = render_case(subject, OcclusionLevel::A, 500);
  const auto fitness = region_fitness(c.seg, subject.mesh, c.ic);
  CHECK(fitness(c.true_camera) < 0.02);
}

TEST_CASE("off-screen candidates score +inf, distinct from error 1") {
  const Subject subject = generate_subject(501, 1.0);
  const SyntheticCase c = render_case(subject, OcclusionLevel::A, 501);
  const auto fitness = region_fitness(c.seg, subject.mesh, c.ic);
  CameraParams behind = c.true_camera;
  behind.tz = -900;
  CHECK(std::isinf(fitness(behind)));

  CameraParams shifted = c.true_camera;
  shifted.tx = 140;  // far off target but still on screen or fully off
  const double v = fitness(shifted);
  CHECK((v == 1.0 || std::isinf(v) || v < 1.0));
}

TEST_CASE("occlusion covering the disagreement band zeroes the error") {
  // two near-identical silhouettes: same square, one shifted a pixel row down
  Bitmask a(32, 32), b(32, 32), m(32, 32);
  for (int y = 8; y < 24; ++y)
    for (int x = 8; x < 24; ++x) a.set(x, y);
  for (int y = 9; y < 25; ++y)
    for (int x = 8; x < 24; ++x) b.set(x, y);
  CHECK(masked_dice_error(a, b, m) > 0.0);
  for (int x = 0; x < 32; ++x) {
    m.set(x, 8);
    m.set(x, 24);
  }
  CHECK(masked_dice_error(a, b, m) == 0.0);
}

TEST_CASE("fully occluded segmentation is unusable") {
  SegmentationImage seg;
  seg.width = 8;
  seg.height = 8;
  seg.roi = Bitmask(8, 8);
  seg.occlusion = Bitmask(8, 8);
  seg.roi.set(3, 3);
  seg.occlusion.set(3, 3);
  DentalMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  mesh.triangles = {{0, 1, 2}};
  CHECK_THROWS_AS(region_fitness(seg, mesh, IntrinsicConventions::for_image(8, 8)),
                  UnusableCase);
}

TEST_CASE("region comparison is deterministic for a fixed seed") {
  const Subject subject = generate_subject(502, 1.0);
  const SyntheticCase c = render_case(subject, OcclusionLevel::B, 502);
  OptimizerConfig config;
  config.generations = 30;
  config.seed = 9;
  const RegionScore a = score_region_comparison(c.seg, subject.mesh, c.ic, config, 2);
  const RegionScore b = score_region_comparison(c.seg, subject.mesh, c.ic, config, 2);
  CHECK(a.masked_dice_error == b.masked_dice_error);
  CHECK(a.params.tx == b.params.tx);
  CHECK(a.params.f == b.params.f);
  CHECK(a.evaluations_used == b.evaluations_used);
  CHECK(a.restarts_used == 2);
}
