#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "dentalreg/bitmask.hpp"
#include "dentalreg/camera.hpp"
#include "dentalreg/image_io.hpp"
#include "dentalreg/mesh.hpp"
#include "dentalreg/mvmo.hpp"
#include "dentalreg/raster.hpp"
#include "dentalreg/scores.hpp"

namespace dentalreg {

/// Photograph-side inputs: teeth region of interest and occlusion mask,
/// pixel-aligned to the photograph.
struct SegmentationImage {
  int width = 0;
  int height = 0;
  Bitmask roi;
  Bitmask occlusion;

  bool usable() const {
    const auto& wr = roi.words();
    const auto& wo = occlusion.words();
    for (std::size_t i = 0; i < wr.size(); ++i)
      if (wr[i] & ~wo[i]) return true;
    return false;
  }
};

/// PNG color semantics: white (R=G=B=255) is ROI, red (255,0,0) is the
/// occlusion mask, anything else background; +-10 per channel for lossy
/// sources.
inline SegmentationImage decode_segmentation(const RgbImage& img) {
  SegmentationImage seg;
  seg.width = img.width;
  seg.height = img.height;
  seg.roi = Bitmask(img.width, img.height);
  seg.occlusion = Bitmask(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* p = img.at(x, y);
      if (p[0] >= 245 && p[1] >= 245 && p[2] >= 245)
        seg.roi.set(x, y);
      else if (p[0] >= 245 && p[1] <= 10 && p[2] <= 10)
        seg.occlusion.set(x, y);
    }
  return seg;
}

inline RgbImage encode_segmentation(const SegmentationImage& seg) {
  RgbImage img(seg.width, seg.height);
  for (int y = 0; y < seg.height; ++y)
    for (int x = 0; x < seg.width; ++x) {
      if (seg.roi.get(x, y))
        img.put(x, y, 255, 255, 255);
      else if (seg.occlusion.get(x, y))
        img.put(x, y, 255, 0, 0);
    }
  return img;
}

inline SegmentationImage load_segmentation(const std::filesystem::path& path) {
  return decode_segmentation(read_png_rgb(path));
}

struct MaskedDiceResult {
  double error = 1.0;             // 0 = perfect overlap
  bool empty_after_mask = false;  // both operands vanished under the mask
};

/// Inverted masked DICE: with A = a\m, B = b\m the similarity is
/// 2|A n B| / (|A| + |B|) and the error is 1 - similarity.
inline MaskedDiceResult masked_dice(const Bitmask& a, const Bitmask& b,
                                    const Bitmask& m) {
  const MaskedCounts c = masked_counts(a, b, m);
  if (c.a + c.b == 0) return {1.0, true};
  return {1.0 - 2.0 * static_cast<double>(c.a_and_b) /
                    static_cast<double>(c.a + c.b),
          false};
}

inline double masked_dice_error(const Bitmask& a, const Bitmask& b,
                                const Bitmask& m) {
  return masked_dice(a, b, m).error;
}

/// Fitness closure for the region optimizer: rasterizes the candidate and
/// scores it against the segmentation. An empty silhouette scores +inf, an
/// invalid-candidate value distinct from the worst real error 1, so the
/// optimizer prefers any on-screen pose. The returned closure keeps
/// references to seg/mesh; they must outlive it.
inline std::function<double(const CameraParams&)> region_fitness(
    const SegmentationImage& seg, const DentalMesh& mesh,
    const IntrinsicConventions& ic) {
  if (!seg.usable())
    throw UnusableCase("segmentation ROI is fully occluded");
  return [&seg, &mesh, ic](const CameraParams& c) -> double {
    const SilhouetteImage silhouette = rasterize_silhouette(mesh, c, ic);
    if (!silhouette.any()) return std::numeric_limits<double>::infinity();
    return masked_dice(seg.roi, silhouette, seg.occlusion).error;
  };
}

/// Per-parameter search bounds for the region optimizer: translations in
/// [-150, 150] mm, rotations in [-90, 90] degrees, focal length in
/// [10, 200] mm.
struct RegionBounds {
  double translation_mm = 150.0;
  double rotation_deg = 90.0;
  double focal_min_mm = 10.0;
  double focal_max_mm = 200.0;

  SearchSpace search_space() const {
    SearchSpace space;
    space.bounds = {{-translation_mm, translation_mm},
                    {-translation_mm, translation_mm},
                    {-translation_mm, translation_mm},
                    {-rotation_deg, rotation_deg},
                    {-rotation_deg, rotation_deg},
                    {-rotation_deg, rotation_deg},
                    {focal_min_mm, focal_max_mm}};
    return space;
  }
};

inline CameraParams params_from_vector(const std::vector<double>& x) {
  return CameraParams{x[0], x[1], x[2], x[3], x[4], x[5], x[6]};
}

struct RegionScore {
  double masked_dice_error = 1.0;
  CameraParams params{};
  int restarts_used = 0;
  long evaluations_used = 0;
  std::uint64_t seed = 0;
};

/// Optimizes the masked DICE error with the configured restart protocol and
/// keeps the best run.
inline RegionScore score_region_comparison(const SegmentationImage& seg,
                                           const DentalMesh& mesh,
                                           const IntrinsicConventions& ic,
                                           const OptimizerConfig& config,
                                           int n_restarts = 3,
                                           const RegionBounds& bounds = {}) {
  const auto fitness = region_fitness(seg, mesh, ic);
  const SearchSpace space = bounds.search_space();
  long total_evaluations = 0;
  const OptimizationResult r = best_of_restarts(
      [&fitness](const std::vector<double>& x) {
        return fitness(params_from_vector(x));
      },
      space, config, n_restarts, &total_evaluations);

  RegionScore score;
  score.masked_dice_error = r.best_value;
  score.params = params_from_vector(r.best_point);
  score.restarts_used = n_restarts;
  score.evaluations_used = total_evaluations;
  score.seed = r.seed;
  return score;
}

}  // namespace dentalreg
