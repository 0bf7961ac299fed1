#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dentalreg/ident.hpp"
#include "dentalreg/image_io.hpp"
#include "dentalreg/lr.hpp"
#include "dentalreg/plot.hpp"
#include "dentalreg/regfit.hpp"
#include "dentalreg/scores_io.hpp"

namespace dentalreg {

inline nlohmann::json statistics_to_json(const RankingStatistics& s) {
  return {{"avg", s.avg}, {"min", s.min}, {"q1", s.q1},   {"q2", s.q2},
          {"q3", s.q3},   {"p95", s.p95}, {"p99", s.p99}, {"max", s.max}};
}

inline void write_report_json(const RankingReport& report, Method method,
                              std::optional<double> cllr_value,
                              const std::filesystem::path& path) {
  nlohmann::json j;
  j["method"] = method_name(method);
  j["n_cases"] = report.positions.size();
  j["statistics"] = statistics_to_json(report.stats);
  j["positions"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.rankings.size(); ++i)
    j["positions"].push_back({{"am_id", report.rankings[i].am_id},
                              {"position", report.positions[i]}});
  if (cllr_value) j["cllr"] = *cllr_value;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

inline void write_statistics_csv(const RankingStatistics& s,
                                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "avg,min,q1,q2,q3,p95,p99,max\n"
      << fmt_double(s.avg) << ',' << fmt_double(s.min) << ',' << fmt_double(s.q1)
      << ',' << fmt_double(s.q2) << ',' << fmt_double(s.q3) << ',' << fmt_double(s.p95)
      << ',' << fmt_double(s.p99) << ',' << fmt_double(s.max) << '\n';
}

inline void write_cmc_csv(const std::vector<CmcPoint>& cmc,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "k,fraction\n";
  for (const auto& p : cmc) out << p.k << ',' << fmt_double(p.fraction) << '\n';
}

/// CMC plot with the Y axis anchored at 0.
inline void render_cmc_png(const std::vector<CmcPoint>& cmc,
                           const std::filesystem::path& path) {
  PlotSeries s;
  for (const auto& p : cmc) {
    s.x.push_back(p.k);
    s.y.push_back(p.fraction);
  }
  s.color = {0, 90, 200};
  PlotOptions opt;
  opt.y_from_zero = true;
  write_png_rgb(render_line_chart({s}, opt), path);
}

inline void write_lr_table_csv(const std::vector<LREntry>& entries,
                               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "am_id,pm_id,score,is_match,lr,log10_lr\n";
  for (const auto& e : entries)
    out << e.am_id << ',' << e.pm_id << ',' << fmt_double(e.score) << ','
        << (e.is_match ? 1 : 0) << ',' << fmt_double(e.lr) << ','
        << fmt_double(e.log10_lr) << '\n';
}

inline void write_density_csv(const DensityCurves& curves,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "score,pdf_match,pdf_nonmatch\n";
  for (std::size_t i = 0; i < curves.x.size(); ++i)
    out << fmt_double(curves.x[i]) << ',' << fmt_double(curves.pdf_h0[i]) << ','
        << fmt_double(curves.pdf_h1[i]) << '\n';
}

inline void render_density_png(const DensityCurves& curves,
                               const std::filesystem::path& path) {
  PlotSeries h0, h1;
  h0.x = curves.x;
  h0.y = curves.pdf_h0;
  h0.color = {0, 140, 40};  // match population
  h1.x = curves.x;
  h1.y = curves.pdf_h1;
  h1.color = {200, 40, 40};  // non-match population
  write_png_rgb(render_line_chart({h0, h1}), path);
}

namespace detail {

inline bool is_contour(const Bitmask& mask, int x, int y) {
  if (!mask.get(x, y)) return false;
  auto off = [&](int px, int py) {
    return px < 0 || py < 0 || px >= mask.width() || py >= mask.height() ||
           !mask.get(px, py);
  };
  return off(x - 1, y) || off(x + 1, y) || off(x, y - 1) || off(x, y + 1);
}

}  // namespace detail

/// Composite: photo-segmentation contour in red, projected-mesh contour in
/// blue, overlap filled green on top, over the photo (or a blank canvas).
inline RgbImage render_overlay(const Bitmask& photo_roi, const Bitmask& silhouette,
                               const RgbImage* photo = nullptr) {
  if (!photo_roi.same_size(silhouette))
    throw DimensionMismatch("overlay operands differ in size");
  RgbImage img(photo_roi.width(), photo_roi.height());
  if (photo && photo->width == img.width && photo->height == img.height)
    img.pixels = photo->pixels;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      if (detail::is_contour(photo_roi, x, y)) img.put(x, y, 220, 30, 30);
      if (detail::is_contour(silhouette, x, y)) img.put(x, y, 40, 60, 220);
      if (photo_roi.get(x, y) && silhouette.get(x, y)) img.put(x, y, 30, 180, 60);
    }
  return img;
}

}  // namespace dentalreg
