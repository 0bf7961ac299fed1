#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "dentalreg/manifest.hpp"
#include "dentalreg/mvmo.hpp"
#include "dentalreg/pnpf.hpp"
#include "dentalreg/regfit.hpp"
#include "dentalreg/rng.hpp"
#include "dentalreg/scores.hpp"

namespace dentalreg {

struct RankingEntry {
  std::string pm_id;
  double score = 0.0;
  bool unscorable = false;
};

struct Ranking {
  std::string am_id;
  std::vector<RankingEntry> entries;  // best first
  int correct_position = 0;           // 1-based
};

struct RankingStatistics {
  double avg = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

struct CmcPoint {
  int k = 0;
  double fraction = 0.0;
};

/// Ascending sort by score, unscorable cells last, ties broken by pm_id;
/// correct_position is the 1-based rank of the true PM.
inline Ranking build_ranking(const std::string& am_id,
                             std::vector<ComparisonScore> row,
                             const std::string& truth_pm_id,
                             const std::vector<std::string>* expected_pm_ids = nullptr) {
  if (row.empty()) throw MissingScores("empty score row for AM '" + am_id + "'");
  if (expected_pm_ids) {
    for (const std::string& pm : *expected_pm_ids) {
      const bool found = std::any_of(row.begin(), row.end(), [&](const ComparisonScore& s) {
        return s.pm_id == pm;
      });
      if (!found)
        throw MissingScores("AM '" + am_id + "' is missing the score for PM '" + pm + "'");
    }
  }
  std::sort(row.begin(), row.end(), [](const ComparisonScore& a, const ComparisonScore& b) {
    if (a.unscorable != b.unscorable) return b.unscorable;
    if (!a.unscorable && a.score != b.score) return a.score < b.score;
    return a.pm_id < b.pm_id;
  });

  Ranking r;
  r.am_id = am_id;
  for (const auto& s : row)
    r.entries.push_back({s.pm_id, s.score, s.unscorable});
  for (std::size_t i = 0; i < row.size(); ++i)
    if (row[i].pm_id == truth_pm_id) {
      r.correct_position = static_cast<int>(i) + 1;
      return r;
    }
  throw MissingScores("true PM '" + truth_pm_id + "' not present in the row for AM '" +
                      am_id + "'");
}

/// Percentile with linear interpolation between closest ranks,
/// index = q (n - 1) on the sorted list.
inline double interpolated_percentile(std::vector<double> values, double q) {
  if (values.empty()) throw EmptyInput("percentile of empty list");
  std::sort(values.begin(), values.end());
  const double idx = q * (static_cast<double>(values.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (idx - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline RankingStatistics ranking_statistics(const std::vector<int>& positions) {
  if (positions.empty()) throw EmptyInput("ranking_statistics needs positions");
  std::vector<double> v(positions.begin(), positions.end());
  RankingStatistics s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.avg = sum / static_cast<double>(v.size());
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  s.q1 = interpolated_percentile(v, 0.25);
  s.q2 = interpolated_percentile(v, 0.50);
  s.q3 = interpolated_percentile(v, 0.75);
  s.p95 = interpolated_percentile(v, 0.95);
  s.p99 = interpolated_percentile(v, 0.99);
  return s;
}

/// Fraction of cases whose correct position is <= k, for k = 1..N.
inline std::vector<CmcPoint> cmc_curve(const std::vector<int>& positions, int n) {
  for (int p : positions)
    if (p < 1 || p > n)
      throw PositionOutOfRange("position " + std::to_string(p) + " outside [1, " +
                               std::to_string(n) + "]");
  std::vector<CmcPoint> curve(n);
  for (int k = 1; k <= n; ++k) {
    int hits = 0;
    for (int p : positions)
      if (p <= k) ++hits;
    curve[k - 1] = {k, positions.empty() ? 0.0
                                         : static_cast<double>(hits) /
                                               static_cast<double>(positions.size())};
  }
  return curve;
}

struct RankingReport {
  std::vector<Ranking> rankings;
  std::vector<int> positions;
  RankingStatistics stats;
  std::vector<CmcPoint> cmc;
};

/// Assembles per-AM rankings from a full score matrix plus truth pairing.
/// Scores are only ever compared within one AM row.
inline RankingReport build_report(
    const std::vector<ComparisonScore>& scores,
    const std::unordered_map<std::string, std::string>& truth) {
  std::vector<std::string> am_ids, pm_ids;
  std::unordered_map<std::string, std::vector<ComparisonScore>> rows;
  for (const auto& s : scores) {
    if (rows.find(s.am_id) == rows.end()) am_ids.push_back(s.am_id);
    if (std::find(pm_ids.begin(), pm_ids.end(), s.pm_id) == pm_ids.end())
      pm_ids.push_back(s.pm_id);
    rows[s.am_id].push_back(s);
  }
  std::sort(am_ids.begin(), am_ids.end());
  std::sort(pm_ids.begin(), pm_ids.end());

  RankingReport report;
  for (const std::string& am : am_ids) {
    const auto it = truth.find(am);
    if (it == truth.end())
      throw MissingScores("no truth pairing for AM '" + am + "'");
    Ranking r = build_ranking(am, rows[am], it->second, &pm_ids);
    report.positions.push_back(r.correct_position);
    report.rankings.push_back(std::move(r));
  }
  report.stats = ranking_statistics(report.positions);
  report.cmc = cmc_curve(report.positions, static_cast<int>(pm_ids.size()));
  return report;
}

/// Everything run_cohort needs beyond the manifest.
struct CohortConfig {
  Method method = Method::Regions;
  IntrinsicConventions intrinsics{};  // dims overridden per AM segmentation
  SolverOptions solver{};
  OptimizerConfig optimizer{};
  RegionBounds region_bounds{};
  int region_restarts = 3;
  int workers = 0;  // 0 = hardware concurrency
  std::uint64_t base_seed = 1;
};

struct CohortResult {
  std::vector<std::string> am_ids;
  std::vector<std::string> pm_ids;
  std::vector<ComparisonScore> scores;  // AM-major, manifest order
  std::optional<RankingReport> report;  // present when truth is available
};

namespace detail {

struct AmData {
  std::string id;
  IntrinsicConventions ic;
  std::optional<SegmentationImage> seg;
  std::optional<LandmarkSet2D> landmarks;
  std::string error;  // non-empty: every cell in this row is unscorable
};

struct PmData {
  std::string id;
  std::optional<DentalMesh> mesh;
  std::optional<LandmarkSet3D> landmarks;
  std::string error;
};

inline std::string cell_key(const std::string& am, const std::string& pm) {
  return am + "\x1f" + pm;
}

}  // namespace detail

/// Scores every AM photograph against every PM scan. Cells are independent
/// and evaluated by a worker pool; per-cell seeds derive from (base_seed,
/// cell index) so results do not depend on worker count or schedule.
/// `precomputed` cells are reused without evaluation; `on_cell` observes
/// newly computed cells (called under a lock, in completion order).
inline CohortResult run_cohort(
    const CaseManifest& manifest, const CohortConfig& config,
    const std::unordered_map<std::string, ComparisonScore>* precomputed = nullptr,
    const std::function<void(const ComparisonScore&)>& on_cell = nullptr) {
  const bool landmarks_method = is_landmark_method(config.method);

  // load AM-side assets once; landmark-file problems poison the row but do
  // not abort the run
  std::vector<detail::AmData> am_data;
  for (const AmCase& am : manifest.am_cases) {
    detail::AmData d;
    d.id = am.id;
    d.ic = config.intrinsics;
    try {
      if (!am.segmentation.empty()) {
        if (!std::filesystem::exists(am.segmentation))
          throw ManifestError("AM case '" + am.id + "': missing segmentation file " +
                              am.segmentation.string());
        SegmentationImage seg = load_segmentation(am.segmentation);
        d.ic = IntrinsicConventions::for_image(seg.width, seg.height,
                                               config.intrinsics.sensor_width_mm,
                                               config.intrinsics.base_standoff_mm);
        d.ic.z_near_mm = config.intrinsics.z_near_mm;
        d.seg = std::move(seg);
      } else if (!landmarks_method) {
        throw ManifestError("AM case '" + am.id + "': regions method needs a segmentation");
      }
    } catch (const ManifestError&) {
      throw;
    } catch (const Error& e) {
      throw ManifestError("AM case '" + am.id + "': " + e.what());
    }
    if (landmarks_method) {
      try {
        if (am.landmarks2d.empty())
          throw ParseError("no landmarks2d file listed");
        d.landmarks = load_landmarks2d(am.landmarks2d);
      } catch (const Error& e) {
        d.error = std::string("2D landmarks unavailable: ") + e.what();
      }
    }
    if (!landmarks_method && d.seg && !d.seg->usable())
      d.error = "segmentation ROI is fully occluded";
    am_data.push_back(std::move(d));
  }

  // PM-side assets; a missing mesh is a manifest error, landmark-file
  // problems poison the column
  std::vector<detail::PmData> pm_data;
  for (const PmCase& pm : manifest.pm_cases) {
    detail::PmData d;
    d.id = pm.id;
    if (!landmarks_method) {
      if (pm.mesh.empty() || !std::filesystem::exists(pm.mesh))
        throw ManifestError("PM case '" + pm.id + "': missing mesh file " +
                            pm.mesh.string());
      try {
        d.mesh = load_mesh(pm.mesh);
      } catch (const Error& e) {
        throw ManifestError("PM case '" + pm.id + "': " + e.what());
      }
    } else {
      try {
        if (pm.landmarks3d.empty())
          throw ParseError("no landmarks3d file listed");
        d.landmarks = load_landmarks3d(pm.landmarks3d);
      } catch (const Error& e) {
        d.error = std::string("3D landmarks unavailable: ") + e.what();
      }
    }
    pm_data.push_back(std::move(d));
  }

  if (!manifest.truth.empty())
    for (const auto& am : manifest.am_cases)
      if (manifest.truth.find(am.id) == manifest.truth.end())
        throw ManifestError("no truth pairing for AM case '" + am.id + "'");

  const std::size_t n_am = am_data.size();
  const std::size_t n_pm = pm_data.size();
  const std::size_t n_cells = n_am * n_pm;
  std::vector<ComparisonScore> cells(n_cells);
  std::vector<char> needs_eval(n_cells, 1);

  for (std::size_t i = 0; i < n_cells; ++i) {
    const auto& am = am_data[i / n_pm];
    const auto& pm = pm_data[i % n_pm];
    if (precomputed) {
      const auto it = precomputed->find(detail::cell_key(am.id, pm.id));
      if (it != precomputed->end()) {
        cells[i] = it->second;
        needs_eval[i] = 0;
      }
    }
  }

  auto evaluate_cell = [&](std::size_t i) -> ComparisonScore {
    const detail::AmData& am = am_data[i / n_pm];
    const detail::PmData& pm = pm_data[i % n_pm];
    const std::uint64_t cell_seed = mix_seed(config.base_seed, i);

    ComparisonScore s;
    s.am_id = am.id;
    s.pm_id = pm.id;
    s.method = config.method;
    s.seed = cell_seed;
    if (!am.error.empty() || !pm.error.empty()) {
      s.unscorable = true;
      s.unscorable_reason = !am.error.empty() ? am.error : pm.error;
      return s;
    }
    if (landmarks_method) {
      s = score_landmark_comparison(*pm.landmarks, *am.landmarks,
                                    method_subset(config.method), am.ic, config.solver);
      s.am_id = am.id;
      s.pm_id = pm.id;
      s.seed = cell_seed;
      return s;
    }
    try {
      OptimizerConfig opt = config.optimizer;
      opt.seed = cell_seed;
      const RegionScore r = score_region_comparison(*am.seg, *pm.mesh, am.ic, opt,
                                                    config.region_restarts,
                                                    config.region_bounds);
      s.score = r.masked_dice_error;
      s.params = r.params;
      s.has_params = true;
      s.restarts = r.restarts_used;
      s.evaluations = r.evaluations_used;
      if (!std::isfinite(s.score)) {
        s.unscorable = true;
        s.unscorable_reason = "no on-screen candidate found";
      }
    } catch (const UnusableCase& e) {
      s.unscorable = true;
      s.unscorable_reason = e.what();
    }
    return s;
  };

  const int workers = config.workers > 0
                          ? config.workers
                          : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::mutex cb_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_cells) return;
      if (!needs_eval[i]) continue;
      try {
        cells[i] = evaluate_cell(i);
        if (on_cell) {
          std::lock_guard<std::mutex> lock(cb_mutex);
          on_cell(cells[i]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(cb_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  CohortResult result;
  for (const auto& am : am_data) result.am_ids.push_back(am.id);
  for (const auto& pm : pm_data) result.pm_ids.push_back(pm.id);
  result.scores = std::move(cells);
  if (!manifest.truth.empty())
    result.report = build_report(result.scores, {manifest.truth.begin(), manifest.truth.end()});
  return result;
}

}  // namespace dentalreg
