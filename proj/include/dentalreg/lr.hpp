#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dentalreg/errors.hpp"

namespace dentalreg {

/// Gaussian KDE density at x: (1/(n h sqrt(2 pi))) sum exp(-(x-s_i)^2 / (2 h^2)).
inline double kde_pdf(std::span<const double> samples, double bandwidth, double x) {
  if (samples.empty()) throw EmptyPopulation("kde_pdf needs at least one sample");
  if (!(bandwidth > 0.0)) throw NonpositiveBandwidth("bandwidth must be > 0");
  const double inv_h = 1.0 / bandwidth;
  double acc = 0.0;
  for (double s : samples) {
    const double z = (x - s) * inv_h;
    acc += std::exp(-0.5 * z * z);
  }
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return acc * kInvSqrt2Pi * inv_h / static_cast<double>(samples.size());
}

/// Silverman's rule of thumb, 0.9 min(sd, iqr/1.34) n^(-1/5), with a small
/// positive fallback for degenerate populations.
inline double silverman_bandwidth(std::span<const double> samples) {
  if (samples.empty()) throw EmptyPopulation("bandwidth needs at least one sample");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s / n;
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean) / n;
  const double sd = std::sqrt(var);

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double idx = q * (n - 1.0);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (idx - lo) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);

  double scale = sd;
  if (iqr > 0.0) scale = std::min(scale, iqr / 1.34);
  if (scale <= 0.0) scale = std::max(std::abs(mean) * 1e-3, 1e-6);
  return 0.9 * scale * std::pow(n, -0.2);
}

/// Two-population score model: h0 = same-source (match) scores, h1 =
/// different-source (non-match) scores.
struct LRModel {
  std::vector<double> h0_scores;
  std::vector<double> h1_scores;
  double bandwidth_h0 = 0.0;
  double bandwidth_h1 = 0.0;
  double floor = 1e-12;  // density floor, keeps tail LRs finite

  bool fitted() const {
    return h0_scores.size() >= 2 && h1_scores.size() >= 2 &&
           bandwidth_h0 > 0.0 && bandwidth_h1 > 0.0;
  }
};

inline LRModel fit_lr_model(std::vector<double> h0_scores,
                            std::vector<double> h1_scores,
                            double bandwidth_h0 = 0.0,
                            double bandwidth_h1 = 0.0) {
  if (h0_scores.size() < 2 || h1_scores.size() < 2)
    throw EmptyPopulation("LR model needs >= 2 scores in each population");
  LRModel model;
  model.h0_scores = std::move(h0_scores);
  model.h1_scores = std::move(h1_scores);
  model.bandwidth_h0 = bandwidth_h0 > 0.0 ? bandwidth_h0 : silverman_bandwidth(model.h0_scores);
  model.bandwidth_h1 = bandwidth_h1 > 0.0 ? bandwidth_h1 : silverman_bandwidth(model.h1_scores);
  return model;
}

/// LR = p(score | H0) / p(score | H1), both densities floored.
inline double likelihood_ratio(const LRModel& model, double score) {
  if (!model.fitted()) throw UnfittedModel("LR model is not fitted");
  const double p0 = kde_pdf(model.h0_scores, model.bandwidth_h0, score);
  const double p1 = kde_pdf(model.h1_scores, model.bandwidth_h1, score);
  return std::max(p0, model.floor) / std::max(p1, model.floor);
}

/// Log-likelihood-ratio cost:
/// (1/2) [ mean_h0 log2(1 + 1/LR) + mean_h1 log2(1 + LR) ].
/// 1.0 is the uninformative reference system, 0 is perfect.
inline double cllr(std::span<const double> lr_h0, std::span<const double> lr_h1) {
  if (lr_h0.empty() || lr_h1.empty())
    throw EmptyPopulation("cllr needs both LR populations non-empty");
  double acc0 = 0.0;
  for (double lr : lr_h0) {
    if (!(lr > 0.0)) throw NonpositiveLR("cllr needs LR > 0");
    acc0 += std::log2(1.0 + 1.0 / lr);
  }
  double acc1 = 0.0;
  for (double lr : lr_h1) {
    if (!(lr > 0.0)) throw NonpositiveLR("cllr needs LR > 0");
    acc1 += std::log2(1.0 + lr);
  }
  return 0.5 * (acc0 / static_cast<double>(lr_h0.size()) +
                acc1 / static_cast<double>(lr_h1.size()));
}

struct LREntry {
  std::string am_id;
  std::string pm_id;
  double score = 0.0;
  bool is_match = false;
  double lr = 0.0;
  double log10_lr = 0.0;
};

struct DensityCurves {
  std::vector<double> x;
  std::vector<double> pdf_h0;
  std::vector<double> pdf_h1;
};

struct LRReport {
  LRModel model;
  std::vector<LREntry> entries;
  double cllr_value = 0.0;
  DensityCurves curves;
};

struct LROptions {
  bool leave_one_out = false;
  double bandwidth_h0 = 0.0;  // 0 = Silverman
  double bandwidth_h1 = 0.0;
  int curve_samples = 256;
};

namespace detail {

/// KDE with one sample dropped; bandwidth stays as fitted.
inline double kde_pdf_without(std::span<const double> samples, double bandwidth,
                              double x, std::size_t skip) {
  const double n = static_cast<double>(samples.size());
  const double full = kde_pdf(samples, bandwidth, x);
  const double z = (x - samples[skip]) / bandwidth;
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  const double self = std::exp(-0.5 * z * z) * kInvSqrt2Pi / bandwidth;
  return std::max((full * n - self) / (n - 1.0), 0.0);
}

}  // namespace detail

/// Splits labelled scores into match / non-match populations, fits both
/// KDEs, and evaluates every comparison. With leave_one_out, each entry's
/// own score is excluded from its population's density.
inline LRReport fit_and_report(const std::vector<LREntry>& labelled_scores,
                               const LROptions& options = {}) {
  std::vector<double> h0, h1;
  for (const auto& e : labelled_scores)
    (e.is_match ? h0 : h1).push_back(e.score);
  LRReport report;
  report.model = fit_lr_model(h0, h1, options.bandwidth_h0, options.bandwidth_h1);

  std::size_t i0 = 0, i1 = 0;
  std::vector<double> lr_h0, lr_h1;
  for (const auto& e : labelled_scores) {
    LREntry out = e;
    double p0, p1;
    if (options.leave_one_out && e.is_match && report.model.h0_scores.size() > 2) {
      p0 = detail::kde_pdf_without(report.model.h0_scores, report.model.bandwidth_h0,
                                   e.score, i0);
      p1 = kde_pdf(report.model.h1_scores, report.model.bandwidth_h1, e.score);
    } else if (options.leave_one_out && !e.is_match && report.model.h1_scores.size() > 2) {
      p0 = kde_pdf(report.model.h0_scores, report.model.bandwidth_h0, e.score);
      p1 = detail::kde_pdf_without(report.model.h1_scores, report.model.bandwidth_h1,
                                   e.score, i1);
    } else {
      p0 = kde_pdf(report.model.h0_scores, report.model.bandwidth_h0, e.score);
      p1 = kde_pdf(report.model.h1_scores, report.model.bandwidth_h1, e.score);
    }
    out.lr = std::max(p0, report.model.floor) / std::max(p1, report.model.floor);
    out.log10_lr = std::log10(out.lr);
    (e.is_match ? lr_h0 : lr_h1).push_back(out.lr);
    (e.is_match ? i0 : i1) += 1;
    report.entries.push_back(out);
  }
  if (lr_h0.empty() || lr_h1.empty())
    throw EmptyPopulation("need both match and non-match comparisons");
  report.cllr_value = cllr(lr_h0, lr_h1);

  // sampled curves for plotting, spanning both populations plus 3 bandwidths
  const auto [lo0, hi0] = std::minmax_element(report.model.h0_scores.begin(),
                                              report.model.h0_scores.end());
  const auto [lo1, hi1] = std::minmax_element(report.model.h1_scores.begin(),
                                              report.model.h1_scores.end());
  const double pad = 3.0 * std::max(report.model.bandwidth_h0, report.model.bandwidth_h1);
  const double lo = std::min(*lo0, *lo1) - pad;
  const double hi = std::max(*hi0, *hi1) + pad;
  for (int i = 0; i < options.curve_samples; ++i) {
    const double x = lo + (hi - lo) * i / (options.curve_samples - 1.0);
    report.curves.x.push_back(x);
    report.curves.pdf_h0.push_back(
        kde_pdf(report.model.h0_scores, report.model.bandwidth_h0, x));
    report.curves.pdf_h1.push_back(
        kde_pdf(report.model.h1_scores, report.model.bandwidth_h1, x));
  }
  return report;
}

}  // namespace dentalreg
