#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dentalreg/errors.hpp"
#include "dentalreg/rng.hpp"

namespace dentalreg {

/// Box-bounded continuous search space. The optimizer works on [0,1]^d
/// internally and denormalizes before every fitness call.
struct SearchSpace {
  std::vector<std::pair<double, double>> bounds;  // (lower, upper) per dim

  int dim() const { return static_cast<int>(bounds.size()); }

  void validate() const {
    if (bounds.empty()) throw InvalidConfig("search space has no dimensions");
    for (const auto& [lo, hi] : bounds)
      if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InvalidConfig("search space bounds must satisfy lower < upper");
  }

  std::vector<double> denormalize(const std::vector<double>& x) const {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      out[i] = bounds[i].first + x[i] * (bounds[i].second - bounds[i].first);
    return out;
  }
};

struct OptimizerConfig {
  int generations = 600;
  int particles = 15;
  int archive_size = 4;
  int mutated_dims_initial = 0;  // 0 means "all dimensions"
  int mutated_dims_final = 1;
  double shaping_factor_initial = 1.0;
  double shaping_factor_final = 10.0;
  double local_search_probability = 0.3;
  std::uint64_t seed = 1;

  void validate(int dim) const {
    if (generations < 1) throw InvalidConfig("generations must be >= 1");
    if (particles < 1) throw InvalidConfig("particles must be >= 1");
    if (archive_size < 2) throw InvalidConfig("archive_size must be >= 2");
    const int mi = mutated_dims_initial == 0 ? dim : mutated_dims_initial;
    if (mi < 1 || mi > dim || mutated_dims_final < 1 || mutated_dims_final > dim)
      throw InvalidConfig("mutated dimension counts must lie in [1, dim]");
    if (shaping_factor_initial <= 0 || shaping_factor_final <= 0)
      throw InvalidConfig("shaping factors must be positive");
    if (local_search_probability < 0 || local_search_probability > 1)
      throw InvalidConfig("local_search_probability must lie in [0, 1]");
  }
};

struct OptimizationResult {
  std::vector<double> best_point;  // original units
  double best_value = std::numeric_limits<double>::infinity();
  long evaluations_used = 0;
  std::uint64_t seed = 0;
  std::vector<double> trace;  // best-so-far after each generation
};

/// The mean-variance mapping h(x) = xbar(1 - e^{-x s1}) + (1 - xbar) e^{-(1-x) s2}.
inline double mapping_h(double xbar, double s1, double s2, double x) {
  return xbar * (1.0 - std::exp(-x * s1)) + (1.0 - xbar) * std::exp(-(1.0 - x) * s2);
}

/// Offspring coordinate x_new = h + (1 - h1 + h0) x - h0, clamped to [0,1].
inline double mapped_coordinate(double xbar, double s1, double s2, double x) {
  const double h = mapping_h(xbar, s1, s2, x);
  const double h0 = mapping_h(xbar, s1, s2, 0.0);
  const double h1 = mapping_h(xbar, s1, s2, 1.0);
  const double x_new = h + (1.0 - h1 + h0) * x - h0;
  return std::clamp(x_new, 0.0, 1.0);
}

using FitnessFn = std::function<double(const std::vector<double>&)>;

namespace detail {

struct ArchiveEntry {
  std::vector<double> x;  // normalized
  double value;
};

struct Particle {
  std::vector<ArchiveEntry> archive;  // ascending by value, <= archive_size
  std::vector<double> base;           // parent for offspring construction
  std::vector<double> last_s;         // per-dim shaping memory (0 = identity)

  const std::vector<double>& best_x() const { return archive.front().x; }
  double best_value() const { return archive.front().value; }

  void insert(std::vector<double> x, double value, int capacity) {
    // invalid candidates carry no positional information: never archive
    // them next to finite ones, and drop them as soon as a finite value
    // arrives (the initial entry may be infinite so a base always exists)
    if (std::isinf(value) && !archive.empty()) return;
    if (!archive.empty() && std::isinf(archive.back().value))
      archive.erase(std::remove_if(archive.begin(), archive.end(),
                                   [](const ArchiveEntry& e) {
                                     return std::isinf(e.value);
                                   }),
                    archive.end());
    auto it = std::find_if(archive.begin(), archive.end(),
                           [&](const ArchiveEntry& e) { return value < e.value; });
    if (it == archive.end() && static_cast<int>(archive.size()) >= capacity) return;
    archive.insert(it, ArchiveEntry{std::move(x), value});
    if (static_cast<int>(archive.size()) > capacity) archive.pop_back();
  }
};

inline std::string point_repr(const std::vector<double>& x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace detail

/// MVMO-SH minimization over a box. The fitness may return +inf to mark an
/// invalid candidate; every evaluated point lies inside the box. Fully
/// deterministic for a given (seed, config, fitness).
inline OptimizationResult optimize(const FitnessFn& fitness,
                                   const SearchSpace& space,
                                   const OptimizerConfig& config) {
  space.validate();
  const int d = space.dim();
  config.validate(d);
  const int m_initial = config.mutated_dims_initial == 0 ? d : config.mutated_dims_initial;

  Rng rng(config.seed);
  OptimizationResult result;
  result.seed = config.seed;

  auto evaluate = [&](const std::vector<double>& x_norm) -> double {
    const std::vector<double> x = space.denormalize(x_norm);
    double v;
    try {
      v = fitness(x);
    } catch (const std::exception& e) {
      throw FitnessEvaluationError(e.what(), detail::point_repr(x));
    }
    ++result.evaluations_used;
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<detail::Particle> particles(config.particles);
  int best_owner = 0;
  std::vector<double> best_x;
  double best_value = std::numeric_limits<double>::infinity();

  for (int p = 0; p < config.particles; ++p) {
    std::vector<double> x(d);
    for (double& xi : x) xi = rng.uniform();
    const double v = evaluate(x);
    particles[p].archive.push_back({x, v});
    particles[p].base = x;
    particles[p].last_s.assign(d, 0.0);
    if (p == 0 || v < best_value) {  // even an invalid incumbent seeds the search
      best_value = v;
      best_x = x;
      best_owner = p;
    }
  }

  std::vector<int> dims(d);
  std::vector<double> ls_step(d, 0.05);
  const double gen_span = config.generations > 1 ? config.generations - 1.0 : 1.0;

  for (int gen = 0; gen < config.generations; ++gen) {
    const double t = gen / gen_span;
    const double fs = config.shaping_factor_initial +
                      t * (config.shaping_factor_final - config.shaping_factor_initial);
    const int m = std::clamp(
        static_cast<int>(std::lround(m_initial + t * (config.mutated_dims_final - m_initial))),
        1, d);

    for (int p = 0; p < config.particles; ++p) {
      detail::Particle& particle = particles[p];

      // choose m distinct dimensions (partial Fisher-Yates)
      std::iota(dims.begin(), dims.end(), 0);
      for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - i)));
        std::swap(dims[i], dims[j]);
      }

      std::vector<double> child = particle.base;
      for (int i = 0; i < m; ++i) {
        const int dim = dims[i];
        double mean = 0.0, var = 0.0;
        for (const auto& e : particle.archive) mean += e.x[dim];
        mean /= static_cast<double>(particle.archive.size());
        for (const auto& e : particle.archive) {
          const double dx = e.x[dim] - mean;
          var += dx * dx;
        }
        var /= static_cast<double>(particle.archive.size());

        double s = particle.last_s[dim];
        if (var > 0.0) {
          s = -std::log(var) * fs;
          particle.last_s[dim] = s;
        }
        child[dim] = mapped_coordinate(mean, s, s, rng.uniform());
      }

      const double v = evaluate(child);
      particle.insert(child, v, config.archive_size);
      particle.base = particle.best_x();
      if (v < best_value) {
        best_value = v;
        best_x = child;
        best_owner = p;
      }
    }

    // swarm step: the worst third restarts from a blend toward a good
    // particle's best (no extra evaluation; only the parent moves)
    const int n_bad = config.particles / 3;
    if (n_bad > 0) {
      std::vector<int> order(config.particles);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return particles[a].best_value() < particles[b].best_value();
      });
      const int n_good = config.particles - n_bad;
      for (int k = 0; k < n_bad; ++k) {
        detail::Particle& bad = particles[order[n_good + k]];
        const detail::Particle& good =
            particles[order[static_cast<int>(rng.below(static_cast<std::uint64_t>(n_good)))]];
        const double w = rng.uniform();
        std::vector<double> blended(d);
        for (int i = 0; i < d; ++i)
          blended[i] = good.best_x()[i] + w * (bad.best_x()[i] - good.best_x()[i]);
        bad.base = std::move(blended);
      }
    }

    // occasional coordinate descent from the incumbent, <= 2d evals per
    // trigger; per-dimension steps persist across triggers and grow on
    // success, shrink on failure (pattern search); once every step has
    // collapsed the scales restart so the polish phase cannot freeze
    if (rng.uniform() < config.local_search_probability) {
      if (*std::max_element(ls_step.begin(), ls_step.end()) < 1e-3)
        ls_step.assign(d, 0.05);
      for (int dim = 0; dim < d; ++dim) {
        bool moved = false;
        for (const double sign : {+1.0, -1.0}) {
          std::vector<double> probe = best_x;
          probe[dim] = std::clamp(probe[dim] + sign * ls_step[dim], 0.0, 1.0);
          const double v = evaluate(probe);
          if (v < best_value) {
            best_value = v;
            best_x = probe;
            particles[best_owner].insert(best_x, v, config.archive_size);
            moved = true;
            break;  // keep the trigger budget at <= 2 evals per dimension
          }
        }
        ls_step[dim] = moved ? std::min(2.0 * ls_step[dim], 0.25)
                             : std::max(0.5 * ls_step[dim], 1e-7);
      }
    }

    result.trace.push_back(best_value);
  }

  result.best_point = space.denormalize(best_x);
  result.best_value = best_value;
  return result;
}

/// Runs optimize with seeds seed, seed+1, ... and keeps the best run; ties
/// go to the lower seed. total_evaluations (optional) accumulates across all
/// restarts.
inline OptimizationResult best_of_restarts(const FitnessFn& fitness,
                                           const SearchSpace& space,
                                           const OptimizerConfig& config,
                                           int n_restarts = 3,
                                           long* total_evaluations = nullptr) {
  if (n_restarts < 1) throw InvalidConfig("n_restarts must be >= 1");
  OptimizationResult best;
  bool have = false;
  for (int i = 0; i < n_restarts; ++i) {
    OptimizerConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(i);
    OptimizationResult r = optimize(fitness, space, c);
    if (total_evaluations) *total_evaluations += r.evaluations_used;
    if (!have || r.best_value < best.best_value) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

}  // namespace dentalreg
