#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dentalreg/errors.hpp"
#include "dentalreg/ident.hpp"

namespace dentalreg {

/// Run configuration, loadable from a JSON file. Every field has a default;
/// unknown keys are rejected so typos do not silently fall back.
struct RunConfig {
  IntrinsicConventions intrinsics{};
  SolverOptions solver{};
  OptimizerConfig optimizer{};
  RegionBounds region_bounds{};
  int region_restarts = 3;
  int workers = 0;
  std::uint64_t base_seed = 1;
};

namespace detail {

inline void check_known_keys(const nlohmann::json& j, const char* where,
                             std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok)
      throw InvalidConfig(std::string(where) + ": unknown key '" + key + "'");
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig c;
  detail::check_known_keys(j, "config",
                           {"intrinsics", "solver", "optimizer", "region_bounds",
                            "region_restarts", "workers", "seed"});
  if (j.contains("intrinsics")) {
    const auto& k = j.at("intrinsics");
    detail::check_known_keys(k, "intrinsics",
                             {"image_width_px", "image_height_px", "sensor_width_mm",
                              "principal_point", "base_standoff_mm", "z_near_mm"});
    c.intrinsics.image_width_px = k.value("image_width_px", c.intrinsics.image_width_px);
    c.intrinsics.image_height_px = k.value("image_height_px", c.intrinsics.image_height_px);
    c.intrinsics.sensor_width_mm = k.value("sensor_width_mm", c.intrinsics.sensor_width_mm);
    c.intrinsics.base_standoff_mm = k.value("base_standoff_mm", c.intrinsics.base_standoff_mm);
    c.intrinsics.z_near_mm = k.value("z_near_mm", c.intrinsics.z_near_mm);
    if (k.contains("principal_point")) {
      c.intrinsics.principal_point_x = k.at("principal_point").at(0).get<double>();
      c.intrinsics.principal_point_y = k.at("principal_point").at(1).get<double>();
    } else {
      c.intrinsics.principal_point_x = c.intrinsics.image_width_px / 2.0;
      c.intrinsics.principal_point_y = c.intrinsics.image_height_px / 2.0;
    }
    if (!c.intrinsics.valid()) throw InvalidConfig("intrinsics: invalid values");
  }
  if (j.contains("solver")) {
    const auto& k = j.at("solver");
    detail::check_known_keys(k, "solver",
                             {"min_pairs", "rmse_mode", "max_iterations",
                              "gradient_tolerance", "cost_tolerance",
                              "focal_starts_mm", "rotation_seed_deg", "max_starts"});
    c.solver.min_pairs = k.value("min_pairs", c.solver.min_pairs);
    if (c.solver.min_pairs < 4) throw InvalidConfig("solver.min_pairs must be >= 4");
    const std::string mode = k.value("rmse_mode", std::string("standard"));
    if (mode == "standard")
      c.solver.rmse_mode = RmseMode::Standard;
    else if (mode == "literal")
      c.solver.rmse_mode = RmseMode::Literal;
    else
      throw InvalidConfig("solver.rmse_mode must be 'standard' or 'literal'");
    c.solver.max_iterations = k.value("max_iterations", c.solver.max_iterations);
    c.solver.gradient_tolerance = k.value("gradient_tolerance", c.solver.gradient_tolerance);
    c.solver.cost_tolerance = k.value("cost_tolerance", c.solver.cost_tolerance);
    if (k.contains("focal_starts_mm"))
      c.solver.focal_starts_mm = k.at("focal_starts_mm").get<std::vector<double>>();
    c.solver.rotation_seed_deg = k.value("rotation_seed_deg", c.solver.rotation_seed_deg);
    c.solver.max_starts = k.value("max_starts", c.solver.max_starts);
    if (c.solver.max_starts < 1) throw InvalidConfig("solver.max_starts must be >= 1");
  }
  if (j.contains("optimizer")) {
    const auto& k = j.at("optimizer");
    detail::check_known_keys(k, "optimizer",
                             {"generations", "particles", "archive_size",
                              "mutated_dims_initial", "mutated_dims_final",
                              "shaping_factor_initial", "shaping_factor_final",
                              "local_search_probability"});
    c.optimizer.generations = k.value("generations", c.optimizer.generations);
    c.optimizer.particles = k.value("particles", c.optimizer.particles);
    c.optimizer.archive_size = k.value("archive_size", c.optimizer.archive_size);
    c.optimizer.mutated_dims_initial =
        k.value("mutated_dims_initial", c.optimizer.mutated_dims_initial);
    c.optimizer.mutated_dims_final =
        k.value("mutated_dims_final", c.optimizer.mutated_dims_final);
    c.optimizer.shaping_factor_initial =
        k.value("shaping_factor_initial", c.optimizer.shaping_factor_initial);
    c.optimizer.shaping_factor_final =
        k.value("shaping_factor_final", c.optimizer.shaping_factor_final);
    c.optimizer.local_search_probability =
        k.value("local_search_probability", c.optimizer.local_search_probability);
    c.optimizer.validate(7);
  }
  if (j.contains("region_bounds")) {
    const auto& k = j.at("region_bounds");
    detail::check_known_keys(k, "region_bounds",
                             {"translation_mm", "rotation_deg", "focal_min_mm", "focal_max_mm"});
    c.region_bounds.translation_mm = k.value("translation_mm", c.region_bounds.translation_mm);
    c.region_bounds.rotation_deg = k.value("rotation_deg", c.region_bounds.rotation_deg);
    c.region_bounds.focal_min_mm = k.value("focal_min_mm", c.region_bounds.focal_min_mm);
    c.region_bounds.focal_max_mm = k.value("focal_max_mm", c.region_bounds.focal_max_mm);
    c.region_bounds.search_space().validate();
  }
  c.region_restarts = j.value("region_restarts", c.region_restarts);
  if (c.region_restarts < 1) throw InvalidConfig("region_restarts must be >= 1");
  c.workers = j.value("workers", c.workers);
  if (c.workers < 0) throw InvalidConfig("workers must be >= 0");
  c.base_seed = j.value("seed", c.base_seed);
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
  try {
    return parse_run_config(j);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
}

inline CohortConfig cohort_config(const RunConfig& run, Method method) {
  CohortConfig c;
  c.method = method;
  c.intrinsics = run.intrinsics;
  c.solver = run.solver;
  c.optimizer = run.optimizer;
  c.region_bounds = run.region_bounds;
  c.region_restarts = run.region_restarts;
  c.workers = run.workers;
  c.base_seed = run.base_seed;
  return c;
}

}  // namespace dentalreg
