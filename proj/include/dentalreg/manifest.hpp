#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "dentalreg/errors.hpp"

namespace dentalreg {

inline constexpr const char* kManifestVersion = "dentalreg-manifest.v1";

/// AM case: a photograph represented by its teeth segmentation and 2D
/// landmarks. Paths are resolved relative to the manifest file.
struct AmCase {
  std::string id;
  std::filesystem::path segmentation;  // may be empty for landmark-only cases
  std::filesystem::path landmarks2d;   // may be empty for region-only cases
};

/// PM case: an intraoral scan (mesh) and its 3D landmarks.
struct PmCase {
  std::string id;
  std::filesystem::path mesh;
  std::filesystem::path landmarks3d;
};

struct CaseManifest {
  std::vector<AmCase> am_cases;
  std::vector<PmCase> pm_cases;
  std::unordered_map<std::string, std::string> truth;  // am id -> pm id
  std::filesystem::path base_dir;

  const PmCase* find_pm(const std::string& id) const {
    for (const auto& pm : pm_cases)
      if (pm.id == id) return &pm;
    return nullptr;
  }
};

inline CaseManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }

  CaseManifest m;
  m.base_dir = path.parent_path();
  auto resolve = [&](const std::string& rel) -> std::filesystem::path {
    if (rel.empty()) return {};
    std::filesystem::path p(rel);
    return p.is_absolute() ? p : m.base_dir / p;
  };

  try {
    std::unordered_set<std::string> seen;
    for (const auto& item : j.at("am_cases")) {
      AmCase am;
      am.id = item.at("id").get<std::string>();
      am.segmentation = resolve(item.value("segmentation", ""));
      am.landmarks2d = resolve(item.value("landmarks2d", ""));
      if (!seen.insert("am:" + am.id).second)
        throw ManifestError("duplicate AM case id '" + am.id + "'");
      m.am_cases.push_back(std::move(am));
    }
    for (const auto& item : j.at("pm_cases")) {
      PmCase pm;
      pm.id = item.at("id").get<std::string>();
      pm.mesh = resolve(item.value("mesh", ""));
      pm.landmarks3d = resolve(item.value("landmarks3d", ""));
      if (!seen.insert("pm:" + pm.id).second)
        throw ManifestError("duplicate PM case id '" + pm.id + "'");
      m.pm_cases.push_back(std::move(pm));
    }
    if (j.contains("truth"))
      for (const auto& item : j.at("truth"))
        m.truth[item.at("am").get<std::string>()] = item.at("pm").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }

  if (m.am_cases.empty() || m.pm_cases.empty())
    throw ManifestError(path.string() + ": manifest needs am_cases and pm_cases");
  for (const auto& [am, pm] : m.truth)
    if (!m.find_pm(pm))
      throw ManifestError("truth pairing for AM '" + am + "' names unknown PM '" + pm + "'");
  return m;
}

inline void save_manifest(const CaseManifest& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["version"] = kManifestVersion;
  j["am_cases"] = nlohmann::json::array();
  auto rel = [&](const std::filesystem::path& p) {
    return p.empty() ? std::string()
                     : std::filesystem::relative(p, path.parent_path()).generic_string();
  };
  for (const auto& am : m.am_cases)
    j["am_cases"].push_back({{"id", am.id},
                             {"segmentation", rel(am.segmentation)},
                             {"landmarks2d", rel(am.landmarks2d)}});
  j["pm_cases"] = nlohmann::json::array();
  for (const auto& pm : m.pm_cases)
    j["pm_cases"].push_back({{"id", pm.id},
                             {"mesh", rel(pm.mesh)},
                             {"landmarks3d", rel(pm.landmarks3d)}});
  std::vector<std::pair<std::string, std::string>> truth(m.truth.begin(), m.truth.end());
  std::sort(truth.begin(), truth.end());
  j["truth"] = nlohmann::json::array();
  for (const auto& [am, pm] : truth)
    j["truth"].push_back({{"am", am}, {"pm", pm}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace dentalreg
