#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dentalreg/errors.hpp"
#include "dentalreg/geometry.hpp"

namespace dentalreg {

enum class LandmarkLine { Smile, Medial, Gingival };

enum class LandmarkSubset { Set1, Set2, Set3 };

/// Set 1 = smile + medial + gingival (30), Set 2 = smile + medial (19),
/// Set 3 = smile only (14).
inline bool subset_includes(LandmarkSubset subset, LandmarkLine line) {
  switch (subset) {
    case LandmarkSubset::Set1:
      return true;
    case LandmarkSubset::Set2:
      return line != LandmarkLine::Gingival;
    case LandmarkSubset::Set3:
      return line == LandmarkLine::Smile;
  }
  return false;
}

struct LandmarkDef {
  const char* name;
  LandmarkLine line;
};

inline constexpr const char* kVocabularyVersion = "dental-anterior-30.v1";

/// Canonical vocabulary over the six anterior upper teeth (FDI 13..23).
///
/// Smile line (14): the incisal edge. Per tooth one mid-edge point (the cusp
/// tip on canines); interdental incisal points are shared between neighbours
/// except at the midline, where each central incisor keeps its own mesial
/// corner; the canines contribute their outer distal corners.
/// Medial line (5): interdental points at mid-crown height.
/// Gingival line (11): one gum-line apex per tooth plus the five interdental
/// papilla points.
inline constexpr std::array<LandmarkDef, 30> kLandmarkVocabulary = {{
    {"smile.13.distal", LandmarkLine::Smile},
    {"smile.13.tip", LandmarkLine::Smile},
    {"smile.13-12", LandmarkLine::Smile},
    {"smile.12.mid", LandmarkLine::Smile},
    {"smile.12-11", LandmarkLine::Smile},
    {"smile.11.mid", LandmarkLine::Smile},
    {"smile.11.mesial", LandmarkLine::Smile},
    {"smile.21.mesial", LandmarkLine::Smile},
    {"smile.21.mid", LandmarkLine::Smile},
    {"smile.21-22", LandmarkLine::Smile},
    {"smile.22.mid", LandmarkLine::Smile},
    {"smile.22-23", LandmarkLine::Smile},
    {"smile.23.tip", LandmarkLine::Smile},
    {"smile.23.distal", LandmarkLine::Smile},
    {"medial.13-12", LandmarkLine::Medial},
    {"medial.12-11", LandmarkLine::Medial},
    {"medial.11-21", LandmarkLine::Medial},
    {"medial.21-22", LandmarkLine::Medial},
    {"medial.22-23", LandmarkLine::Medial},
    {"gingival.13", LandmarkLine::Gingival},
    {"gingival.13-12", LandmarkLine::Gingival},
    {"gingival.12", LandmarkLine::Gingival},
    {"gingival.12-11", LandmarkLine::Gingival},
    {"gingival.11", LandmarkLine::Gingival},
    {"gingival.11-21", LandmarkLine::Gingival},
    {"gingival.21", LandmarkLine::Gingival},
    {"gingival.21-22", LandmarkLine::Gingival},
    {"gingival.22", LandmarkLine::Gingival},
    {"gingival.22-23", LandmarkLine::Gingival},
    {"gingival.23", LandmarkLine::Gingival},
}};

/// Index in canonical order, or -1 when the name is not in the vocabulary.
inline int vocabulary_index(const std::string& name) {
  for (std::size_t i = 0; i < kLandmarkVocabulary.size(); ++i)
    if (name == kLandmarkVocabulary[i].name) return static_cast<int>(i);
  return -1;
}

template <typename PointT>
struct Landmark {
  std::string name;
  PointT position{};
  bool present = true;
};

template <typename PointT>
struct LandmarkSet {
  std::string vocabulary_version = kVocabularyVersion;
  std::vector<Landmark<PointT>> landmarks;

  const Landmark<PointT>* find(const std::string& name) const {
    for (const auto& lm : landmarks)
      if (lm.name == name) return &lm;
    return nullptr;
  }
};

using LandmarkSet3D = LandmarkSet<Point3>;
using LandmarkSet2D = LandmarkSet<Point2>;

namespace detail {

template <typename PointT>
inline void validate_landmark_set(const LandmarkSet<PointT>& set,
                                  const std::string& where) {
  std::unordered_map<std::string, int> seen;
  for (const auto& lm : set.landmarks) {
    if (vocabulary_index(lm.name) < 0)
      throw ParseError(where + ": unknown landmark name '" + lm.name + "'");
    if (++seen[lm.name] > 1)
      throw ParseError(where + ": duplicate landmark name '" + lm.name + "'");
  }
}

}  // namespace detail

inline LandmarkSet3D load_landmarks3d(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open landmark file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  LandmarkSet3D set;
  try {
    set.vocabulary_version = j.at("vocabulary_version").get<std::string>();
    for (const auto& item : j.at("landmarks")) {
      Landmark<Point3> lm;
      lm.name = item.at("name").get<std::string>();
      lm.position.x = item.at("x").get<double>();
      lm.position.y = item.at("y").get<double>();
      lm.position.z = item.value("z", 0.0);
      lm.present = item.value("present", true);
      set.landmarks.push_back(std::move(lm));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  detail::validate_landmark_set(set, path.string());
  return set;
}

inline LandmarkSet2D load_landmarks2d(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open landmark file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  LandmarkSet2D set;
  try {
    set.vocabulary_version = j.at("vocabulary_version").get<std::string>();
    for (const auto& item : j.at("landmarks")) {
      Landmark<Point2> lm;
      lm.name = item.at("name").get<std::string>();
      lm.position.u = item.at("x").get<double>();
      lm.position.v = item.at("y").get<double>();
      lm.present = item.value("present", true);
      set.landmarks.push_back(std::move(lm));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  detail::validate_landmark_set(set, path.string());
  return set;
}

inline void save_landmarks3d(const LandmarkSet3D& set,
                             const std::filesystem::path& path) {
  nlohmann::json j;
  j["vocabulary_version"] = set.vocabulary_version;
  j["landmarks"] = nlohmann::json::array();
  for (const auto& lm : set.landmarks)
    j["landmarks"].push_back({{"name", lm.name},
                              {"x", lm.position.x},
                              {"y", lm.position.y},
                              {"z", lm.position.z},
                              {"present", lm.present}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot write landmark file: " + path.string());
  out << j.dump(2) << "\n";
}

inline void save_landmarks2d(const LandmarkSet2D& set,
                             const std::filesystem::path& path) {
  nlohmann::json j;
  j["vocabulary_version"] = set.vocabulary_version;
  j["landmarks"] = nlohmann::json::array();
  for (const auto& lm : set.landmarks)
    j["landmarks"].push_back({{"name", lm.name},
                              {"x", lm.position.u},
                              {"y", lm.position.v},
                              {"present", lm.present}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot write landmark file: " + path.string());
  out << j.dump(2) << "\n";
}

/// Pairs 3D and 2D landmarks by name, restricted to the chosen subset and to
/// names marked present on both sides, in canonical vocabulary order.
inline std::vector<std::pair<Point3, Point2>> pair_landmarks(
    const LandmarkSet3D& l3, const LandmarkSet2D& l2, LandmarkSubset subset,
    int min_pairs = 6) {
  std::vector<std::pair<Point3, Point2>> pairs;
  for (const LandmarkDef& def : kLandmarkVocabulary) {
    if (!subset_includes(subset, def.line)) continue;
    const auto* a = l3.find(def.name);
    const auto* b = l2.find(def.name);
    if (a && b && a->present && b->present)
      pairs.emplace_back(a->position, b->position);
  }
  if (static_cast<int>(pairs.size()) < min_pairs)
    throw TooFewPairs("only " + std::to_string(pairs.size()) +
                      " landmark pairs available, need " +
                      std::to_string(min_pairs));
  return pairs;
}

inline const char* subset_name(LandmarkSubset s) {
  switch (s) {
    case LandmarkSubset::Set1: return "set1";
    case LandmarkSubset::Set2: return "set2";
    case LandmarkSubset::Set3: return "set3";
  }
  return "?";
}

}  // namespace dentalreg
