#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "dentalreg/camera.hpp"
#include "dentalreg/errors.hpp"
#include "dentalreg/landmarks.hpp"

namespace dentalreg {

enum class Method { LandmarksSet1, LandmarksSet2, LandmarksSet3, Regions };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::LandmarksSet1: return "landmarks-set1";
    case Method::LandmarksSet2: return "landmarks-set2";
    case Method::LandmarksSet3: return "landmarks-set3";
    case Method::Regions: return "regions";
  }
  return "?";
}

inline Method method_from_name(const std::string& name) {
  if (name == "landmarks-set1") return Method::LandmarksSet1;
  if (name == "landmarks-set2") return Method::LandmarksSet2;
  if (name == "landmarks-set3") return Method::LandmarksSet3;
  if (name == "regions") return Method::Regions;
  throw InvalidConfig("unknown method '" + name + "'");
}

inline bool is_landmark_method(Method m) { return m != Method::Regions; }

inline LandmarkSubset method_subset(Method m) {
  switch (m) {
    case Method::LandmarksSet1: return LandmarkSubset::Set1;
    case Method::LandmarksSet2: return LandmarkSubset::Set2;
    case Method::LandmarksSet3: return LandmarkSubset::Set3;
    default: throw InvalidConfig("regions method has no landmark subset");
  }
}

/// One scored (AM, PM) cell. Lower score is better: reprojection RMSE in
/// pixels for the landmark methods, masked DICE error for regions.
struct ComparisonScore {
  std::string am_id;
  std::string pm_id;
  Method method = Method::Regions;
  double score = std::numeric_limits<double>::infinity();
  bool unscorable = false;
  std::string unscorable_reason;
  std::uint64_t seed = 0;
  long evaluations = 0;
  int restarts = 0;
  bool converged = true;
  bool coplanar = false;
  CameraParams params{};
  bool has_params = false;
};

}  // namespace dentalreg
