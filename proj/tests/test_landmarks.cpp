#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "dentalreg/landmarks.hpp"
#include "dentalreg/synth.hpp"

using namespace dentalreg;

namespace {

LandmarkSet3D full_set3d() {
  LandmarkSet3D set;
  double i = 0;
  for (const auto& def : kLandmarkVocabulary)
    set.landmarks.push_back({def.name, Point3{i++, 2 * i, 3}, true});
  return set;
}

LandmarkSet2D full_set2d() {
  LandmarkSet2D set;
  double i = 0;
  for (const auto& def : kLandmarkVocabulary)
    set.landmarks.push_back({def.name, Point2{10 * i++, 5}, true});
  return set;
}

}  // namespace

TEST_CASE("vocabulary has the documented line sizes") {
  int smile = 0, medial = 0, gingival = 0;
  for (const auto& def : kLandmarkVocabulary) {
    if (def.line == LandmarkLine::Smile) ++smile;
    if (def.line == LandmarkLine::Medial) ++medial;
    if (def.line == LandmarkLine::Gingival) ++gingival;
  }
  CHECK(smile == 14);
  CHECK(medial == 5);
  CHECK(gingival == 11);
  CHECK(kLandmarkVocabulary.size() == 30);
}

TEST_CASE("pairing restricted to each subset") {
  const auto l3 = full_set3d();
  const auto l2 = full_set2d();
  CHECK(pair_landmarks(l3, l2, LandmarkSubset::Set1).size() == 30);
  CHECK(pair_landmarks(l3, l2, LandmarkSubset::Set2).size() == 19);
  CHECK(pair_landmarks(l3, l2, LandmarkSubset::Set3).size() == 14);
}

TEST_CASE("occluded 2D landmarks are filtered from the pairing") {
  const auto l3 = full_set3d();
  auto l2 = full_set2d();
  int marked = 0;
  for (auto& lm : l2.landmarks)
    if (marked < 2 && lm.name.rfind("smile.", 0) == 0) {
      lm.present = false;
      ++marked;
    }
  CHECK(pair_landmarks(l3, l2, LandmarkSubset::Set3).size() == 12);
}

TEST_CASE("presence filtering is symmetric across the 3D and 2D sides") {
  auto l3 = full_set3d();
  auto l2 = full_set2d();
  l3.landmarks[1].present = false;   // a smile-line entry
  l2.landmarks[13].present = false;  // a different smile-line entry
  CHECK(pair_landmarks(l3, l2, LandmarkSubset::Set3).size() == 12);
}

TEST_CASE("too few common names") {
  auto l3 = full_set3d();
  auto l2 = full_set2d();
  int kept = 0;
  for (auto& lm : l2.landmarks) {
    const int idx = vocabulary_index(lm.name);
    const bool in_set2 = subset_includes(LandmarkSubset::Set2, kLandmarkVocabulary[idx].line);
    if (in_set2 && kept < 4)
      ++kept;
    else if (in_set2)
      lm.present = false;
  }
  CHECK_THROWS_AS(pair_landmarks(l3, l2, LandmarkSubset::Set2), TooFewPairs);
}

TEST_CASE("pairs come out in canonical vocabulary order") {
  const Subject subject = generate_subject(3, 1.0);
  LandmarkSet2D l2;
  for (const auto& lm : subject.landmarks.landmarks)
    l2.landmarks.push_back({lm.name, Point2{lm.position.x, lm.position.y}, true});
  // shuffle the 2D entries; pairing order must not change
  std::reverse(l2.landmarks.begin(), l2.landmarks.end());
  const auto pairs = pair_landmarks(subject.landmarks, l2, LandmarkSubset::Set1);
  REQUIRE(pairs.size() == 30);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto* lm = subject.landmarks.find(kLandmarkVocabulary[i].name);
    CHECK(pairs[i].first.x == lm->position.x);
  }
}

TEST_CASE("landmark JSON round trip") {
  namespace fs = std::filesystem;
  const Subject subject = generate_subject(9, 1.0);
  const fs::path p3 = fs::temp_directory_path() / "lm3.json";
  save_landmarks3d(subject.landmarks, p3);
  const LandmarkSet3D back = load_landmarks3d(p3);
  REQUIRE(back.landmarks.size() == 30);
  CHECK(back.vocabulary_version == kVocabularyVersion);
  CHECK(back.landmarks[5].position.x ==
        Catch::Approx(subject.landmarks.landmarks[5].position.x));

  LandmarkSet2D l2;
  l2.landmarks.push_back({"smile.11.mid", Point2{12.5, 8.25}, true});
  l2.landmarks.push_back({"smile.12.mid", Point2{1, 2}, false});
  for (const auto& def : kLandmarkVocabulary) {
    if (l2.find(def.name)) continue;
    l2.landmarks.push_back({def.name, Point2{0, 0}, true});
  }
  const fs::path p2 = fs::temp_directory_path() / "lm2.json";
  save_landmarks2d(l2, p2);
  const LandmarkSet2D back2 = load_landmarks2d(p2);
  CHECK(back2.find("smile.11.mid")->position.u == Catch::Approx(12.5));
  CHECK_FALSE(back2.find("smile.12.mid")->present);
}

TEST_CASE("unknown and duplicate names are rejected") {
  namespace fs = std::filesystem;
  const fs::path p = fs::temp_directory_path() / "bad_lm.json";
  {
    std::ofstream out(p);
    out << R"({"vocabulary_version":"x","landmarks":[{"name":"smile.99.mid","x":0,"y":0}]})";
  }
  CHECK_THROWS_AS(load_landmarks2d(p), ParseError);
  {
    std::ofstream out(p);
    out << R"({"vocabulary_version":"x","landmarks":[
      {"name":"smile.11.mid","x":0,"y":0},
      {"name":"smile.11.mid","x":1,"y":1}]})";
  }
  CHECK_THROWS_AS(load_landmarks2d(p), ParseError);
}
