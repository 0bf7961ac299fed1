#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dentalreg/errors.hpp"
#include "dentalreg/scores.hpp"

namespace dentalreg {

/// Fixed shortest-ish formatting so identical runs produce identical bytes.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline void write_scores_csv(const std::vector<ComparisonScore>& scores,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "am_id,pm_id,method,score,unscorable,seed,evaluations\n";
  for (const auto& s : scores)
    out << s.am_id << ',' << s.pm_id << ',' << method_name(s.method) << ','
        << (s.unscorable ? "" : fmt_double(s.score)) << ','
        << (s.unscorable ? 1 : 0) << ',' << s.seed << ',' << s.evaluations << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::vector<ComparisonScore> read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line != "am_id,pm_id,method,score,unscorable,seed,evaluations")
    throw ParseError(path.string() + ": unexpected scores header");
  std::vector<ComparisonScore> scores;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7)
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 7 fields");
    ComparisonScore s;
    s.am_id = f[0];
    s.pm_id = f[1];
    s.method = method_from_name(f[2]);
    s.unscorable = f[4] == "1";
    s.score = s.unscorable || f[3].empty() ? std::numeric_limits<double>::infinity()
                                           : std::stod(f[3]);
    s.seed = std::stoull(f[5]);
    s.evaluations = std::stol(f[6]);
    scores.push_back(std::move(s));
  }
  return scores;
}

/// Per-comparison metadata: the winning camera parameters and solver flags.
inline void write_params_csv(const std::vector<ComparisonScore>& scores,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "am_id,pm_id,method,score,unscorable,tx,ty,tz,rx,ry,rz,f,"
         "restarts,converged,coplanar\n";
  for (const auto& s : scores) {
    out << s.am_id << ',' << s.pm_id << ',' << method_name(s.method) << ','
        << (s.unscorable ? "" : fmt_double(s.score)) << ',' << (s.unscorable ? 1 : 0) << ',';
    if (s.has_params)
      out << fmt_double(s.params.tx) << ',' << fmt_double(s.params.ty) << ','
          << fmt_double(s.params.tz) << ',' << fmt_double(s.params.rx) << ','
          << fmt_double(s.params.ry) << ',' << fmt_double(s.params.rz) << ','
          << fmt_double(s.params.f);
    else
      out << ",,,,,,";
    out << ',' << s.restarts << ',' << (s.converged ? 1 : 0) << ','
        << (s.coplanar ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

inline nlohmann::json score_to_json(const ComparisonScore& s) {
  nlohmann::json j{{"am_id", s.am_id},
                   {"pm_id", s.pm_id},
                   {"method", method_name(s.method)},
                   {"unscorable", s.unscorable},
                   {"seed", s.seed},
                   {"evaluations", s.evaluations},
                   {"restarts", s.restarts},
                   {"converged", s.converged},
                   {"coplanar", s.coplanar}};
  if (!s.unscorable) j["score"] = s.score;
  if (s.unscorable) j["reason"] = s.unscorable_reason;
  if (s.has_params)
    j["params"] = {s.params.tx, s.params.ty, s.params.tz, s.params.rx,
                   s.params.ry, s.params.rz, s.params.f};
  return j;
}

inline ComparisonScore score_from_json(const nlohmann::json& j) {
  ComparisonScore s;
  s.am_id = j.at("am_id").get<std::string>();
  s.pm_id = j.at("pm_id").get<std::string>();
  s.method = method_from_name(j.at("method").get<std::string>());
  s.unscorable = j.at("unscorable").get<bool>();
  s.score = s.unscorable ? std::numeric_limits<double>::infinity()
                         : j.at("score").get<double>();
  if (s.unscorable) s.unscorable_reason = j.value("reason", "");
  s.seed = j.at("seed").get<std::uint64_t>();
  s.evaluations = j.at("evaluations").get<long>();
  s.restarts = j.value("restarts", 0);
  s.converged = j.value("converged", true);
  s.coplanar = j.value("coplanar", false);
  if (j.contains("params")) {
    const auto& p = j.at("params");
    s.params = CameraParams{p.at(0), p.at(1), p.at(2), p.at(3), p.at(4), p.at(5), p.at(6)};
    s.has_params = true;
  }
  return s;
}

}  // namespace dentalreg
