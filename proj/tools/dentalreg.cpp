// dentalreg: 3D dental mesh to 2D photograph registration toolkit.
//
// Subcommands: synth (generate a ground-truth cohort), compare (score every
// AM photograph against every PM scan), report (rankings, CMC, LR, Cllr),
// overlay (composite of the two silhouettes), lr (likelihood-ratio layer
// alone). Exit codes: 0 success, 1 usage or bad configuration, 2 data error,
// 3 internal error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>

#include "dentalreg/config.hpp"
#include "dentalreg/ident.hpp"
#include "dentalreg/reports.hpp"
#include "dentalreg/scores_io.hpp"
#include "dentalreg/synth.hpp"

namespace fs = std::filesystem;
using namespace dentalreg;

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = -1;
};

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = load_run_config(args.config_path);
  if (args.seed_set) cfg.base_seed = args.seed;
  if (args.workers >= 0) cfg.workers = args.workers;
  return cfg;
}

int run_synth(const std::string& out_dir, int count_a, int count_b, int count_c,
              std::uint64_t seed, double perturbation, int image_width,
              int image_height, bool force) {
  CohortSpec spec;
  spec.count_a = count_a;
  spec.count_b = count_b;
  spec.count_c = count_c;
  spec.seed = seed;
  spec.perturbation = perturbation;
  spec.render.image_width = image_width;
  spec.render.image_height = image_height;
  write_cohort(spec, out_dir, force);
  std::cout << (fs::path(out_dir) / "manifest.json").string() << "\n";
  return 0;
}

std::unordered_map<std::string, ComparisonScore> load_checkpoint(const fs::path& path) {
  std::unordered_map<std::string, ComparisonScore> cells;
  std::ifstream in(path);
  if (!in) return cells;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const ComparisonScore s = score_from_json(nlohmann::json::parse(line));
      cells[s.am_id + "\x1f" + s.pm_id] = s;
    } catch (const std::exception&) {
      break;  // truncated tail after an interrupt; recompute from here
    }
  }
  return cells;
}

int run_compare(const CommonArgs& common, const std::string& manifest_path,
                const std::string& method_name_arg, const std::string& out_dir) {
  const RunConfig cfg = resolve_config(common);
  const Method method = method_from_name(method_name_arg);
  const CaseManifest manifest = load_manifest(manifest_path);
  fs::create_directories(out_dir);

  const fs::path checkpoint_path = fs::path(out_dir) / "checkpoint.jsonl";
  const auto precomputed = load_checkpoint(checkpoint_path);
  std::ofstream checkpoint(checkpoint_path, std::ios::app);
  long new_cells = 0;
  auto on_cell = [&](const ComparisonScore& s) {
    checkpoint << score_to_json(s).dump() << "\n";
    if (++new_cells % 100 == 0) checkpoint.flush();
  };

  CohortConfig cohort = cohort_config(cfg, method);
  const CohortResult result = run_cohort(manifest, cohort, &precomputed, on_cell);
  checkpoint.flush();

  write_scores_csv(result.scores, fs::path(out_dir) / "scores.csv");
  write_params_csv(result.scores, fs::path(out_dir) / "params.csv");

  nlohmann::json run_meta{{"method", method_name_arg},
                          {"manifest", fs::absolute(manifest_path).string()},
                          {"seed", cfg.base_seed},
                          {"n_am", result.am_ids.size()},
                          {"n_pm", result.pm_ids.size()},
                          {"cells", result.scores.size()},
                          {"reused_cells", result.scores.size() - new_cells}};
  std::ofstream meta(fs::path(out_dir) / "run.json");
  meta << run_meta.dump(2) << "\n";

  std::cout << "scored " << result.scores.size() << " comparisons ("
            << new_cells << " new) -> " << (fs::path(out_dir) / "scores.csv").string()
            << "\n";
  return 0;
}

std::vector<LREntry> label_scores(const std::vector<ComparisonScore>& scores,
                                  const CaseManifest& manifest) {
  std::vector<LREntry> entries;
  for (const auto& s : scores) {
    if (s.unscorable) continue;
    const auto it = manifest.truth.find(s.am_id);
    if (it == manifest.truth.end())
      throw ManifestError("no truth pairing for AM case '" + s.am_id + "'");
    LREntry e;
    e.am_id = s.am_id;
    e.pm_id = s.pm_id;
    e.score = s.score;
    e.is_match = it->second == s.pm_id;
    entries.push_back(e);
  }
  return entries;
}

/// Drops AM rows with missing cells; MissingScores when allow_partial is off.
std::vector<ComparisonScore> complete_rows(const std::vector<ComparisonScore>& scores,
                                           bool allow_partial) {
  std::vector<std::string> pm_ids;
  std::unordered_map<std::string, std::size_t> row_count;
  std::vector<std::string> am_order;
  for (const auto& s : scores) {
    if (std::find(pm_ids.begin(), pm_ids.end(), s.pm_id) == pm_ids.end())
      pm_ids.push_back(s.pm_id);
    if (row_count.find(s.am_id) == row_count.end()) am_order.push_back(s.am_id);
    row_count[s.am_id] += 1;
  }
  std::vector<ComparisonScore> kept;
  for (const auto& s : scores) {
    if (row_count[s.am_id] == pm_ids.size()) {
      kept.push_back(s);
      continue;
    }
    if (!allow_partial)
      throw MissingScores("AM '" + s.am_id + "' has " +
                          std::to_string(row_count[s.am_id]) + " of " +
                          std::to_string(pm_ids.size()) +
                          " cells; rerun compare or pass --allow-partial");
  }
  return kept;
}

int run_report(const std::string& scores_path, const std::string& manifest_path,
               const std::string& out_dir, bool allow_partial, bool leave_one_out) {
  const CaseManifest manifest = load_manifest(manifest_path);
  const auto scores = complete_rows(read_scores_csv(scores_path), allow_partial);
  if (scores.empty()) throw MissingScores("no complete AM rows in " + scores_path);
  fs::create_directories(out_dir);

  const RankingReport report =
      build_report(scores, {manifest.truth.begin(), manifest.truth.end()});
  LROptions lr_options;
  lr_options.leave_one_out = leave_one_out;
  const LRReport lr = fit_and_report(label_scores(scores, manifest), lr_options);

  const Method method = scores.front().method;
  write_report_json(report, method, lr.cllr_value, fs::path(out_dir) / "report.json");
  write_statistics_csv(report.stats, fs::path(out_dir) / "statistics.csv");
  write_cmc_csv(report.cmc, fs::path(out_dir) / "cmc.csv");
  render_cmc_png(report.cmc, fs::path(out_dir) / "cmc.png");
  write_lr_table_csv(lr.entries, fs::path(out_dir) / "lr_table.csv");
  write_density_csv(lr.curves, fs::path(out_dir) / "density.csv");
  render_density_png(lr.curves, fs::path(out_dir) / "density.png");

  std::cout << "cases " << report.positions.size() << "  avg " << report.stats.avg
            << "  max " << report.stats.max << "  cllr " << lr.cllr_value << "\n";
  return 0;
}

int run_lr_cmd(const std::string& scores_path, const std::string& manifest_path,
               const std::string& out_dir, bool leave_one_out, double bw_h0,
               double bw_h1) {
  const CaseManifest manifest = load_manifest(manifest_path);
  const auto scores = read_scores_csv(scores_path);
  fs::create_directories(out_dir);
  LROptions options;
  options.leave_one_out = leave_one_out;
  options.bandwidth_h0 = bw_h0;
  options.bandwidth_h1 = bw_h1;
  const LRReport lr = fit_and_report(label_scores(scores, manifest), options);
  write_lr_table_csv(lr.entries, fs::path(out_dir) / "lr_table.csv");
  write_density_csv(lr.curves, fs::path(out_dir) / "density.csv");
  render_density_png(lr.curves, fs::path(out_dir) / "density.png");
  nlohmann::json j{{"cllr", lr.cllr_value},
                   {"bandwidth_h0", lr.model.bandwidth_h0},
                   {"bandwidth_h1", lr.model.bandwidth_h1},
                   {"n_match", lr.model.h0_scores.size()},
                   {"n_nonmatch", lr.model.h1_scores.size()},
                   {"leave_one_out", leave_one_out}};
  std::ofstream out(fs::path(out_dir) / "cllr.json");
  out << j.dump(2) << "\n";
  std::cout << "cllr " << lr.cllr_value << "\n";
  return 0;
}

int run_overlay(const std::string& am_id, const std::string& pm_id,
                const std::string& params_path, const std::string& manifest_path,
                const std::string& out_file) {
  const CaseManifest manifest = load_manifest(manifest_path);

  std::ifstream in(params_path);
  if (!in) throw IoError("cannot open " + params_path);
  std::string line;
  std::getline(in, line);  // header
  std::optional<CameraParams> params;
  while (std::getline(in, line)) {
    const auto f = split_csv_line(line);
    if (f.size() < 12 || f[0] != am_id || f[1] != pm_id) continue;
    if (f[4] == "1" || f[5].empty())
      throw MissingParams("comparison (" + am_id + ", " + pm_id +
                          ") is unscorable; no stored parameters");
    params = CameraParams{std::stod(f[5]), std::stod(f[6]), std::stod(f[7]),
                          std::stod(f[8]), std::stod(f[9]), std::stod(f[10]),
                          std::stod(f[11])};
    break;
  }
  if (!params)
    throw MissingParams("no stored parameters for (" + am_id + ", " + pm_id + ")");

  const AmCase* am = nullptr;
  for (const auto& a : manifest.am_cases)
    if (a.id == am_id) am = &a;
  const PmCase* pm = manifest.find_pm(pm_id);
  if (!am || !pm) throw ManifestError("case pair not present in the manifest");
  if (am->segmentation.empty())
    throw ManifestError("AM case '" + am_id + "' has no segmentation to overlay");

  const SegmentationImage seg = load_segmentation(am->segmentation);
  const DentalMesh mesh = load_mesh(pm->mesh);
  const IntrinsicConventions ic = IntrinsicConventions::for_image(seg.width, seg.height);
  const SilhouetteImage silhouette = rasterize_silhouette(mesh, *params, ic);
  write_png_rgb(render_overlay(seg.roi, silhouette), out_file);
  std::cout << out_file << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D dental mesh to 2D photograph registration toolkit"};
  app.require_subcommand(1);

  CommonArgs common;

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic ground-truth cohort");
  std::string synth_out;
  int count_a = 0, count_b = 0, count_c = 0;
  std::uint64_t synth_seed = 1;
  double perturbation = 1.0;
  int image_width = 320, image_height = 240;
  bool force = false;
  synth->add_option("--out", synth_out, "output cohort directory")->required();
  synth->add_option("--count-a", count_a, "cases with no occlusion");
  synth->add_option("--count-b", count_b, "cases with partial occlusion");
  synth->add_option("--count-c", count_c, "cases with heavy occlusion");
  synth->add_option("--seed", synth_seed, "cohort seed");
  synth->add_option("--perturbation", perturbation, "individualization scale");
  synth->add_option("--image-width", image_width, "photograph width, px");
  synth->add_option("--image-height", image_height, "photograph height, px");
  synth->add_flag("--force", force, "overwrite an existing cohort");

  // compare
  auto* compare = app.add_subcommand("compare", "score every AM against every PM");
  std::string manifest_path, method_name_arg, compare_out;
  compare->add_option("--manifest", manifest_path, "case manifest JSON")->required();
  compare->add_option("--method", method_name_arg, "landmarks-set{1,2,3} or regions")
      ->required();
  compare->add_option("--out", compare_out, "output directory")->required();
  compare->add_option("--config", common.config_path, "run configuration JSON");
  compare->add_option("--workers", common.workers, "worker budget (0 = all cores)");
  auto* seed_opt = compare->add_option("--seed", common.seed, "base seed");

  // report
  auto* report = app.add_subcommand("report", "rankings, CMC, LR and Cllr");
  std::string scores_path, report_manifest, report_out;
  bool allow_partial = false, leave_one_out = false;
  report->add_option("--scores", scores_path, "scores.csv from compare")->required();
  report->add_option("--manifest", report_manifest, "case manifest JSON")->required();
  report->add_option("--out", report_out, "output directory")->required();
  report->add_flag("--allow-partial", allow_partial, "skip incomplete AM rows");
  report->add_flag("--loo", leave_one_out, "leave-one-out LR evaluation");

  // overlay
  auto* overlay = app.add_subcommand("overlay", "composite silhouette image");
  std::string ov_am, ov_pm, ov_params, ov_manifest, ov_out;
  overlay->add_option("am_id", ov_am, "AM case id")->required();
  overlay->add_option("pm_id", ov_pm, "PM case id")->required();
  overlay->add_option("--params", ov_params, "params.csv from compare")->required();
  overlay->add_option("--manifest", ov_manifest, "case manifest JSON")->required();
  overlay->add_option("--out", ov_out, "output PNG path")->required();

  // lr
  auto* lr_cmd = app.add_subcommand("lr", "likelihood-ratio layer alone");
  std::string lr_scores, lr_manifest, lr_out;
  bool lr_loo = false;
  double bw_h0 = 0.0, bw_h1 = 0.0;
  lr_cmd->add_option("--scores", lr_scores, "scores.csv from compare")->required();
  lr_cmd->add_option("--manifest", lr_manifest, "case manifest JSON")->required();
  lr_cmd->add_option("--out", lr_out, "output directory")->required();
  lr_cmd->add_flag("--loo", lr_loo, "leave-one-out LR evaluation");
  lr_cmd->add_option("--bandwidth-h0", bw_h0, "match-population bandwidth override");
  lr_cmd->add_option("--bandwidth-h1", bw_h1, "non-match-population bandwidth override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems exit 1, --help exits 0
  }
  common.seed_set = seed_opt->count() > 0;

  try {
    if (synth->parsed())
      return run_synth(synth_out, count_a, count_b, count_c, synth_seed, perturbation,
                       image_width, image_height, force);
    if (compare->parsed())
      return run_compare(common, manifest_path, method_name_arg, compare_out);
    if (report->parsed())
      return run_report(scores_path, report_manifest, report_out, allow_partial,
                        leave_one_out);
    if (overlay->parsed())
      return run_overlay(ov_am, ov_pm, ov_params, ov_manifest, ov_out);
    if (lr_cmd->parsed())
      return run_lr_cmd(lr_scores, lr_manifest, lr_out, lr_loo, bw_h0, bw_h1);
  } catch (const InvalidConfig& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
