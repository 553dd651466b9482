// planeline: command-line driver for the plane-assisted line mapping pipeline.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "planeline/config.hpp"
#include "planeline/error.hpp"
#include "planeline/finalize.hpp"
#include "planeline/io.hpp"
#include "planeline/metrics.hpp"
#include "planeline/optim.hpp"
#include "planeline/parallel.hpp"
#include "planeline/synth.hpp"

namespace pl = planeline;

namespace {

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

pl::PipelineConfig load(const Common& common) {
  pl::PipelineConfig config;
  if (!common.config_path.empty()) config = pl::load_config(common.config_path);
  if (common.seed_given) config.optim.seed = common.seed;
  return config;
}

struct SynthArgs {
  std::string out;
  std::vector<double> dims{1.0, 1.0, 1.0};
  int cams = 8;
  int width = 64;
  int height = 64;
  pl::DegradationSpec degradation;
  double gt_spacing = 0.005;
};

void run_synth(const SynthArgs& a, const Common& common) {
  if (a.dims.size() != 3) throw pl::Error(pl::ErrorCode::kBadDims, "--dims takes three values");
  pl::SceneOptions options;
  options.width = a.width;
  options.height = a.height;
  const auto scene = pl::make_box_scene(pl::Vec3(a.dims[0], a.dims[1], a.dims[2]), a.cams, options);
  pl::DegradationSpec spec = a.degradation;
  spec.seed = common.seed;
  std::vector<std::vector<int>> labels;
  const auto views = pl::make_views(scene, spec, &labels);
  pl::write_scene(a.out, views);
  for (std::size_t v = 0; v < views.size(); ++v) {
    std::string text;
    for (int l : labels[v]) text += std::to_string(l) + '\n';
    std::ofstream(pl::view_file(a.out, views[v].id, "labels")) << text;
  }
  pl::write_segments3d(std::filesystem::path(a.out) / "gt_lines.txt", scene.gt_lines);
  pl::write_points(std::filesystem::path(a.out) / "gt_points.txt",
                   pl::densify_lines(scene.gt_lines, a.gt_spacing));
  std::cout << "wrote " << views.size() << " views to " << a.out << '\n';
}

struct OptimizeArgs {
  std::string scene;
  std::string out = "planes.txt";
  std::string log = "loss.csv";
  int epochs = -1;
};

void run_optimize(const OptimizeArgs& a, const Common& common) {
  auto config = load(common);
  if (a.epochs >= 0) config.optim.epochs = a.epochs;
  const auto views = pl::load_scene(a.scene);
  const auto start = std::chrono::steady_clock::now();
  const auto result = pl::optimize_scene(views, config.optim, [](const pl::EpochLog& e) {
    std::clog << "epoch " << e.epoch << " lambda " << e.lambda << " total " << e.total
              << " planes " << e.planes << '\n';
  });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  pl::write_planes(a.out, result.planes);
  pl::write_loss_log(a.log, result.history);
  std::cout << "optimized " << result.planes.size() << " planes in " << seconds
            << " s; render loss " << result.initial_render << " -> " << result.final_render
            << '\n';
}

struct ExtractArgs {
  std::string scene;
  std::string planes = "planes.txt";
  std::string out = "lines.txt";
};

void run_extract(const ExtractArgs& a, const Common& common) {
  const auto config = load(common);
  const auto views = pl::load_scene(a.scene);
  const auto planes = pl::read_planes(a.planes);
  auto map = pl::extract_line_map(planes, views, config.thresholds, config.optim.weight_filter);
  pl::build_tracks(map, views, config.thresholds);
  pl::write_line_map(a.out, map);
  std::cout << "extracted " << map.lines.size() << " lines\n";
}

struct MergeArgs {
  std::string in = "lines.txt";
  std::string out = "merged.txt";
  std::string mode = "global";
  std::string scene;
};

void run_merge(const MergeArgs& a, const Common& common) {
  const auto config = load(common);
  const auto map = pl::read_line_map(a.in);
  auto merged = a.mode == "local" ? pl::local_merge(map)
                                  : pl::global_merge(map, config.thresholds.dbscan_eps);
  if (!a.scene.empty()) pl::build_tracks(merged, pl::load_scene(a.scene), config.thresholds);
  pl::write_line_map(a.out, merged);
  std::cout << "merged " << map.lines.size() << " -> " << merged.lines.size() << " lines\n";
}

struct EvalArgs {
  std::string lines = "merged.txt";
  std::string gt_points;
  std::string gt_lines;
  double gt_spacing = 0.005;
  double tau = 0.05;
  std::vector<double> m2_taus{0.005, 0.01, 0.05};
  bool brute_force = false;
  std::string out = "report.txt";
};

void run_eval(const EvalArgs& a, const Common&) {
  const auto map = pl::read_line_map(a.lines);
  pl::GroundTruth gt;
  if (!a.gt_points.empty()) {
    gt.points = pl::read_points(a.gt_points);
  } else if (!a.gt_lines.empty()) {
    gt.points = pl::densify_lines(pl::read_segments3d(a.gt_lines), a.gt_spacing);
  } else {
    throw pl::Error(pl::ErrorCode::kBadArgument, "eval needs --gt-points or --gt-lines");
  }
  const auto m1 = pl::m1_metrics(map.lines, gt, a.tau, !a.brute_force);
  const auto m2 = pl::m2_metrics(map.lines, gt, a.m2_taus, !a.brute_force);
  pl::Report report;
  report.emplace_back("tau", a.tau);
  report.emplace_back("lines", m1.line_count);
  auto block = [&](const std::string& suffix, const pl::M1Block& b) {
    report.emplace_back("ACC-" + suffix, b.acc);
    report.emplace_back("COMP-" + suffix, b.comp);
    report.emplace_back("PREC-" + suffix, b.prec);
    report.emplace_back("RECALL-" + suffix, b.recall);
    report.emplace_back("F1-" + suffix, b.f1);
  };
  block("J", m1.junction);
  block("L", m1.line);
  for (const auto& e : m2.entries) {
    const std::string t = pl::format_double(e.tau);
    report.emplace_back("R@" + t, e.length_recall);
    report.emplace_back("P@" + t, e.inlier_percent);
  }
  report.emplace_back("supports-images", m2.avg_image_supports);
  report.emplace_back("supports-lines", m2.avg_line_supports);
  pl::write_report(a.out, report);
  for (const auto& [k, v] : report) std::cout << k << ' ' << pl::format_double(v) << '\n';
}

struct ExportArgs {
  std::string lines;
  std::string planes;
  std::string out = "export.obj";
};

void run_export(const ExportArgs& a, const Common&) {
  if (!a.lines.empty()) {
    pl::export_lines_obj(a.out, pl::read_line_map(a.lines).lines);
  } else if (!a.planes.empty()) {
    pl::export_planes_obj(a.out, pl::read_planes(a.planes));
  } else {
    throw pl::Error(pl::ErrorCode::kBadArgument, "export needs --lines or --planes");
  }
  std::cout << "wrote " << a.out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plane-assisted 3D line mapping"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "key=value configuration file");
  auto* seed_opt = app.add_option("--seed", common.seed, "seed for every random choice");
  app.add_option("--threads", common.threads, "worker thread cap")->check(CLI::PositiveNumber);

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "write a synthetic box scene");
  cmd_synth->add_option("--out", synth.out, "scene directory")->required();
  cmd_synth->add_option("--dims", synth.dims, "box size")->expected(3);
  cmd_synth->add_option("--cams", synth.cams, "camera count");
  cmd_synth->add_option("--width", synth.width, "image width");
  cmd_synth->add_option("--height", synth.height, "image height");
  cmd_synth->add_option("--jitter", synth.degradation.jitter_sigma, "endpoint jitter sigma (px)");
  cmd_synth->add_option("--fragment-prob", synth.degradation.fragment_prob);
  cmd_synth->add_option("--fragment-count", synth.degradation.fragment_count);
  cmd_synth->add_option("--dropout", synth.degradation.dropout_prob);
  cmd_synth->add_option("--spurious", synth.degradation.spurious_rate,
                        "spurious detections per true detection");
  cmd_synth->add_option("--depth-noise", synth.degradation.depth_noise, "depth noise sigma");
  cmd_synth->add_option("--gt-spacing", synth.gt_spacing, "GT point spacing along edges");

  OptimizeArgs optimize;
  auto* cmd_opt = app.add_subcommand("optimize", "fit planar primitives to a scene");
  cmd_opt->add_option("--scene", optimize.scene)->required();
  cmd_opt->add_option("--out", optimize.out);
  cmd_opt->add_option("--log", optimize.log);
  cmd_opt->add_option("--epochs", optimize.epochs, "overrides the configured epoch count");

  ExtractArgs extract;
  auto* cmd_extract = app.add_subcommand("extract", "extract a 3D line map with tracks");
  cmd_extract->add_option("--scene", extract.scene)->required();
  cmd_extract->add_option("--planes", extract.planes);
  cmd_extract->add_option("--out", extract.out);

  MergeArgs merge;
  auto* cmd_merge = app.add_subcommand("merge", "merge duplicate 3D lines");
  cmd_merge->add_option("--in", merge.in);
  cmd_merge->add_option("--out", merge.out);
  cmd_merge->add_option("--mode", merge.mode)->check(CLI::IsMember({"local", "global"}));
  cmd_merge->add_option("--scene", merge.scene, "rebuild tracks against this scene");

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand("eval", "score a line map against ground truth");
  cmd_eval->add_option("--lines", eval.lines);
  cmd_eval->add_option("--gt-points", eval.gt_points);
  cmd_eval->add_option("--gt-lines", eval.gt_lines);
  cmd_eval->add_option("--gt-spacing", eval.gt_spacing);
  cmd_eval->add_option("--tau", eval.tau);
  cmd_eval->add_option("--m2-taus", eval.m2_taus);
  cmd_eval->add_flag("--brute-force", eval.brute_force, "skip the spatial index");
  cmd_eval->add_option("--out", eval.out);

  ExportArgs exp;
  auto* cmd_export = app.add_subcommand("export", "write OBJ-style geometry");
  cmd_export->add_option("--lines", exp.lines);
  cmd_export->add_option("--planes", exp.planes);
  cmd_export->add_option("--out", exp.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: E_BAD_ARGUMENT: " << e.what() << '\n';
    return static_cast<int>(pl::ExitCategory::kValidation);
  }
  common.seed_given = seed_opt->count() > 0;
  pl::set_thread_count(common.threads);

  try {
    if (*cmd_synth) run_synth(synth, common);
    if (*cmd_opt) run_optimize(optimize, common);
    if (*cmd_extract) run_extract(extract, common);
    if (*cmd_merge) run_merge(merge, common);
    if (*cmd_eval) run_eval(eval, common);
    if (*cmd_export) run_export(exp, common);
  } catch (const pl::Error& e) {
    std::cerr << "error: " << pl::error_code_name(e.code()) << ": " << e.what() << '\n';
    return static_cast<int>(pl::exit_category(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "error: E_NUMERICAL: " << e.what() << '\n';
    return static_cast<int>(pl::ExitCategory::kNumerical);
  }
  return 0;
}
