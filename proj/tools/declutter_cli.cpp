// Command-line front end: batch experiments, calibration, sweeps, and map
// rendering. Exit codes: 0 ok, 2 configuration error, 3 runtime error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "declutter/clutter.hpp"
#include "declutter/errors.hpp"
#include "declutter/experiment.hpp"
#include "declutter/push.hpp"
#include "declutter/serialization.hpp"

namespace fs = std::filesystem;
using namespace declutter;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("DECLUTTER_SEED: not a seed list: " + text);
    }
  }
  if (out.empty()) throw ConfigError("DECLUTTER_SEED is empty");
  return out;
}

exp::ExperimentConfig load_config(const std::string& path) {
  nlohmann::json j = nlohmann::json::object();
  if (!path.empty()) {
    try {
      j = nlohmann::json::parse(io::read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  exp::ExperimentConfig cfg = io::config_from_json(j);
  if (const char* env = std::getenv("DECLUTTER_SEED")) cfg.seeds = parse_seed_list(env);
  if (!j.contains("k_model")) cfg.episode.k_model = exp::default_k_fit(cfg).model;
  return cfg;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    io::write_text(out, text);
  }
}

void print_report(const exp::MetricsReport& r) {
  std::cout << "attempts=" << r.attempts << " pushes=" << r.pushes << " GS=" << r.gs << " MPC=" << r.mpc
            << " GS_wm=" << r.gs_wm << " MPPH=" << r.mpph << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disperse-and-pick planning and desk-scale grasping experiments"};
  app.require_subcommand(1);

  std::string config_path, out;

  auto* run = app.add_subcommand("run-batch", "Run a batch experiment and write logs/report");
  run->add_option("--config", config_path, "Experiment configuration (JSON)");
  run->add_option("--out", out, "Output directory")->required();
  std::string variant_override;
  run->add_option("--variant", variant_override, "Override the configured variant");

  auto* cal = app.add_subcommand("calibrate", "Calibrate the global/local clutter thresholds");
  int n_seeds = 50;
  double pct_lo = 25.0, pct_hi = 75.0;
  cal->add_option("--seeds", n_seeds, "Number of calibration seeds (>= 20)");
  cal->add_option("--config", config_path);
  cal->add_option("--percentile-lo", pct_lo);
  cal->add_option("--percentile-hi", pct_hi);
  cal->add_option("--out", out, "Write the config fragment here instead of stdout");

  auto* sweep = app.add_subcommand("sweep-gdi", "GS heat map over LCT x HCT");
  std::vector<double> lcts{2, 5, 9, 13, 17, 19}, hcts{0.0, 0.01, 0.02, 0.03, 0.05, 0.07};
  int per_cell = 200;
  sweep->add_option("--lct", lcts, "LCT values (px)")->delimiter(',');
  sweep->add_option("--hct", hcts, "HCT values (m)")->delimiter(',');
  sweep->add_option("--attempts", per_cell, "Grasp attempts per cell");
  sweep->add_option("--config", config_path);
  sweep->add_option("--out", out, "CSV output path");

  auto* abl = app.add_subcommand("ablate-k", "Naive / exact / estimated cluster counts");
  std::vector<int> ks{5, 10, 15, 20};
  int per_variant = 1000;
  abl->add_option("--k", ks, "Fixed k values")->delimiter(',');
  abl->add_option("--trials", per_variant, "Grasp attempts per variant");
  abl->add_option("--config", config_path);
  abl->add_option("--out", out, "CSV output path");

  auto* ana = app.add_subcommand("analyze-clutter", "Per-bin clutter, MPC and GS for disperse vs grasp-only");
  std::string disperse_logs, grasp_logs;
  int ana_trials = 2000;
  ana->add_option("--disperse", disperse_logs, "logs.jsonl of a disperse_grasp batch");
  ana->add_option("--grasp-only", grasp_logs, "logs.jsonl of a grasp_optim_adaptive batch");
  ana->add_option("--trials", ana_trials, "Attempts per variant when logs are not given");
  ana->add_option("--config", config_path);
  ana->add_option("--out", out, "CSV output path");

  auto* maps = app.add_subcommand("render-maps", "Render RGB, depth, clutter map and distance field");
  std::string scene_path;
  maps->add_option("--scene", scene_path, "Scene JSON")->required();
  maps->add_option("--config", config_path);
  std::string maps_out = ".";
  maps->add_option("--out", maps_out, "Output directory");

  auto* spawn = app.add_subcommand("spawn", "Write a random heap as scene JSON");
  std::uint64_t spawn_seed = 7;
  int spawn_n = 20;
  spawn->add_option("--seed", spawn_seed);
  spawn->add_option("--n", spawn_n);
  spawn->add_option("--config", config_path);
  spawn->add_option("--out", out, "Scene JSON path (stdout if omitted)");

  auto* fitk = app.add_subcommand("fit-k", "Fit the object-count model on simulated heaps");
  int k_scenes = exp::kDefaultKTrainingScenes;
  std::uint64_t k_seed = exp::kDefaultKTrainingSeed;
  fitk->add_option("--scenes", k_scenes);
  fitk->add_option("--seed", k_seed);
  fitk->add_option("--config", config_path);
  fitk->add_option("--out", out, "KModel JSON path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) {
      exp::ExperimentConfig cfg = load_config(config_path);
      if (!variant_override.empty()) {
        const auto v = exp::variant_from_string(variant_override);
        if (!v) throw ConfigError("unknown variant " + variant_override);
        cfg.variant = *v;
        exp::apply_variant(cfg.episode, cfg.variant);
      }
      const exp::BatchResult res = exp::run_batch(cfg);
      exp::write_batch(out, res);
      for (const auto& e : res.errors) std::cerr << "warning: " << e << "\n";
      print_report(res.report);
    } else if (*cal) {
      const exp::ExperimentConfig cfg = load_config(config_path);
      std::vector<std::uint64_t> seeds;
      for (int i = 0; i < n_seeds; ++i) seeds.push_back(exp::episode_seed(cfg.seeds, static_cast<std::size_t>(i)));
      const exp::Calibration c = exp::calibrate_thresholds(cfg, seeds, pct_lo, pct_hi);
      const nlohmann::json frag{{"thresholds", {{"t_global", c.t_global}, {"t_local", c.t_local}}}};
      emit(out, frag.dump(2) + "\n");
    } else if (*sweep) {
      const exp::ExperimentConfig cfg = load_config(config_path);
      emit(out, exp::gdi_sweep_csv(exp::sweep_gdi(cfg, lcts, hcts, per_cell)));
    } else if (*abl) {
      const exp::ExperimentConfig cfg = load_config(config_path);
      emit(out, exp::k_ablation_csv(exp::ablate_k(cfg, ks, per_variant)));
    } else if (*ana) {
      std::vector<policy::EpisodeLog> d, g;
      if (!disperse_logs.empty() && !grasp_logs.empty()) {
        d = io::episodes_from_jsonl(io::read_text(disperse_logs));
        g = io::episodes_from_jsonl(io::read_text(grasp_logs));
      } else {
        exp::ExperimentConfig cfg = load_config(config_path);
        cfg.trials = ana_trials;
        exp::apply_variant(cfg.episode, exp::Variant::disperse_grasp);
        d = exp::run_batch(cfg).logs;
        exp::apply_variant(cfg.episode, exp::Variant::grasp_optim_adaptive);
        g = exp::run_batch(cfg).logs;
      }
      emit(out, exp::clutter_effect_csv(exp::analyze_clutter_effect(d, g)));
    } else if (*maps) {
      const exp::ExperimentConfig cfg = load_config(config_path);
      const sim::Scene scene = io::scene_from_json(nlohmann::json::parse(io::read_text(scene_path)));
      const auto& cam = cfg.episode.camera;
      const sim::RenderedView view = sim::render(scene, cam, cfg.episode.render);
      const clutter::ClutterMap map = clutter::compute_clutter_map(view.rgb, cfg.episode.fcm);
      const BinaryMask mask =
          grasp::depth_filter(view.depth, sim::background(scene, cam), cfg.episode.depth_delta);
      const push::DistanceField field = push::distance_transform(mask);
      const fs::path dir(maps_out);
      fs::create_directories(dir);
      write_ppm8(dir / "rgb.ppm", view.rgb);
      io::write_depth_pgm(dir / "depth.pgm", view.depth);
      io::write_scaled_field(dir / "clutter.pgm", map.values, clutter::global_score(map));
      io::write_scaled_field(dir / "distance.pgm", field.values, 0.0);
      const Pixel fp = push::freest_point(field);
      std::cout << "global_score=" << clutter::global_score(map) << " freest_point=" << fp.x << "," << fp.y
                << "\n";
    } else if (*spawn) {
      const exp::ExperimentConfig cfg = load_config(config_path);
      const sim::Scene s = sim::spawn_heap(spawn_seed, spawn_n, sim::default_catalog(), cfg.heap);
      emit(out, io::to_json(s).dump(2) + "\n");
    } else if (*fitk) {
      const exp::ExperimentConfig cfg = load_config(config_path);
      const exp::KFit fit = exp::fit_k_with_holdout(exp::k_training_set(cfg, k_scenes, k_seed));
      std::cerr << "holdout MAE = " << fit.holdout_mae << "\n";
      emit(out, io::to_json(fit.model).dump(2) + "\n");
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
