#include "declutter/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "declutter/errors.hpp"
#include "declutter/rng.hpp"
#include "declutter/serialization.hpp"

namespace declutter::exp {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::baseline: return "baseline";
    case Variant::grasp_optim: return "grasp_optim";
    case Variant::grasp_optim_adaptive: return "grasp_optim_adaptive";
    case Variant::disperse_grasp: return "disperse_grasp";
  }
  return "";
}

std::optional<Variant> variant_from_string(const std::string& s) {
  for (const Variant v :
       {Variant::baseline, Variant::grasp_optim, Variant::grasp_optim_adaptive, Variant::disperse_grasp})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

void apply_variant(policy::EpisodeConfig& cfg, Variant v) {
  grasp::GdiParams optimized;
  optimized.lct = kOptimizedLct;
  optimized.hct = kOptimizedHct;
  switch (v) {
    case Variant::baseline:
      cfg.k_mode = policy::KMode::fixed;
      cfg.k_fixed = 10;
      cfg.gdi.lct = 4.0;
      cfg.gdi.hct = 0.005;
      cfg.use_clutter_policy = false;
      break;
    case Variant::grasp_optim:
      cfg.k_mode = policy::KMode::fixed;
      cfg.k_fixed = 10;
      cfg.gdi.lct = optimized.lct;
      cfg.gdi.hct = optimized.hct;
      cfg.use_clutter_policy = false;
      break;
    case Variant::grasp_optim_adaptive:
      cfg.k_mode = policy::KMode::estimate;
      cfg.gdi.lct = optimized.lct;
      cfg.gdi.hct = optimized.hct;
      cfg.use_clutter_policy = false;
      break;
    case Variant::disperse_grasp:
      cfg.k_mode = policy::KMode::estimate;
      cfg.gdi.lct = optimized.lct;
      cfg.gdi.hct = optimized.hct;
      cfg.use_clutter_policy = true;
      break;
  }
}

std::uint64_t episode_seed(const std::vector<std::uint64_t>& seeds, std::size_t i) {
  if (i < seeds.size()) return seeds[i];
  return mix_seed(seeds.empty() ? 1 : seeds.front(), i);
}

namespace {

int bin_index(int objects) {
  for (int b = 0; b < 4; ++b)
    if (objects >= kBinEdges[b][0] && objects <= kBinEdges[b][1]) return b;
  return -1;
}

struct BinAcc {
  int attempts = 0;
  int successes = 0;
  int multi = 0;
  double local_sum = 0.0;
};

std::vector<BinRow> bin_rows(const std::vector<policy::EpisodeLog>& logs) {
  BinAcc acc[4];
  for (const auto& log : logs)
    for (const auto& r : log.records) {
      if (r.action != policy::ActionKind::grasp) continue;
      const int b = bin_index(r.objects_before);
      if (b < 0) continue;
      ++acc[b].attempts;
      acc[b].successes += r.grasp_success;
      acc[b].multi += r.multi_pick;
      acc[b].local_sum += r.local_score_of_target;
    }
  std::vector<BinRow> rows;
  for (int b = 0; b < 4; ++b) {
    if (acc[b].attempts == 0) continue;
    const double n = acc[b].attempts;
    rows.push_back({kBinEdges[b][0], kBinEdges[b][1], acc[b].attempts, acc[b].local_sum / n,
                    100.0 * acc[b].multi / n, 100.0 * acc[b].successes / n});
  }
  return rows;
}

}  // namespace

MetricsReport compute_metrics(const std::vector<policy::EpisodeLog>& logs, const Durations& durations) {
  MetricsReport r;
  int perceptions = 0;
  for (const auto& log : logs)
    for (const auto& rec : log.records) {
      ++perceptions;
      if (rec.action == policy::ActionKind::push) ++r.pushes;
      if (rec.action != policy::ActionKind::grasp) continue;
      ++r.attempts;
      r.successes += rec.grasp_success;
      r.multi_picks += rec.multi_pick;
    }
  if (r.attempts == 0) throw NoAttempts("compute_metrics: no grasp attempts in the logs");
  const double n = r.attempts;
  r.gs = 100.0 * r.successes / n;
  r.mpc = 100.0 * r.multi_picks / n;
  r.gs_wm = 100.0 * (r.successes - r.multi_picks) / n;
  const double seconds =
      r.attempts * durations.t_grasp_s + r.pushes * durations.t_push_s + perceptions * durations.t_perceive_s;
  r.mpph = seconds > 0.0 ? 3600.0 * r.successes / seconds : 0.0;
  r.by_bin = bin_rows(logs);
  return r;
}

BatchResult run_batch(const ExperimentConfig& config) {
  const sim::Catalog catalog = sim::default_catalog();
  BatchResult out;
  int attempts = 0;
  std::size_t next = 0;
  // One episode per thread per wave. Episodes are accepted strictly in index
  // order, so the result does not depend on the thread count.
  const std::size_t wave = static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
  while (attempts < config.trials) {
    std::vector<policy::EpisodeLog> logs(wave);
    std::vector<std::string> errors(wave);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < wave; ++i) {
      const std::uint64_t seed = episode_seed(config.seeds, next + i);
      try {
        const sim::Scene heap = sim::spawn_heap(seed, config.max_objects, catalog, config.heap);
        logs[i] = policy::run_episode(heap, config.episode, seed);
      } catch (const Error& e) {
        errors[i] = "episode seed " + std::to_string(seed) + ": " + e.what();
        logs[i] = {};
        logs[i].seed = seed;
      }
    }
    if (std::all_of(errors.begin(), errors.end(), [](const std::string& e) { return !e.empty(); }))
      throw Error("run_batch: every episode in a wave failed; first: " + errors.front());
    for (std::size_t i = 0; i < wave && attempts < config.trials; ++i) {
      if (!errors[i].empty()) {
        out.errors.push_back(errors[i]);
        continue;
      }
      attempts += logs[i].grasp_attempts();
      out.logs.push_back(std::move(logs[i]));
    }
    next += wave;
  }
  out.report = compute_metrics(out.logs, config.durations);
  return out;
}

void write_batch(const std::string& dir, const BatchResult& result) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  io::write_text(d / "logs.jsonl", io::episodes_to_jsonl(result.logs));
  io::write_text(d / "report.csv", report_csv(result.report));
  nlohmann::json j{{"gs", result.report.gs},         {"mpc", result.report.mpc},
                   {"gs_wm", result.report.gs_wm},   {"mpph", result.report.mpph},
                   {"attempts", result.report.attempts}, {"pushes", result.report.pushes},
                   {"errors", result.errors}};
  io::write_text(d / "report.json", j.dump(2) + "\n");
}

KTrainingSet k_training_set(const ExperimentConfig& config, int n_scenes, std::uint64_t seed) {
  const sim::Catalog catalog = sim::default_catalog();
  KTrainingSet set;
  set.samples.resize(static_cast<std::size_t>(n_scenes));
  const auto& ep = config.episode;
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n_scenes; ++i) {
    const int n = 1 + i % config.max_objects;
    const sim::Scene s = sim::spawn_heap(mix_seed(seed, static_cast<std::uint64_t>(i)), n, catalog, config.heap);
    const sim::RenderedView view = sim::render(s, ep.camera, ep.render);
    const BinaryMask mask = grasp::depth_filter(view.depth, sim::background(s, ep.camera), ep.depth_delta);
    const double g = clutter::global_score(clutter::compute_clutter_map(view.rgb, ep.fcm));
    set.samples[static_cast<std::size_t>(i)] = {grasp::estimate_area_spread(mask), g, double(n)};
  }
  return set;
}

KFit fit_k_with_holdout(const KTrainingSet& set, int k_max) {
  const std::size_t n_train = set.samples.size() * 4 / 5;
  const std::vector<grasp::KSample> train(set.samples.begin(), set.samples.begin() + n_train);
  KFit fit{grasp::fit_k_model(train, k_max), 0.0};
  double err = 0.0;
  std::size_t count = 0;
  for (std::size_t i = n_train; i < set.samples.size(); ++i) {
    const auto& s = set.samples[i];
    err += std::abs(grasp::estimate_k(s.area, s.global_clutter, fit.model) - s.k);
    ++count;
  }
  fit.holdout_mae = count ? err / count : 0.0;
  return fit;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * (values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(values.size() - 1, lo + 1);
  return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

double separating_threshold(const std::vector<double>& low, const std::vector<double>& high, double percentile_lo,
                            double percentile_hi) {
  const double a = percentile(low, percentile_hi);
  const double b = percentile(high, percentile_lo);
  if (!(a < b)) throw Overlap("calibration: score distributions overlap");
  return 0.5 * (a + b);
}

Calibration calibrate_thresholds(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                                 double percentile_lo, double percentile_hi) {
  if (seeds.size() < 20) throw ConfigError("calibrate: need at least 20 seeds");
  const sim::Catalog catalog = sim::default_catalog();
  const auto& ep = config.episode;
  const double opening_px = ep.opening_px();
  const std::size_t n = seeds.size();
  Calibration cal;
  cal.empty_global.resize(n);
  cal.heap_global.resize(n);
  cal.isolated_local.resize(n);
  std::vector<std::vector<double>> crowded(n);

  auto top_local = [&](const sim::Scene& s, std::uint64_t seed, int k, double* global) {
    const sim::RenderedView view = sim::render(s, ep.camera, ep.render);
    const clutter::ClutterMap map = clutter::compute_clutter_map(view.rgb, ep.fcm);
    *global = clutter::global_score(map);
    const BinaryMask mask = grasp::depth_filter(view.depth, sim::background(s, ep.camera), ep.depth_delta);
    grasp::PlanInputs in;
    in.k = k;
    in.gdi = ep.gdi;
    in.opening_px = opening_px;
    in.n_top = ep.thresholds.n_top;
    in.seed = seed;
    std::vector<double> locals;
    for (const GraspPose& p : grasp::plan_grasps_with_k(view.depth, mask, in))
      locals.push_back(clutter::local_score(map, p.center, opening_px));
    return locals;
  };

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < n; ++i) {
    sim::Scene empty;
    empty.workspace = config.heap.workspace;
    empty.table_depth = config.heap.table_depth;
    cal.empty_global[i] =
        clutter::global_score(clutter::compute_clutter_map(sim::render(empty, ep.camera, ep.render).rgb, ep.fcm));

    double g = 0.0;
    const sim::Scene single = sim::spawn_heap(seeds[i], 1, catalog, config.heap);
    const auto iso = top_local(single, seeds[i], 1, &g);
    cal.isolated_local[i] = iso.empty() ? 0.0 : iso.front();

    const sim::Scene heap = sim::spawn_heap(seeds[i], config.max_objects, catalog, config.heap);
    crowded[i] = top_local(heap, seeds[i], config.max_objects, &cal.heap_global[i]);
  }
  for (const auto& c : crowded) cal.crowded_local.insert(cal.crowded_local.end(), c.begin(), c.end());

  cal.t_global = separating_threshold(cal.empty_global, cal.heap_global, percentile_lo, percentile_hi);
  cal.t_local = separating_threshold(cal.isolated_local, cal.crowded_local, percentile_lo, percentile_hi);
  return cal;
}

std::vector<GdiCell> sweep_gdi(const ExperimentConfig& config, const std::vector<double>& lct_values,
                               const std::vector<double>& hct_values, int attempts_per_cell) {
  std::vector<GdiCell> cells;
  for (const double lct : lct_values)
    for (const double hct : hct_values) {
      ExperimentConfig c = config;
      apply_variant(c.episode, Variant::grasp_optim_adaptive);
      c.episode.gdi.lct = lct;
      c.episode.gdi.hct = hct;
      c.trials = attempts_per_cell;
      const BatchResult r = run_batch(c);
      cells.push_back({lct, hct, r.report.gs, r.report.attempts});
    }
  return cells;
}

std::vector<KAblationRow> ablate_k(const ExperimentConfig& config, const std::vector<int>& k_fixed_values,
                                   int trials_per_variant) {
  std::vector<std::pair<std::string, policy::EpisodeConfig>> variants;
  ExperimentConfig base = config;
  apply_variant(base.episode, Variant::grasp_optim_adaptive);
  for (const int k : k_fixed_values) {
    policy::EpisodeConfig e = base.episode;
    e.k_mode = policy::KMode::fixed;
    e.k_fixed = k;
    variants.emplace_back("naive_k" + std::to_string(k), e);
  }
  {
    policy::EpisodeConfig e = base.episode;
    e.k_mode = policy::KMode::exact;
    variants.emplace_back("exact", e);
  }
  variants.emplace_back("estimate", base.episode);

  std::vector<KAblationRow> rows;
  for (const auto& [name, ep] : variants) {
    ExperimentConfig c = base;
    c.episode = ep;
    c.trials = trials_per_variant;
    const BatchResult r = run_batch(c);
    for (const BinRow& b : r.report.by_bin) rows.push_back({name, b.lo, b.hi, b.attempts, b.gs});
  }
  return rows;
}

std::vector<ClutterEffectRow> analyze_clutter_effect(const std::vector<policy::EpisodeLog>& disperse,
                                                     const std::vector<policy::EpisodeLog>& grasp_only,
                                                     const Durations&) {
  if (disperse.empty() || grasp_only.empty()) throw NoAttempts("analyze_clutter_effect: empty log set");
  std::vector<ClutterEffectRow> rows;
  for (const BinRow& b : bin_rows(disperse)) rows.push_back({"disperse_grasp", b});
  for (const BinRow& b : bin_rows(grasp_only)) rows.push_back({"grasp_only", b});
  return rows;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string report_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "section,lo,hi,attempts,successes,multi_picks,pushes,gs,mpc,gs_wm,mpph,mean_local\n";
  os << "total,,," << r.attempts << ',' << r.successes << ',' << r.multi_picks << ',' << r.pushes << ','
     << fmt(r.gs) << ',' << fmt(r.mpc) << ',' << fmt(r.gs_wm) << ',' << fmt(r.mpph) << ",\n";
  for (const BinRow& b : r.by_bin)
    os << "bin," << b.lo << ',' << b.hi << ',' << b.attempts << ",,,," << fmt(b.gs) << ',' << fmt(b.mpc)
       << ",,," << fmt(b.mean_local) << '\n';
  return os.str();
}

MetricsReport parse_report_csv(const std::string& text) {
  MetricsReport r;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 12) throw Error("report csv: bad row: " + line);
    if (f[0] == "total") {
      r.attempts = std::stoi(f[3]);
      r.successes = std::stoi(f[4]);
      r.multi_picks = std::stoi(f[5]);
      r.pushes = std::stoi(f[6]);
      r.gs = std::stod(f[7]);
      r.mpc = std::stod(f[8]);
      r.gs_wm = std::stod(f[9]);
      r.mpph = std::stod(f[10]);
    } else if (f[0] == "bin") {
      r.by_bin.push_back({std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]), std::stod(f[11]), std::stod(f[8]),
                          std::stod(f[7])});
    } else {
      throw Error("report csv: unknown section " + f[0]);
    }
  }
  return r;
}

std::string gdi_sweep_csv(const std::vector<GdiCell>& cells) {
  std::ostringstream os;
  os << "lct,hct,gs,attempts\n";
  for (const GdiCell& c : cells) os << fmt(c.lct) << ',' << fmt(c.hct) << ',' << fmt(c.gs) << ',' << c.attempts << '\n';
  return os.str();
}

std::string k_ablation_csv(const std::vector<KAblationRow>& rows) {
  std::ostringstream os;
  os << "variant,bin_lo,bin_hi,attempts,gs\n";
  for (const auto& r : rows) os << r.variant << ',' << r.lo << ',' << r.hi << ',' << r.attempts << ',' << fmt(r.gs) << '\n';
  return os.str();
}

std::string clutter_effect_csv(const std::vector<ClutterEffectRow>& rows) {
  std::ostringstream os;
  os << "variant,bin_lo,bin_hi,attempts,mean_local,mpc,gs\n";
  for (const auto& r : rows)
    os << r.variant << ',' << r.bin.lo << ',' << r.bin.hi << ',' << r.bin.attempts << ',' << fmt(r.bin.mean_local)
       << ',' << fmt(r.bin.mpc) << ',' << fmt(r.bin.gs) << '\n';
  return os.str();
}

}  // namespace declutter::exp

namespace declutter::exp {

KFit default_k_fit(const ExperimentConfig& config) {
  return fit_k_with_holdout(k_training_set(config, kDefaultKTrainingScenes, kDefaultKTrainingSeed),
                            config.episode.k_model.k_max);
}

}  // namespace declutter::exp
