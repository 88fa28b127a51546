// Acceptance run: one PASS/FAIL line per criterion. Experiment criteria are
// computed here; the oracle and property criteria run the matching unit test
// cases through doctest. The exit status reports whether every check ran,
// not whether every criterion passed.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "declutter/experiment.hpp"

using namespace declutter;

namespace {

std::vector<std::string> g_lines;

void verdict(int id, bool pass, const std::string& detail) {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << detail;
  g_lines.push_back(os.str());
  std::cout << os.str() << std::endl;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * (i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

bool monotone(const std::vector<double>& v, int sign) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (sign * (v[i] - v[i - 1]) < 0) return false;
  return true;
}

std::string fmt(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(4);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "/" : "") << v[i];
  return os.str();
}

int run_cases(int argc, char** argv, const std::string& filter) {
  doctest::Context ctx(argc, argv);
  ctx.setOption("test-case", filter.c_str());
  ctx.setOption("minimal", true);
  return ctx.run();
}

double median_catalog_width_px(const sim::CameraModel& cam) {
  std::vector<double> widths;
  for (const auto& t : sim::default_catalog()) {
    const auto& poly = t.shape.outline();
    double w = 1e9;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const geom::Vec2 e = poly[(i + 1) % poly.size()] - poly[i];
      const geom::Interval iv = geom::project(poly, geom::normalized(geom::perp(e)));
      w = std::min(w, iv.hi - iv.lo);
    }
    widths.push_back(cam.to_pixels(w));
  }
  std::sort(widths.begin(), widths.end());
  const std::size_t n = widths.size();
  return n % 2 ? widths[n / 2] : 0.5 * (widths[n / 2 - 1] + widths[n / 2]);
}

}  // namespace

int main(int argc, char** argv) {
  using clock = std::chrono::steady_clock;
  exp::ExperimentConfig base;
  base.trials = 2000;
  base.episode.k_model = exp::default_k_fit(base).model;

  // 1. Variant ladder.
  const exp::Variant ladder[] = {exp::Variant::baseline, exp::Variant::grasp_optim,
                                 exp::Variant::grasp_optim_adaptive, exp::Variant::disperse_grasp};
  std::vector<exp::BatchResult> runs;
  const auto t0 = clock::now();
  for (const exp::Variant v : ladder) {
    exp::ExperimentConfig cfg = base;
    cfg.variant = v;
    exp::apply_variant(cfg.episode, v);
    runs.push_back(exp::run_batch(cfg));
    const auto& r = runs.back().report;
    std::cout << "  " << exp::to_string(v) << ": attempts=" << r.attempts << " GS=" << r.gs << " MPC=" << r.mpc
              << " GS_wm=" << r.gs_wm << " MPPH=" << r.mpph << " pushes=" << r.pushes << std::endl;
  }
  const double minutes = std::chrono::duration<double>(clock::now() - t0).count() / 60.0;
  {
    std::vector<double> gs, mpc;
    for (const auto& r : runs) gs.push_back(r.report.gs), mpc.push_back(r.report.mpc);
    const bool order = gs[3] - gs[2] >= 2 && gs[2] - gs[1] >= 2 && gs[1] - gs[0] >= 2;
    verdict(1, order, "GS ladder baseline/optim/adaptive/disperse = " + fmt(gs) + ", each gap >= 2");
    verdict(1, mpc[3] < 0.5 * mpc[2],
            "MPC(disperse) " + fmt({mpc[3]}) + " < 0.5 * MPC(adaptive) " + fmt({mpc[2]}));
    verdict(1, minutes < 10.0, "ladder runtime " + fmt({minutes}) + " min < 10");
  }

  // 2. GDI sweep.
  {
    const std::vector<double> lcts{2, 5, 9, 13, 17, 19}, hcts{0.0, 0.01, 0.02, 0.03, 0.05, 0.07};
    const auto cells = exp::sweep_gdi(base, lcts, hcts, 200);
    const auto best = *std::max_element(cells.begin(), cells.end(),
                                        [](const auto& a, const auto& b) { return a.gs < b.gs; });
    const int fewest = std::min_element(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
                         return a.attempts < b.attempts;
                       })->attempts;
    const double width = median_catalog_width_px(base.episode.camera);
    verdict(2, best.lct >= 7 && best.lct <= 25 && best.hct >= 0 && best.hct <= 0.04 && fewest >= 200,
            "argmax cell lct=" + fmt({best.lct}) + " px hct=" + fmt({best.hct}) + " m (GS " + fmt({best.gs}) +
                ", min attempts/cell " + std::to_string(fewest) + ")");
    verdict(2, std::abs(width - 16.0) <= 2.0, "median catalog grasp width " + fmt({width}) + " px within 16 +- 2");
  }

  // 3. k ablation.
  {
    const auto rows = exp::ablate_k(base, {5, 10, 15, 20}, 1000);
    auto gs_of = [&](const std::string& v, int lo) {
      for (const auto& r : rows)
        if (r.variant == v && r.lo == lo) return r.gs;
      return std::nan("");
    };
    double worst = 0.0;
    std::vector<double> est, exact;
    for (const auto& b : exp::kBinEdges) {
      est.push_back(gs_of("estimate", b[0]));
      exact.push_back(gs_of("exact", b[0]));
      worst = std::max(worst, std::abs(est.back() - exact.back()));
    }
    verdict(3, worst <= 4.0, "max |GS(estimate) - GS(exact)| = " + fmt({worst}) + " (estimate " + fmt(est) +
                                 ", exact " + fmt(exact) + ")");
    const double naive = gs_of("naive_k5", 16);
    verdict(3, est[3] >= naive + 5.0,
            "16-20 objects: GS(estimate) " + fmt({est[3]}) + " >= GS(naive k=5) " + fmt({naive}) + " + 5");
    const auto fit = exp::fit_k_with_holdout(exp::k_training_set(base, exp::kDefaultKTrainingScenes, 777));
    verdict(3, fit.holdout_mae <= 3.0, "k-model holdout MAE " + fmt({fit.holdout_mae}) + " <= 3");
  }

  // 4. Clutter effect per bin.
  {
    const auto rows = exp::analyze_clutter_effect(runs[3].logs, runs[2].logs, base.durations);
    std::vector<double> bins, local, mpc, gs, dgs;
    for (const auto& r : rows) {
      if (r.variant == "disperse_grasp") {
        dgs.push_back(r.bin.gs);
        continue;
      }
      bins.push_back(r.bin.lo);
      local.push_back(r.bin.mean_local);
      mpc.push_back(r.bin.mpc);
      gs.push_back(r.bin.gs);
    }
    const double rl = spearman(bins, local), rm = spearman(bins, mpc), rg = spearman(bins, gs);
    verdict(4, bins.size() == 4 && monotone(local, 1) && rl >= 0.8,
            "grasp-only mean local clutter " + fmt(local) + " non-decreasing (rho " + fmt({rl}) + ")");
    verdict(4, bins.size() == 4 && monotone(mpc, 1) && rm >= 0.8,
            "grasp-only MPC " + fmt(mpc) + " non-decreasing (rho " + fmt({rm}) + ")");
    verdict(4, bins.size() == 4 && monotone(gs, -1) && rg <= -0.8,
            "grasp-only GS " + fmt(gs) + " non-increasing (rho " + fmt({rg}) + ")");
    double spread = 0.0;
    for (const double v : dgs) spread = std::max(spread, std::abs(v - dgs.front()));
    verdict(4, dgs.size() == 4 && spread <= 5.0,
            "disperse GS per bin " + fmt(dgs) + " within 5 of the 1-5 bin (max dev " + fmt({spread}) + ")");
  }

  // 5-7. Oracle, property and partition suites.
  verdict(5, run_cases(argc, argv,
                       "squared distance transform equals brute force*,GDI matches the sample-enumeration oracle*,"
                       "metric identities on randomized logs,OLS recovers a noiseless linear model") == 0,
          "EDT, GDI, metrics and OLS oracles");
  verdict(6, run_cases(argc, argv,
                       "clutter map vanishes on constant images,clutter map is equivariant*,GDI is invariant*,"
                       "k-means objective never increases,no two objects interpenetrate*,"
                       "batches are reproducible byte for byte") == 0,
          "zero-on-constant, rotation, k-means monotonicity, non-penetration, determinism");
  verdict(7, run_cases(argc, argv, "exactly one rationale fires over an exhaustive grid,decision rule examples") == 0,
          "policy partition incl. three-failure override");

  std::ofstream out("acceptance_results.txt");
  for (const auto& l : g_lines) out << l << "\n";
  const auto passed = std::count_if(g_lines.begin(), g_lines.end(), [](const auto& l) { return l.rfind("PASS", 0) == 0; });
  std::cout << passed << "/" << g_lines.size() << " checks passed" << std::endl;
  return 0;
}
