#include "declutter/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "declutter/errors.hpp"
#include "declutter/rng.hpp"

namespace declutter::grasp {

using geom::Vec2;

BinaryMask depth_filter(const DepthImage& depth, const DepthImage& background, double delta) {
  if (depth.width() != background.width() || depth.height() != background.height())
    throw ShapeMismatch("depth_filter: depth and background differ in size");
  BinaryMask mask(depth.width(), depth.height(), 0);
  for (std::size_t i = 0; i < depth.size(); ++i)
    mask.pixels()[i] = background.pixels()[i] - depth.pixels()[i] >= delta ? 1 : 0;
  return mask;
}

double estimate_area_spread(const BinaryMask& mask) {
  std::size_t set = 0;
  for (const auto v : mask.pixels()) set += v != 0;
  return static_cast<double>(set) / static_cast<double>(mask.size());
}

KModel fit_k_model(const std::vector<KSample>& samples, int k_max) {
  if (samples.size() < 3) throw RankDeficient("fit_k_model: need at least 3 samples");
  // Normal equations (X^T X) beta = X^T y with X rows [1, area, clutter].
  double m[3][4] = {};
  for (const KSample& s : samples) {
    const double row[3] = {1.0, s.area, s.global_clutter};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += row[i] * row[j];
      m[i][3] += row[i] * s.k;
    }
  }
  double scale = 0.0;
  for (int i = 0; i < 3; ++i) scale = std::max(scale, std::abs(m[i][i]));
  // Gaussian elimination with partial pivoting.
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (std::abs(m[piv][c]) <= 1e-12 * scale) throw RankDeficient("fit_k_model: design matrix is singular");
    if (piv != c)
      for (int j = 0; j < 4; ++j) std::swap(m[c][j], m[piv][j]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = m[r][c] / m[c][c];
      for (int j = c; j < 4; ++j) m[r][j] -= f * m[c][j];
    }
  }
  KModel model;
  model.k_max = k_max;
  for (int i = 2; i >= 0; --i) {
    double acc = m[i][3];
    for (int j = i + 1; j < 3; ++j) acc -= m[i][j] * model.beta[j];
    model.beta[i] = acc / m[i][i];
  }
  return model;
}

int estimate_k(double area, double global_clutter, const KModel& model, int k_max) {
  const double raw = model.beta[0] + model.beta[1] * area + model.beta[2] * global_clutter;
  const double r = std::round(raw);
  if (!(r >= 1.0)) return 1;
  return static_cast<int>(std::min<double>(r, std::max(1, k_max)));
}

KMeansResult kmeans(const BinaryMask& mask, int k, std::uint64_t seed, kernels::Exec exec) {
  std::vector<double> xs, ys;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y)) {
        xs.push_back(x);
        ys.push_back(y);
      }
  const std::size_t n = xs.size();
  if (k < 1 || n < static_cast<std::size_t>(k)) throw TooFewPixels("kmeans: fewer set pixels than clusters");

  // k-means++ seeding.
  Rng rng(seed);
  std::vector<double> cx, cy;
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.below(n);
  cx.push_back(xs[first]);
  cy.push_back(ys[first]);
  while (cx.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = xs[i] - cx.back();
      const double dy = ys[i] - cy.back();
      d2[i] = std::min(d2[i], dx * dx + dy * dy);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;
    }
    cx.push_back(xs[pick]);
    cy.push_back(ys[pick]);
  }

  KMeansResult res;
  constexpr int kMaxIterations = 50;
  constexpr double kShiftTolerance = 0.5;
  std::vector<double> sx(k), sy(k);
  std::vector<std::size_t> count(k);
  for (int it = 0; it < kMaxIterations; ++it) {
    const std::vector<int> label = kernels::nearest_centroid(xs, ys, cx, cy, exec);
    std::fill(sx.begin(), sx.end(), 0.0);
    std::fill(sy.begin(), sy.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = label[i];
      const double dx = xs[i] - cx[c];
      const double dy = ys[i] - cy[c];
      sse += dx * dx + dy * dy;
      sx[c] += xs[i];
      sy[c] += ys[i];
      ++count[c];
    }
    res.objective.push_back(sse);
    double max_shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (count[c] == 0) continue;  // empty cluster keeps its centroid
      const double nx = sx[c] / static_cast<double>(count[c]);
      const double ny = sy[c] / static_cast<double>(count[c]);
      max_shift = std::max(max_shift, std::hypot(nx - cx[c], ny - cy[c]));
      cx[c] = nx;
      cy[c] = ny;
    }
    res.iterations = it + 1;
    if (max_shift < kShiftTolerance) break;
  }

  for (int c = 0; c < k; ++c) {
    res.centroids.push_back({cx[c], cy[c]});
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (xs[i] - cx[c]) * (xs[i] - cx[c]) + (ys[i] - cy[c]) * (ys[i] - cy[c]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    res.snapped.push_back({static_cast<int>(xs[best]), static_cast<int>(ys[best])});
  }
  return res;
}

std::vector<Vec2> gdi_sample_points(Pixel center, double angle, const GdiParams& params, double opening_px) {
  const Vec2 c{double(center.x), double(center.y)};
  const Vec2 u{std::cos(angle), std::sin(angle)};
  const Vec2 v = geom::perp(u);
  const double half = 0.5 * opening_px;
  const int ns = params.samples_per_side;
  const int fw = params.finger_width_px;
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(2 * ns * fw));
  for (const double side : {-1.0, 1.0}) {
    for (int i = 0; i < ns; ++i) {
      const double d = ns == 1 ? params.lct : params.lct + i * (half - params.lct) / (ns - 1);
      for (int j = 0; j < fw; ++j) {
        const double off = j - 0.5 * (fw - 1);
        pts.push_back(c + (side * d) * u + off * v);
      }
    }
  }
  return pts;
}

bool gdi_rectangle_inside(int width, int height, Pixel center, double angle, const GdiParams& params,
                          double opening_px) {
  const Vec2 c{double(center.x), double(center.y)};
  const Vec2 u{std::cos(angle), std::sin(angle)};
  const Vec2 v = geom::perp(u);
  const double hl = 0.5 * opening_px;
  const double hw = 0.5 * (params.finger_width_px - 1);
  constexpr double eps = 1e-9;
  for (const double a : {-hl, hl})
    for (const double b : {-hw, hw}) {
      const Vec2 p = c + a * u + b * v;
      if (p.x < -eps || p.y < -eps || p.x > width - 1 + eps || p.y > height - 1 + eps) return false;
    }
  return true;
}

double compute_gdi(const DepthImage& depth, Pixel center, double angle, const GdiParams& params,
                   double opening_px) {
  if (!gdi_rectangle_inside(depth.width(), depth.height(), center, angle, params, opening_px))
    throw RectangleOutOfBounds("compute_gdi: grasp rectangle leaves the image");
  const double threshold = depth[center] + params.hct;
  const auto pts = gdi_sample_points(center, angle, params, opening_px);
  std::size_t valid = 0;
  for (const Vec2 p : pts) {
    const double x = std::clamp(p.x, 0.0, depth.width() - 1.0);
    const double y = std::clamp(p.y, 0.0, depth.height() - 1.0);
    if (bilinear(depth, x, y) >= threshold) ++valid;
  }
  return pts.empty() ? 0.0 : static_cast<double>(valid) / static_cast<double>(pts.size());
}

std::vector<double> candidate_angles() {
  std::vector<double> a;
  for (int i = 0; i < 12; ++i) a.push_back(i * std::numbers::pi / 12.0);
  return a;
}

std::vector<GraspPose> plan_grasps_with_k(const DepthImage& depth, const BinaryMask& mask, const PlanInputs& in) {
  std::size_t set = 0;
  for (const auto v : mask.pixels()) set += v != 0;
  if (set == 0) throw NoCandidates("plan_grasps: depth-filtered mask is empty");
  const int k = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(1, in.k)), set));

  std::vector<Pixel> centers = kmeans(mask, k, in.seed).snapped;
  std::vector<Pixel> unique;
  for (const Pixel p : centers)
    if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);

  const auto angles = candidate_angles();
  std::vector<GraspPose> poses;
  for (const Pixel c : unique) {
    GraspPose best{c, 0.0, in.opening_px, -1.0, 0.0};
    for (const double a : angles) {
      if (!gdi_rectangle_inside(depth.width(), depth.height(), c, a, in.gdi, in.opening_px)) continue;
      const double g = compute_gdi(depth, c, a, in.gdi, in.opening_px);
      if (g > best.gdi) {
        best.gdi = g;
        best.angle = a;
      }
    }
    if (best.gdi >= 0.0) poses.push_back(best);
  }
  const int w = depth.width();
  std::sort(poses.begin(), poses.end(), [w](const GraspPose& a, const GraspPose& b) {
    if (a.gdi != b.gdi) return a.gdi > b.gdi;
    return a.center.y * w + a.center.x < b.center.y * w + b.center.x;
  });
  if (poses.size() > static_cast<std::size_t>(std::max(1, in.n_top))) poses.resize(std::max(1, in.n_top));
  return poses;
}

std::vector<GraspPose> plan_grasps(const DepthImage& depth, const DepthImage& background, const KModel& k_model,
                                   double global_clutter, const GdiParams& params, double opening_px, int n_top,
                                   std::uint64_t seed) {
  const BinaryMask mask = depth_filter(depth, background);
  const double area = estimate_area_spread(mask);
  PlanInputs in;
  in.k = estimate_k(area, global_clutter, k_model);
  in.gdi = params;
  in.opening_px = opening_px;
  in.n_top = n_top;
  in.seed = seed;
  return plan_grasps_with_k(depth, mask, in);
}

}  // namespace declutter::grasp
