#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "declutter/grasp.hpp"
#include "declutter/simscene.hpp"
#include "support.hpp"

using namespace declutter;

namespace {

const sim::CameraModel kCam = sim::CameraModel::covering(sim::Workspace{});

sim::SceneObject box_at(int id, double x, double y, double w, double h, double height, double yaw = 0.0) {
  return {id, sim::Shape::box(w, h), {x, y, yaw}, height, Rgb{0.7, 0.3, 0.3}};
}

Pixel pixel_of(geom::Vec2 world) {
  const geom::Vec2 p = kCam.to_image(world);
  return {static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y))};
}

// Sample-enumeration oracle for the GDI: every finger-region sample point is
// rebuilt from the definition and read with a four-weight bilinear lookup.
double gdi_oracle(const DepthImage& d, Pixel c, double angle, const grasp::GdiParams& p, double opening) {
  const double ux = std::cos(angle), uy = std::sin(angle);
  const double half = opening / 2;
  const double threshold = d(c.x, c.y) + p.hct;
  int valid = 0, total = 0;
  for (int side = -1; side <= 1; side += 2)
    for (int i = 0; i < p.samples_per_side; ++i) {
      const double dist = p.lct + (half - p.lct) * i / (p.samples_per_side - 1);
      for (int j = 0; j < p.finger_width_px; ++j) {
        const double off = j - (p.finger_width_px - 1) / 2.0;
        double x = c.x + side * dist * ux - off * uy;
        double y = c.y + side * dist * uy + off * ux;
        x = std::min(std::max(x, 0.0), d.width() - 1.0);
        y = std::min(std::max(y, 0.0), d.height() - 1.0);
        const int x0 = std::min(static_cast<int>(x), d.width() - 2);
        const int y0 = std::min(static_cast<int>(y), d.height() - 2);
        const double fx = x - x0, fy = y - y0;
        const double v = (1 - fx) * (1 - fy) * d(x0, y0) + fx * (1 - fy) * d(x0 + 1, y0) +
                         (1 - fx) * fy * d(x0, y0 + 1) + fx * fy * d(x0 + 1, y0 + 1);
        valid += v >= threshold;
        ++total;
      }
    }
  return static_cast<double>(valid) / total;
}

bool rectangle_inside_oracle(int w, int h, Pixel c, double angle, const grasp::GdiParams& p, double opening) {
  const double ux = std::cos(angle), uy = std::sin(angle);
  for (const double a : {-opening / 2, opening / 2})
    for (const double b : {-(p.finger_width_px - 1) / 2.0, (p.finger_width_px - 1) / 2.0}) {
      const double x = c.x + a * ux - b * uy, y = c.y + a * uy + b * ux;
      if (x < -1e-9 || y < -1e-9 || x > w - 1 + 1e-9 || y > h - 1 + 1e-9) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("depth filter") {
  sim::Scene scene;
  const DepthImage bg = sim::background(scene, kCam);
  CHECK(std::ranges::all_of(grasp::depth_filter(bg, bg).pixels(), [](auto v) { return v == 0; }));

  scene.objects.push_back(box_at(0, 0.2, 0.2, 0.04, 0.04, 0.05));
  const auto view = sim::render(scene, kCam);
  const BinaryMask m = grasp::depth_filter(view.depth, bg, 0.01);
  int set = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m.pixels()[i] == (view.depth.pixels()[i] < 0.65 ? 1 : 0));
    set += m.pixels()[i];
  }
  CHECK(set > 0);

  scene.objects[0].height = 0.005;
  const BinaryMask flat = grasp::depth_filter(sim::render(scene, kCam).depth, bg, 0.01);
  CHECK(std::ranges::all_of(flat.pixels(), [](auto v) { return v == 0; }));
  CHECK_THROWS_AS(grasp::depth_filter(DepthImage(4, 4), DepthImage(4, 5)), ShapeMismatch);
}

TEST_CASE("area spread") {
  CHECK(grasp::estimate_area_spread(BinaryMask(8, 8)) == 0.0);
  CHECK(grasp::estimate_area_spread(BinaryMask(8, 8, 1)) == 1.0);
  BinaryMask m(64, 64);
  for (int i = 0; i < 1024; ++i) m.pixels()[i * 4] = 1;
  CHECK(grasp::estimate_area_spread(m) == 0.25);
}

TEST_CASE("OLS recovers a noiseless linear model") {
  Rng rng(17);
  std::vector<grasp::KSample> s;
  for (int i = 0; i < 60; ++i) {
    const double a = rng.uniform(0.0, 0.5), g = rng.uniform(0.0, 0.3);
    s.push_back({a, g, 2.0 + 10.0 * a + 5.0 * g});
  }
  const auto model = grasp::fit_k_model(s);
  CHECK(std::abs(model.beta[0] - 2.0) <= 1e-6);
  CHECK(std::abs(model.beta[1] - 10.0) <= 1e-6);
  CHECK(std::abs(model.beta[2] - 5.0) <= 1e-6);

  const std::vector<grasp::KSample> same(10, grasp::KSample{0.2, 0.1, 4.0});
  CHECK_THROWS_AS(grasp::fit_k_model(same), RankDeficient);
}

TEST_CASE("estimate_k") {
  CHECK(grasp::estimate_k(0.3, 0.7, grasp::KModel{{1, 0, 0}}, 25) == 1);
  CHECK(grasp::estimate_k(0.5, 0.123, grasp::KModel{{0, 20, 0}}, 25) == 10);
  CHECK(grasp::estimate_k(0.5, 0.1, grasp::KModel{{-5, 0, 0}}, 25) == 1);
  CHECK(grasp::estimate_k(0.5, 0.1, grasp::KModel{{100, 0, 0}}, 25) == 25);
}

TEST_CASE("k-means objective never increases") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto scene = sim::spawn_heap(seed, 5 + static_cast<int>(seed % 16), sim::default_catalog());
    const auto view = sim::render(scene, kCam);
    const BinaryMask mask = grasp::depth_filter(view.depth, sim::background(scene, kCam));
    const auto res = grasp::kmeans(mask, 2 + static_cast<int>(seed % 12), seed);
    REQUIRE(!res.objective.empty());
    for (std::size_t i = 1; i < res.objective.size(); ++i) CHECK(res.objective[i] <= res.objective[i - 1] + 1e-9);
  }
}

TEST_CASE("k-means on two blobs agrees with a plain Lloyd oracle") {
  BinaryMask m(140, 40);
  for (int y = 18; y < 23; ++y)
    for (int x = 10; x < 15; ++x) m(x, y) = m(x + 100, y) = 1;
  const auto res = grasp::kmeans(m, 2, 42);
  REQUIRE(res.centroids.size() == 2);

  std::vector<geom::Vec2> pts;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y)) pts.push_back({double(x), double(y)});
  std::array<geom::Vec2, 2> c{pts.front(), pts.back()};
  for (int it = 0; it < 20; ++it) {
    std::array<geom::Vec2, 2> sum{};
    std::array<int, 2> n{};
    for (const auto& p : pts) {
      const double d0 = std::hypot(p.x - c[0].x, p.y - c[0].y), d1 = std::hypot(p.x - c[1].x, p.y - c[1].y);
      const int k = d1 < d0;
      sum[k].x += p.x, sum[k].y += p.y, ++n[k];
    }
    for (int k = 0; k < 2; ++k) c[k] = {sum[k].x / n[k], sum[k].y / n[k]};
  }
  for (const auto& want : c) {
    double best = 1e9;
    for (const auto& got : res.centroids) best = std::min(best, std::hypot(got.x - want.x, got.y - want.y));
    CHECK(best <= 1.0);
  }
}

TEST_CASE("k-means with one cluster per pixel returns the pixels; runs are deterministic") {
  BinaryMask m(20, 20);
  const std::vector<Pixel> px{{1, 1}, {5, 9}, {12, 3}, {18, 18}, {7, 7}};
  for (const Pixel p : px) m[p] = 1;
  const auto res = grasp::kmeans(m, 5, 9);
  std::set<std::pair<int, int>> got, want;
  for (const Pixel p : res.snapped) got.insert({p.x, p.y});
  for (const auto& c : res.centroids) CHECK((c.x == std::round(c.x) && c.y == std::round(c.y)));
  for (const Pixel p : px) want.insert({p.x, p.y});
  CHECK(got == want);

  const BinaryMask r = test::random_mask(60, 50, 0.2, 77);
  const auto a = grasp::kmeans(r, 7, 123);
  const auto b = grasp::kmeans(r, 7, 123);
  CHECK(a.snapped == b.snapped);
  CHECK(a.objective == b.objective);
  CHECK(grasp::kmeans(r, 7, 123, kernels::Exec::serial).snapped == a.snapped);
  CHECK_THROWS_AS(grasp::kmeans(BinaryMask(10, 10), 2, 1), TooFewPixels);
}

TEST_CASE("GDI on an isolated object") {
  sim::Scene scene;
  scene.objects.push_back(box_at(0, 0.2, 0.2, 0.04, 0.04, 0.05));
  const auto view = sim::render(scene, kCam);
  const Pixel c = pixel_of({0.2, 0.2});
  grasp::GdiParams p;
  for (const double a : grasp::candidate_angles()) CHECK(grasp::compute_gdi(view.depth, c, a, p, 40.0) == 1.0);
  p.hct = 0.65 - view.depth[c] + 0.001;
  for (const double a : grasp::candidate_angles()) CHECK(grasp::compute_gdi(view.depth, c, a, p, 40.0) == 0.0);
  CHECK_THROWS_AS(grasp::compute_gdi(view.depth, {2, 2}, 0.0, p, 40.0), RectangleOutOfBounds);
}

TEST_CASE("GDI with a neighbour filling one rectangle end") {
  sim::Scene scene;
  scene.objects.push_back(box_at(0, 0.2, 0.2, 0.03, 0.03, 0.04));
  scene.objects.push_back(box_at(1, 0.245, 0.2, 0.03, 0.06, 0.06));
  const auto view = sim::render(scene, kCam);
  const Pixel c = pixel_of({0.2, 0.2});
  const grasp::GdiParams p{.lct = 9.0, .hct = 0.013};
  const double g = grasp::compute_gdi(view.depth, c, 0.0, p, 40.0);
  CHECK(g == gdi_oracle(view.depth, c, 0.0, p, 40.0));
  CHECK(g > 0.0);
  CHECK(g < 1.0);
}

TEST_CASE("GDI matches the sample-enumeration oracle on random heaps") {
  Rng rng(99);
  int compared = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto scene = sim::spawn_heap(500 + s, 1 + static_cast<int>(s % 20), sim::default_catalog());
    const auto view = sim::render(scene, kCam);
    for (int t = 0; t < 20; ++t) {
      const Pixel c{static_cast<int>(rng.below(208)), static_cast<int>(rng.below(208))};
      const double angle = t % 2 ? rng.uniform(0, std::numbers::pi) : grasp::candidate_angles()[t % 12];
      const grasp::GdiParams p{.lct = rng.uniform(2.0, 18.0), .hct = 0.013, .finger_width_px = 3 + 2 * (t % 3),
                               .samples_per_side = 5 + t % 8};
      const double opening = rng.uniform(30.0, 50.0);
      const bool inside = rectangle_inside_oracle(208, 208, c, angle, p, opening);
      CHECK(grasp::gdi_rectangle_inside(208, 208, c, angle, p, opening) == inside);
      if (!inside) continue;
      worst = std::max(worst, std::abs(grasp::compute_gdi(view.depth, c, angle, p, opening) -
                                       gdi_oracle(view.depth, c, angle, p, opening)));
      ++compared;
    }
  }
  CHECK(compared > 300);
  CHECK(worst <= 1e-12);
}

TEST_CASE("GDI is invariant under a 90 degree rotation of the scene") {
  const grasp::GdiParams p{.lct = 9.0, .hct = 0.013};
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto scene = sim::spawn_heap(40 + s, 12, sim::default_catalog());
    const auto view = sim::render(scene, kCam);
    const DepthImage rot = rotate90(view.depth);
    for (const auto& obj : scene.objects) {
      const Pixel c = pixel_of({obj.pose.x, obj.pose.y});
      const Pixel rc = rotate90(c, view.depth.width());
      for (const double a : grasp::candidate_angles()) {
        if (!grasp::gdi_rectangle_inside(208, 208, c, a, p, 40.0)) continue;
        const double ra = a < std::numbers::pi / 2 ? a + std::numbers::pi / 2 : a - std::numbers::pi / 2;
        worst = std::max(worst, std::abs(grasp::compute_gdi(view.depth, c, a, p, 40.0) -
                                         grasp::compute_gdi(rot, rc, ra, p, 40.0)));
      }
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("GDI never increases with the height clearance") {
  const auto scene = sim::spawn_heap(3, 18, sim::default_catalog());
  const auto view = sim::render(scene, kCam);
  for (const auto& obj : scene.objects) {
    const Pixel c = pixel_of({obj.pose.x, obj.pose.y});
    for (const double a : grasp::candidate_angles()) {
      double prev = 2.0;
      for (const double hct : {0.0, 0.011, 0.021, 0.033, 0.051, 0.072}) {
        const double g = grasp::compute_gdi(view.depth, c, a, {.lct = 9.0, .hct = hct}, 40.0);
        CHECK(g <= prev);
        prev = g;
      }
    }
  }
}

TEST_CASE("plan_grasps") {
  sim::Scene scene;
  const DepthImage bg = sim::background(scene, kCam);
  CHECK_THROWS_AS(grasp::plan_grasps(bg, bg, {}, 0.0, {}, 40.0, 3, 1), NoCandidates);

  scene.objects.push_back(box_at(0, 0.2, 0.2, 0.04, 0.04, 0.05, 0.3));
  const auto view = sim::render(scene, kCam);
  const auto poses = grasp::plan_grasps(view.depth, bg, {}, 0.0, {}, 40.0, 3, 1);
  REQUIRE(!poses.empty());
  const geom::Vec2 centre = kCam.to_image({0.2, 0.2});
  CHECK(std::hypot(poses[0].center.x - centre.x, poses[0].center.y - centre.y) <= 3.0);
  CHECK(poses[0].gdi == 1.0);
  CHECK(poses[0].gdi == gdi_oracle(view.depth, poses[0].center, poses[0].angle, {}, 40.0));

  const auto heap = sim::spawn_heap(12, 20, sim::default_catalog());
  const auto hv = sim::render(heap, kCam);
  const auto ranked = grasp::plan_grasps(hv.depth, bg, grasp::KModel{{10, 0, 0}}, 0.0, {}, 40.0, 6, 5);
  CHECK(ranked.size() == 6);
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i].gdi <= ranked[i - 1].gdi);
}
