#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "declutter/grasp.hpp"
#include "declutter/push.hpp"
#include "declutter/simscene.hpp"
#include "support.hpp"

using namespace declutter;

namespace {

const sim::CameraModel kCam = sim::CameraModel::covering(sim::Workspace{});
const sim::GripperParams kGripper;

sim::SceneObject box(int id, geom::Vec2 at, double w, double h, double height, double yaw = 0.0) {
  return {id, sim::Shape::box(w, h), {at.x, at.y, yaw}, height, Rgb{0.2 + 0.1 * id, 0.4, 0.6}};
}

bool inside(const sim::Scene& s) {
  for (const auto& o : s.objects)
    for (const auto& v : o.footprint())
      if (!s.workspace.contains(v)) return false;
  return true;
}

}  // namespace

TEST_CASE("spawn_heap") {
  const auto catalog = sim::default_catalog();
  CHECK(catalog.size() == 8);
  const auto a = sim::spawn_heap(7, 20, catalog);
  CHECK(a.objects.size() == 20);
  CHECK(sim::max_penetration(a) <= 0.0);
  CHECK(inside(a));
  CHECK(a == sim::spawn_heap(7, 20, catalog));

  const auto one = sim::spawn_heap(3, 1, catalog);
  REQUIRE(one.objects.size() == 1);
  const geom::Vec2 c = geom::centroid(one.objects[0].footprint());
  CHECK(geom::norm(c - one.workspace.center()) <= 0.1);

  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const auto s = sim::spawn_heap(seed, 20, catalog);
    CHECK(sim::max_penetration(s) <= 0.0);
    CHECK(inside(s));
  }
}

TEST_CASE("render") {
  sim::Scene scene;
  const sim::RenderOptions opts;
  const auto empty = sim::render(scene, kCam, opts);
  CHECK(std::ranges::all_of(empty.depth.pixels(), [](double d) { return d == 0.65; }));
  CHECK(std::ranges::all_of(empty.rgb.pixels(), [&](const Rgb& c) { return c == opts.table_color; }));

  scene.objects.push_back(box(0, {0.15, 0.2}, 0.04, 0.03, 0.05, 0.4));
  const auto one = sim::render(scene, kCam);
  const auto fp = scene.objects[0].footprint();
  int on = 0;
  for (int y = 0; y < kCam.height; ++y)
    for (int x = 0; x < kCam.width; ++x) {
      const geom::Vec2 w = kCam.pixel_center({x, y});
      if (!geom::contains(fp, w)) continue;
      ++on;
      CHECK(one.depth(x, y) == doctest::Approx(0.60).epsilon(1e-12));
    }
  CHECK(on > 100);

  scene.objects.push_back(box(1, {0.165, 0.2}, 0.04, 0.03, 0.06));
  scene.objects[0].height = 0.03;
  const auto two = sim::render(scene, kCam);
  const auto fp1 = scene.objects[1].footprint();
  int both = 0;
  for (int y = 0; y < kCam.height; ++y)
    for (int x = 0; x < kCam.width; ++x) {
      const geom::Vec2 w = kCam.pixel_center({x, y});
      if (!geom::contains(fp, w) || !geom::contains(fp1, w)) continue;
      ++both;
      CHECK(two.depth(x, y) == doctest::Approx(0.59).epsilon(1e-12));
      CHECK(two.rgb(x, y) == scene.objects[1].color);
    }
  CHECK(both > 0);
}

TEST_CASE("push moves a lone object by the corridor overlap") {
  sim::Scene scene;
  const geom::Vec2 at = kCam.pixel_center({80, 100});
  scene.objects.push_back(box(0, at, 0.03, 0.03, 0.05));
  scene.objects.push_back(box(1, kCam.pixel_center({80, 40}), 0.03, 0.03, 0.05));
  const PushAction a{{60.0, 100.0}, {110.0, 100.0}, 0.64};
  const auto r = sim::apply_push(scene, a, kGripper, kCam);
  const double s_end = kCam.to_world({110.0, 100.0}).x;
  CHECK(r.scene.objects[0].pose.x == doctest::Approx(at.x + (s_end - (at.x - 0.015))).epsilon(1e-12));
  CHECK(r.scene.objects[0].pose.y == doctest::Approx(at.y).epsilon(1e-12));
  CHECK(r.scene.objects[1] == scene.objects[1]);
  CHECK(r.events.contacted_ids == std::vector<int>{0});
}

TEST_CASE("push of two objects in file keeps their order and separation") {
  sim::Scene scene;
  scene.objects.push_back(box(0, kCam.pixel_center({70, 100}), 0.03, 0.03, 0.05));
  scene.objects.push_back(box(1, kCam.pixel_center({86, 100}), 0.03, 0.03, 0.04, 0.3));
  const PushAction a{{50.0, 101.0}, {120.0, 98.0}, 0.64};
  const auto r = sim::apply_push(scene, a, kGripper, kCam);
  for (int i = 0; i < 2; ++i) CHECK(!(r.scene.objects[i].pose == scene.objects[i].pose));
  CHECK(r.scene.objects[1].pose.x > r.scene.objects[0].pose.x);
  CHECK(!geom::overlaps(r.scene.objects[0].footprint(), r.scene.objects[1].footprint(), sim::kPenetrationTolerance));
  CHECK(sim::max_penetration(r.scene) <= sim::kPenetrationTolerance);
}

TEST_CASE("grasp model examples") {
  const Pixel p{100, 100};
  const geom::Vec2 c = kCam.pixel_center(p);
  const GraspPose pose{p, 0.0, kCam.to_pixels(kGripper.opening)};

  sim::Scene single;
  single.objects.push_back(box(0, c, 0.04, 0.04, 0.05));
  auto r = sim::attempt_grasp(single, pose, kGripper, kCam);
  CHECK(r.outcome.success);
  CHECK(!r.outcome.multi_pick);
  CHECK(r.outcome.picked_ids == std::vector<int>{0});
  CHECK(r.scene.objects.empty());

  sim::Scene pair;
  pair.objects.push_back(box(0, c - geom::Vec2{0.0125, 0}, 0.025, 0.04, 0.04));
  pair.objects.push_back(box(1, c + geom::Vec2{0.0125, 0}, 0.025, 0.04, 0.04));
  r = sim::attempt_grasp(pair, pose, kGripper, kCam);
  CHECK(r.outcome.success);
  CHECK(r.outcome.multi_pick);
  CHECK(r.scene.objects.empty());

  sim::Scene blocked = single;
  blocked.objects.push_back(box(1, c + geom::Vec2{0.05, 0}, 0.02, 0.02, 0.07));
  r = sim::attempt_grasp(blocked, pose, kGripper, kCam);
  CHECK(!r.outcome.success);
  CHECK(r.outcome.failure_reason == sim::FailureReason::collision);
  CHECK(r.scene == blocked);

  r = sim::attempt_grasp(sim::Scene{}, pose, kGripper, kCam);
  CHECK(r.outcome.failure_reason == sim::FailureReason::empty_jaws);

  sim::Scene off_axis;
  off_axis.objects.push_back(box(0, c + geom::Vec2{0, 0.009}, 0.03, 0.02, 0.05));
  r = sim::attempt_grasp(off_axis, pose, kGripper, kCam);
  CHECK(r.outcome.failure_reason == sim::FailureReason::slip);
  CHECK(r.scene == off_axis);
  off_axis.objects[0].pose.y = c.y + 0.007;
  CHECK(sim::attempt_grasp(off_axis, pose, kGripper, kCam).outcome.success);

  sim::Scene low_neighbour = single;
  low_neighbour.objects.push_back(box(1, c + geom::Vec2{0.025, 0}, 0.01, 0.03, 0.02));
  r = sim::attempt_grasp(low_neighbour, pose, kGripper, kCam);
  CHECK(r.outcome.success);
  CHECK(r.outcome.picked_ids == std::vector<int>{0});
  CHECK(r.scene.objects.size() == 1);
}

TEST_CASE("no two objects interpenetrate after any action") {
  const auto catalog = sim::default_catalog();
  double worst = -1.0;
  int actions = 0, unresolved = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(mix_seed(seed, 1));
    sim::Scene scene = sim::spawn_heap(seed, 8 + static_cast<int>(seed % 13), catalog);
    for (int step = 0; step < 8 && !scene.objects.empty(); ++step) {
      const std::size_t before = scene.objects.size();
      const auto& target = scene.objects[rng.below(scene.objects.size())];
      const geom::Vec2 tc = kCam.to_image({target.pose.x, target.pose.y});
      const Pixel tp{static_cast<int>(std::lround(tc.x)), static_cast<int>(std::lround(tc.y))};
      if (step % 2 == 0) {
        const auto view = sim::render(scene, kCam);
        const BinaryMask mask = grasp::depth_filter(view.depth, sim::background(scene, kCam));
        PushAction a;
        try {
          a = push::plan_push(view.depth, mask, tp);
        } catch (const NoEntryPoint&) {
          const double ang = rng.uniform(0, 2 * std::numbers::pi);
          a = {tc - 30.0 * geom::Vec2{std::cos(ang), std::sin(ang)}, tc + 40.0 * geom::Vec2{std::cos(ang), std::sin(ang)},
               0.64};
        }
        try {
          scene = sim::apply_push(scene, a, kGripper, kCam).scene;
        } catch (const NonConvergence&) {
          ++unresolved;
        }
        CHECK(scene.objects.size() == before);
      } else {
        const GraspPose pose{tp, rng.uniform(0, std::numbers::pi), 40.0};
        const auto r = sim::attempt_grasp(scene, pose, kGripper, kCam);
        CHECK(r.scene.objects.size() + r.outcome.picked_ids.size() == before);
        scene = r.scene;
      }
      worst = std::max(worst, sim::max_penetration(scene));
      CHECK(inside(scene));
      ++actions;
    }
  }
  MESSAGE(unresolved << " pushes rejected as unresolvable out of " << actions << " actions");
  CHECK(actions > 300);
  CHECK(unresolved * 20 < actions);
  CHECK(worst <= sim::kPenetrationTolerance);
}
