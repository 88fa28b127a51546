#include "declutter/simscene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "declutter/errors.hpp"
#include "declutter/rng.hpp"

namespace declutter::sim {

using geom::Polygon;
using geom::Vec2;

namespace {

Polygon recentered(std::vector<Vec2> v) {
  const Vec2 c = geom::centroid(v);
  for (Vec2& p : v) p -= c;
  return v;
}

}  // namespace

Shape Shape::box(double w, double h) {
  Shape s;
  s.vertices = {{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}};
  return s;
}

Shape Shape::circle(double r) {
  Shape s;
  s.kind = Kind::circle;
  s.radius = r;
  s.vertices.reserve(kCircleSegments);
  for (int i = 0; i < kCircleSegments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / kCircleSegments;
    s.vertices.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return s;
}

Shape Shape::convex(std::vector<Vec2> ccw_vertices) {
  Shape s;
  s.vertices = recentered(std::move(ccw_vertices));
  return s;
}

double Shape::area() const { return geom::signed_area(vertices); }

double Shape::diameter() const {
  double d = 0.0;
  for (const Vec2 a : vertices)
    for (const Vec2 b : vertices) d = std::max(d, geom::norm(a - b));
  return d;
}

bool Shape::valid() const { return geom::is_convex_ccw(vertices) && area() > 0.0; }

Polygon SceneObject::footprint() const {
  Polygon out;
  out.reserve(shape.vertices.size());
  const Vec2 t{pose.x, pose.y};
  for (const Vec2 v : shape.vertices) out.push_back(geom::rotate(v, pose.yaw) + t);
  return out;
}

const SceneObject* Scene::find(int id) const {
  for (const SceneObject& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

Vec2 CameraModel::to_world(Vec2 px) const {
  return {origin_x + (px.x + 0.5) / scale, origin_y + (px.y + 0.5) / scale};
}

Vec2 CameraModel::to_image(Vec2 w) const {
  return {(w.x - origin_x) * scale - 0.5, (w.y - origin_y) * scale - 0.5};
}

CameraModel CameraModel::covering(const Workspace& ws, double scale, double margin) {
  CameraModel cam;
  cam.scale = scale;
  cam.origin_x = ws.x_min - margin;
  cam.origin_y = ws.y_min - margin;
  cam.width = static_cast<int>(std::ceil((ws.width() + 2 * margin) * scale - 1e-9));
  cam.height = static_cast<int>(std::ceil((ws.height() + 2 * margin) * scale - 1e-9));
  return cam;
}

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::none: return "none";
    case FailureReason::collision: return "collision";
    case FailureReason::too_wide: return "too_wide";
    case FailureReason::empty_jaws: return "empty_jaws";
    case FailureReason::slip: return "slip";
  }
  return "none";
}

Catalog default_catalog() {
  Catalog c;
  c.push_back({"box_square", Shape::box(0.040, 0.040), 0.050, {0.66, 0.31, 0.35}});
  c.push_back({"box_slim", Shape::box(0.025, 0.060), 0.030, {0.81, 0.56, 0.37}});
  c.push_back({"box_long", Shape::box(0.035, 0.080), 0.040, {0.47, 0.48, 0.20}});
  c.push_back({"cylinder_thin", Shape::circle(0.012), 0.070, {0.32, 0.63, 0.43}});
  c.push_back({"cylinder_mid", Shape::circle(0.020), 0.045, {0.00, 0.48, 0.49}});
  c.push_back({"cylinder_flat", Shape::circle(0.025), 0.020, {0.03, 0.67, 0.86}});
  c.push_back({"triangle", Shape::convex({{0.0, 0.0}, {0.050, 0.0}, {0.025, 0.0433}}), 0.035,
               {0.38, 0.45, 0.72}});
  c.push_back({"chamfered_block",
               Shape::convex({{0.0, 0.0}, {0.050, 0.0}, {0.050, 0.025}, {0.035, 0.040}, {0.0, 0.040}}), 0.060,
               {0.75, 0.48, 0.70}});
  return c;
}

namespace {

bool inside_workspace(const Polygon& fp, const Workspace& ws) {
  const geom::Aabb b = geom::bounds(fp);
  return b.x_min >= ws.x_min && b.y_min >= ws.y_min && b.x_max <= ws.x_max && b.y_max <= ws.y_max;
}

// Shifts the pose so the footprint bounding box lies inside the workspace.
bool clamp_into(SceneObject& o, const Workspace& ws) {
  const geom::Aabb b = geom::bounds(o.footprint());
  double dx = 0.0, dy = 0.0;
  if (b.x_min < ws.x_min) dx = ws.x_min - b.x_min;
  if (b.x_max > ws.x_max) dx = ws.x_max - b.x_max;
  if (b.y_min < ws.y_min) dy = ws.y_min - b.y_min;
  if (b.y_max > ws.y_max) dy = ws.y_max - b.y_max;
  if (dx == 0.0 && dy == 0.0) return false;
  o.pose.x += dx;
  o.pose.y += dy;
  return true;
}

void add_unique(std::vector<int>& ids, int id) {
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
}

}  // namespace

Scene spawn_heap(std::uint64_t seed, int n, const Catalog& catalog, const HeapParams& params) {
  if (n < 1 || n > 20) throw std::invalid_argument("spawn_heap: n must be in [1, 20]");
  if (catalog.empty()) throw std::invalid_argument("spawn_heap: empty catalog");

  Rng rng(seed);
  Scene scene;
  scene.workspace = params.workspace;
  scene.table_depth = params.table_depth;
  scene.rng_seed = seed;

  std::vector<Polygon> placed;
  int rejections = 0;
  const Vec2 center = params.workspace.center();
  for (int i = 0; i < n; ++i) {
    const ShapeTemplate& tmpl = catalog[rng.below(catalog.size())];
    const double diam = tmpl.shape.diameter();
    for (;;) {
      SceneObject obj{i, tmpl.shape, {}, tmpl.height, tmpl.color};
      bool near_anchor = true;
      obj.pose.yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
      if (i == 0) {
        obj.pose.x = center.x + rng.uniform(-0.03, 0.03);
        obj.pose.y = center.y + rng.uniform(-0.03, 0.03);
      } else {
        // Drop the object against a random earlier one, leaving a small gap.
        const SceneObject& anchor = scene.objects[rng.below(static_cast<std::uint64_t>(i))];
        const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec2 u{std::cos(dir), std::sin(dir)};
        obj.pose.x = anchor.pose.x;
        obj.pose.y = anchor.pose.y;
        const double contact = geom::separation_along(placed[&anchor - scene.objects.data()], obj.footprint(), u);
        const double dist = contact + rng.uniform(0.0, params.max_gap);
        obj.pose.x += dist * u.x;
        obj.pose.y += dist * u.y;
        near_anchor = dist <= params.spread * std::max(diam, anchor.shape.diameter());
      }
      const Polygon fp = obj.footprint();
      bool ok = near_anchor && inside_workspace(fp, params.workspace);
      for (std::size_t j = 0; ok && j < placed.size(); ++j) ok = !geom::overlaps(fp, placed[j], 0.0);
      if (ok) {
        placed.push_back(fp);
        scene.objects.push_back(std::move(obj));
        break;
      }
      if (++rejections >= params.max_rejections)
        throw PlacementFailure("spawn_heap: rejection budget exhausted placing object " + std::to_string(i));
    }
  }
  return scene;
}

RenderedView render(const Scene& scene, const CameraModel& cam, const RenderOptions& opts) {
  RenderedView view{RgbImage(cam.width, cam.height, opts.table_color),
                    DepthImage(cam.width, cam.height, scene.table_depth)};
  GrayImage top(cam.width, cam.height, 0.0);
  for (const SceneObject& o : scene.objects) {
    const Polygon fp = o.footprint();
    const geom::Aabb b = geom::bounds(fp);
    const Vec2 lo = cam.to_image({b.x_min, b.y_min});
    const Vec2 hi = cam.to_image({b.x_max, b.y_max});
    const int x0 = std::max(0, static_cast<int>(std::floor(lo.x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(lo.y)));
    const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(hi.x)));
    const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(hi.y)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!geom::contains(fp, cam.pixel_center({x, y}))) continue;
        if (o.height > top(x, y)) {
          top(x, y) = o.height;
          view.rgb(x, y) = o.color;
        }
      }
    }
  }
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) view.depth(x, y) = scene.table_depth - top(x, y);

  if (opts.depth_noise > 0.0) {
    Rng rng(opts.noise_seed);
    for (double& d : view.depth.pixels()) {
      // Box-Muller
      const double u1 = std::max(rng.uniform(), 1e-300);
      const double u2 = rng.uniform();
      d += opts.depth_noise * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
  }
  return view;
}

DepthImage background(const Scene& scene, const CameraModel& cam) {
  return DepthImage(cam.width, cam.height, scene.table_depth);
}

namespace {

// Sweeps the closed gripper over `travel` (a fraction of the planned path);
// empty when the cascade does not settle.
std::optional<PushResult> sweep(const Scene& scene, const PushAction& action, const GripperParams& gripper,
                                const CameraModel& cam, int max_iterations, double travel) {
  PushResult res{scene, {}};
  const Vec2 start = cam.to_world(action.start);
  const Vec2 end = start + travel * (cam.to_world(action.end) - start);
  const double length = geom::norm(end - start);
  if (length <= 0.0) return res;
  const Vec2 dir = (1.0 / length) * (end - start);
  const Vec2 lateral = geom::perp(dir);
  const double s_start = geom::dot(start, dir);
  const double s_end = geom::dot(end, dir);
  const double lat0 = geom::dot(start, lateral);
  const double half_span = 0.5 * gripper.finger_span;
  // Objects whose top is above the gripper tip are swept along.
  const double tip_height = scene.table_depth - action.entry_depth;

  std::vector<SceneObject>& objs = res.scene.objects;
  const std::size_t n = objs.size();

  // Order along the push axis before the sweep; cascades only move the
  // leading member of a pair forward, which preserves this order.
  std::vector<double> order_key(n);
  for (std::size_t i = 0; i < n; ++i) order_key[i] = geom::dot(Vec2{objs[i].pose.x, objs[i].pose.y}, dir);

  std::vector<Polygon> fps(n);
  for (std::size_t i = 0; i < n; ++i) fps[i] = objs[i].footprint();

  auto translate = [&](std::size_t i, Vec2 d) {
    objs[i].pose.x += d.x;
    objs[i].pose.y += d.y;
    if (clamp_into(objs[i], res.scene.workspace)) add_unique(res.events.clamped_ids, objs[i].id);
    fps[i] = objs[i].footprint();
    add_unique(res.events.moved_ids, objs[i].id);
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (objs[i].height <= tip_height) continue;
    const geom::Interval along = geom::project(fps[i], dir);
    const geom::Interval across = geom::project(fps[i], lateral);
    const bool in_corridor = across.hi >= lat0 - half_span && across.lo <= lat0 + half_span &&
                             along.hi >= s_start && along.lo <= s_end;
    if (!in_corridor) continue;
    add_unique(res.events.contacted_ids, objs[i].id);
    const double shift = s_end - along.lo;
    if (shift > 0.0) translate(i, shift * dir);
  }

  constexpr double slack = 1e-6;
  constexpr double resolve_threshold = 1e-7;
  for (int iter = 0;; ++iter) {
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!geom::bounds(fps[i]).overlaps(geom::bounds(fps[j]))) continue;
        const geom::Penetration pen = geom::penetration(fps[i], fps[j]);
        if (pen.depth <= resolve_threshold) continue;
        any = true;
        const bool j_leads = order_key[j] > order_key[i] || (order_key[j] == order_key[i] && j > i);
        const std::size_t back = j_leads ? i : j;
        const std::size_t front = j_leads ? j : i;
        const double t = geom::separation_along(fps[back], fps[front], dir);
        // Prefer sliding the leading object along the push; fall back to a
        // symmetric minimum translation when that is blocked or far larger.
        if (std::isfinite(t) && t <= 4.0 * pen.depth + 0.01) {
          translate(front, (t + slack) * dir);
          if (!geom::overlaps(fps[back], fps[front], resolve_threshold)) continue;
        }
        const geom::Penetration p2 = geom::penetration(fps[i], fps[j]);
        if (p2.depth <= resolve_threshold) continue;
        const double h = 0.5 * (p2.depth + slack);
        translate(i, -h * p2.normal);
        translate(j, h * p2.normal);
      }
    }
    res.events.iterations = iter + 1;
    if (!any) break;
    if (iter + 1 >= max_iterations) {
      if (max_penetration(res.scene) > kPenetrationTolerance) return std::nullopt;
      break;
    }
  }
  return res;
}

}  // namespace

PushResult apply_push(const Scene& scene, const PushAction& action, const GripperParams& gripper,
                      const CameraModel& cam, int max_iterations) {
  if (auto full = sweep(scene, action, gripper, cam, max_iterations, 1.0)) return std::move(*full);
  // The heap jammed against the workspace boundary: the gripper stalls at
  // the farthest point of its path where everything still settles.
  std::optional<PushResult> best;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 10; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (auto r = sweep(scene, action, gripper, cam, max_iterations, mid)) {
      best = std::move(r);
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!best) throw NonConvergence("apply_push: separation did not converge");
  best->events.stalled = true;
  return std::move(*best);
}

GraspResult attempt_grasp(const Scene& scene, const GraspPose& pose, const GripperParams& gripper,
                          const CameraModel& cam, const GraspError& error) {
  GraspResult res{scene, {}};
  const Vec2 c = cam.pixel_center(pose.center) + error.offset;
  const Vec2 u{std::cos(pose.angle + error.angle), std::sin(pose.angle + error.angle)};
  // Fingers sit just inside the rectangle ends; the jaws close over the gap
  // between their inner faces.
  const double half = 0.5 * gripper.opening;
  const double inner = half - gripper.finger_span;
  const double mid = half - 0.5 * gripper.finger_span;
  const Vec2 p = c - inner * u;
  const Vec2 q = c + inner * u;

  std::vector<std::size_t> jaws;
  std::vector<Polygon> fps;
  fps.reserve(scene.objects.size());
  double tallest = 0.0;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    fps.push_back(scene.objects[i].footprint());
    if (geom::segment_intersects(fps.back(), p, q)) {
      jaws.push_back(i);
      tallest = std::max(tallest, scene.objects[i].height);
    }
  }
  const double z_insert = std::max(0.0, tallest - gripper.insert_depth);

  for (const Vec2 finger_center : {c - mid * u, c + mid * u}) {
    const Polygon finger =
        geom::oriented_rect(finger_center, u, 0.5 * gripper.finger_span, 0.5 * gripper.finger_thickness);
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      if (scene.objects[i].height > z_insert && geom::overlaps(finger, fps[i], 0.0)) {
        res.outcome.failure_reason = FailureReason::collision;
        return res;
      }
    }
  }

  // The jaws close at z_insert; anything lower stays on the table.
  std::erase_if(jaws, [&](std::size_t i) { return scene.objects[i].height <= z_insert; });
  if (jaws.empty()) {
    res.outcome.failure_reason = FailureReason::empty_jaws;
    return res;
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const std::size_t i : jaws) {
    const geom::Interval iv = geom::project(fps[i], u);
    lo = std::min(lo, iv.lo);
    hi = std::max(hi, iv.hi);
  }
  if (hi - lo > gripper.opening - 2.0 * gripper.grip_margin) {
    res.outcome.failure_reason = FailureReason::too_wide;
    return res;
  }

  // Objects squeezed together are lifted as one body; when that body would
  // twist out, only individually balanced objects stay between the fingers.
  const Vec2 v = geom::perp(u);
  const auto balanced = [&](std::span<const std::size_t> group) {
    double area = 0.0, lo_v = std::numeric_limits<double>::infinity(), hi_v = -lo_v;
    Vec2 moment{0, 0};
    for (const std::size_t i : group) {
      const double a = std::abs(geom::signed_area(fps[i]));
      area += a;
      moment += a * geom::centroid(fps[i]);
      const geom::Interval iv = geom::project(fps[i], v);
      lo_v = std::min(lo_v, iv.lo);
      hi_v = std::max(hi_v, iv.hi);
    }
    const double offset = std::abs(geom::dot(v, (1.0 / area) * moment - c));
    return offset <= gripper.max_grasp_offset * 0.5 * (hi_v - lo_v);
  };
  if (!balanced(jaws))
    std::erase_if(jaws, [&](std::size_t i) { return !balanced(std::span<const std::size_t>(&i, 1)); });
  if (jaws.empty()) {
    res.outcome.failure_reason = FailureReason::slip;
    return res;
  }

  res.outcome.success = true;
  for (const std::size_t i : jaws) res.outcome.picked_ids.push_back(scene.objects[i].id);
  res.outcome.multi_pick = res.outcome.picked_ids.size() >= 2;
  std::erase_if(res.scene.objects, [&](const SceneObject& o) {
    return std::find(res.outcome.picked_ids.begin(), res.outcome.picked_ids.end(), o.id) !=
           res.outcome.picked_ids.end();
  });
  return res;
}

double max_penetration(const Scene& scene) {
  double worst = 0.0;
  std::vector<Polygon> fps;
  for (const SceneObject& o : scene.objects) fps.push_back(o.footprint());
  for (std::size_t i = 0; i < fps.size(); ++i)
    for (std::size_t j = i + 1; j < fps.size(); ++j) {
      if (!geom::bounds(fps[i]).overlaps(geom::bounds(fps[j]))) continue;
      worst = std::max(worst, geom::penetration(fps[i], fps[j]).depth);
    }
  return worst;
}

}  // namespace declutter::sim
