#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "declutter/geometry.hpp"
#include "declutter/image.hpp"
#include "declutter/types.hpp"

namespace declutter::sim {

/// Allowed footprint overlap after any action resolution (m).
inline constexpr double kPenetrationTolerance = 1e-4;

/// Convex object outline in the object frame. Circles keep their radius and
/// are discretised to a regular polygon for all contact and raster work.
struct Shape {
  enum class Kind { polygon, circle };
  Kind kind = Kind::polygon;
  std::vector<geom::Vec2> vertices;
  double radius = 0.0;

  static Shape box(double w, double h);
  static Shape circle(double r);
  static Shape convex(std::vector<geom::Vec2> ccw_vertices);

  /// Local-frame outline, centroid at the origin (circles: regular polygon).
  const std::vector<geom::Vec2>& outline() const { return vertices; }
  double area() const;
  /// Largest distance between two outline points.
  double diameter() const;
  bool valid() const;
  friend bool operator==(const Shape&, const Shape&) = default;

  static constexpr int kCircleSegments = 24;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  friend bool operator==(const Pose&, const Pose&) = default;
};

struct SceneObject {
  int id = 0;
  Shape shape;
  Pose pose;
  double height = 0.0;
  Rgb color;

  geom::Polygon footprint() const;
  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Workspace {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.40;
  double y_max = 0.40;
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  geom::Vec2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool contains(geom::Vec2 p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
  friend bool operator==(const Workspace&, const Workspace&) = default;
};

struct Scene {
  std::vector<SceneObject> objects;
  Workspace workspace;
  double table_depth = 0.65;
  std::uint64_t rng_seed = 0;

  const SceneObject* find(int id) const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Orthographic overhead camera: pixel (u, v) has its centre at
/// (origin_x + (u + 0.5) / scale, origin_y + (v + 0.5) / scale).
struct CameraModel {
  int width = 208;
  int height = 208;
  double scale = 400.0;  // px per metre
  double origin_x = -0.06;
  double origin_y = -0.06;

  geom::Vec2 to_world(geom::Vec2 px) const;
  geom::Vec2 to_image(geom::Vec2 w) const;
  geom::Vec2 pixel_center(Pixel p) const { return to_world({double(p.x), double(p.y)}); }
  double to_pixels(double metres) const { return metres * scale; }
  /// Default camera covering `ws` plus a `margin` (m) on every side.
  static CameraModel covering(const Workspace& ws, double scale = 400.0, double margin = 0.06);
};

struct GripperParams {
  double opening = 0.10;
  double finger_span = 0.02;       // finger size along the closing axis; also the push corridor width
  double finger_thickness = 0.01;  // finger size across the closing axis
  double insert_depth = 0.02;
  double grip_margin = 0.005;
  // An object twists out of the fingers when its centroid lies farther from
  // the closing line than this fraction of its half-width across that line.
  double max_grasp_offset = 0.8;
};

enum class FailureReason { none, collision, too_wide, empty_jaws, slip };
const char* to_string(FailureReason r);

struct GraspOutcome {
  bool success = false;
  bool multi_pick = false;
  std::vector<int> picked_ids;
  FailureReason failure_reason = FailureReason::none;
};

struct PushEvents {
  std::vector<int> contacted_ids;  // touched by the gripper directly
  std::vector<int> moved_ids;      // any displacement, including cascades
  std::vector<int> clamped_ids;    // would have left the workspace
  int iterations = 0;
  bool stalled = false;  // stopped short of the planned end to avoid a jam
};

struct ShapeTemplate {
  std::string name;
  Shape shape;
  double height = 0.0;
  Rgb color;
};
using Catalog = std::vector<ShapeTemplate>;

/// Eight parametric proxies for household goods (boxes, cylinders, a
/// triangle, a chamfered block), heights 2-7 cm.
Catalog default_catalog();

struct HeapParams {
  Workspace workspace;
  double table_depth = 0.65;
  /// Upper bound on centroid distance to the anchor object, as a multiple of
  /// the larger of the two diameters.
  double spread = 1.5;
  /// Largest free gap left between a new object and its anchor (m).
  double max_gap = 0.005;
  int max_rejections = 10000;
};

Scene spawn_heap(std::uint64_t seed, int n, const Catalog& catalog, const HeapParams& params = {});

struct RenderOptions {
  Rgb table_color{0.52, 0.52, 0.52};
  /// Standard deviation of additive depth noise (m); 0 disables it.
  double depth_noise = 0.0;
  std::uint64_t noise_seed = 0;
};

struct RenderedView {
  RgbImage rgb;
  DepthImage depth;
};

RenderedView render(const Scene& scene, const CameraModel& cam, const RenderOptions& opts = {});

/// Depth image of the empty table for `scene`'s table depth.
DepthImage background(const Scene& scene, const CameraModel& cam);

struct PushResult {
  Scene scene;
  PushEvents events;
};

/// Quasi-static sweep of the closed gripper along the action (image
/// coordinates, converted through `cam`). A push that would jam objects
/// against the workspace boundary stops early and is flagged `stalled`.
/// Throws NonConvergence when even a short push cannot be resolved.
PushResult apply_push(const Scene& scene, const PushAction& action, const GripperParams& gripper,
                      const CameraModel& cam, int max_iterations = 100);

struct GraspResult {
  Scene scene;
  GraspOutcome outcome;
};

/// Offset between the commanded and the executed grasp (world frame).
struct GraspError {
  geom::Vec2 offset{0.0, 0.0};
  double angle = 0.0;
};

GraspResult attempt_grasp(const Scene& scene, const GraspPose& pose, const GripperParams& gripper,
                          const CameraModel& cam, const GraspError& error = {});

/// Largest pairwise SAT penetration depth (m) over all objects; <= 0 when no
/// two footprints touch.
double max_penetration(const Scene& scene);

}  // namespace declutter::sim
