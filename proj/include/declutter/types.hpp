#pragma once

#include "declutter/geometry.hpp"
#include "declutter/image.hpp"

namespace declutter {

/// Planar grasp in the image: closing axis at `angle` (radians, [0, pi),
/// x right / y down), jaw opening in pixels.
struct GraspPose {
  Pixel center;
  double angle = 0.0;
  double opening_px = 0.0;
  double gdi = 0.0;
  double local_clutter = 0.0;
  friend bool operator==(const GraspPose&, const GraspPose&) = default;
};

/// Linear closed-gripper sweep in image coordinates. `start` is sub-pixel:
/// it sits exactly on the line through the target centre and `end`.
struct PushAction {
  geom::Vec2 start;
  geom::Vec2 end;
  double entry_depth = 0.0;
  friend bool operator==(const PushAction&, const PushAction&) = default;
};

}  // namespace declutter
