#include "declutter/push.hpp"

#include <cmath>

#include "declutter/errors.hpp"

namespace declutter::push {

using geom::Vec2;

GrayImage squared_distance_with_border(const BinaryMask& mask, kernels::Exec exec) {
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask padded(w + 2, h + 2, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) padded(x + 1, y + 1) = mask(x, y) ? 1 : 0;
  const GrayImage full = kernels::squared_distance(padded, exec);
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = full(x + 1, y + 1);
  return out;
}

DistanceField distance_transform(const BinaryMask& mask, kernels::Exec exec) {
  DistanceField f{squared_distance_with_border(mask, exec)};
  for (double& v : f.values.pixels()) v = std::sqrt(v);
  return f;
}

Pixel freest_point(const DistanceField& field) {
  Pixel best{0, 0};
  double best_v = -1.0;
  for (int y = 0; y < field.values.height(); ++y)
    for (int x = 0; x < field.values.width(); ++x)
      if (field.values(x, y) > best_v) {
        best_v = field.values(x, y);
        best = {x, y};
      }
  return best;
}

PushAction plan_push(const DepthImage& depth, const BinaryMask& mask, Pixel selected_center,
                     const PushParams& params) {
  const Pixel end = freest_point(distance_transform(mask));
  const Vec2 c{double(selected_center.x), double(selected_center.y)};
  const Vec2 e{double(end.x), double(end.y)};
  const Vec2 dir = geom::normalized(e - c);
  if (dir.x == 0.0 && dir.y == 0.0) throw NoEntryPoint("plan_push: target already at the freest point");

  const double threshold = depth[selected_center] + params.entry_delta;
  for (int step = 1;; ++step) {
    const Vec2 p = c - (step * params.step_px) * dir;
    const int px = static_cast<int>(std::lround(p.x));
    const int py = static_cast<int>(std::lround(p.y));
    if (!depth.contains(px, py)) throw NoEntryPoint("plan_push: no entry point before the image border");
    if (depth(px, py) >= threshold) return PushAction{p, e, depth(px, py) - params.probe_margin};
  }
}

}  // namespace declutter::push
