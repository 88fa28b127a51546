#include "declutter/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace declutter::geom {

double norm(Vec2 a) { return std::hypot(a.x, a.y); }

Vec2 normalized(Vec2 a) {
  const double n = norm(a);
  return n > 0.0 ? Vec2{a.x / n, a.y / n} : Vec2{0.0, 0.0};
}

Vec2 rotate(Vec2 a, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

double signed_area(std::span<const Vec2> poly) {
  double acc = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) acc += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * acc;
}

Vec2 centroid(std::span<const Vec2> poly) {
  double a = 0.0;
  Vec2 c{};
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % n];
    const double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  if (std::abs(a) < 1e-300) return poly.empty() ? Vec2{} : poly.front();
  return (1.0 / (3.0 * a)) * c;
}

bool is_convex_ccw(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = poly[(i + 1) % n] - poly[i];
    const Vec2 e1 = poly[(i + 2) % n] - poly[(i + 1) % n];
    if (cross(e0, e1) <= 0.0) return false;
  }
  return signed_area(poly) > 0.0;
}

Aabb bounds(std::span<const Vec2> poly) {
  Aabb b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2 p : poly) {
    b.x_min = std::min(b.x_min, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.x_max = std::max(b.x_max, p.x);
    b.y_max = std::max(b.y_max, p.y);
  }
  return b;
}

Interval project(std::span<const Vec2> poly, Vec2 axis) {
  Interval iv{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Vec2 p : poly) {
    const double d = dot(p, axis);
    iv.lo = std::min(iv.lo, d);
    iv.hi = std::max(iv.hi, d);
  }
  return iv;
}

bool contains(std::span<const Vec2> poly, Vec2 p) {
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    if (cross(poly[(i + 1) % n] - poly[i], p - poly[i]) < 0.0) return false;
  }
  return true;
}

Polygon oriented_rect(Vec2 c, Vec2 u, double half_len, double half_width) {
  const Vec2 v = perp(u);
  return {c - half_len * u - half_width * v, c + half_len * u - half_width * v,
          c + half_len * u + half_width * v, c - half_len * u + half_width * v};
}

namespace {

template <typename Fn>
void for_each_edge_normal(std::span<const Vec2> poly, Fn&& fn) {
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2 e = poly[(i + 1) % n] - poly[i];
    const Vec2 nrm = normalized(Vec2{e.y, -e.x});
    if (nrm.x != 0.0 || nrm.y != 0.0) fn(nrm);
  }
}

}  // namespace

Penetration penetration(std::span<const Vec2> a, std::span<const Vec2> b) {
  Penetration best{std::numeric_limits<double>::infinity(), {1.0, 0.0}};
  auto test = [&](Vec2 axis) {
    const Interval ia = project(a, axis);
    const Interval ib = project(b, axis);
    // Overlap if b is pushed along +axis versus -axis.
    const double forward = ia.hi - ib.lo;
    const double backward = ib.hi - ia.lo;
    if (forward < best.depth) best = {forward, axis};
    if (backward < best.depth) best = {backward, -axis};
  };
  for_each_edge_normal(a, test);
  for_each_edge_normal(b, test);
  return best;
}

bool overlaps(std::span<const Vec2> a, std::span<const Vec2> b, double tol) {
  if (!bounds(a).overlaps(bounds(b))) return false;
  return penetration(a, b).depth > tol;
}

double separation_along(std::span<const Vec2> a, std::span<const Vec2> b, Vec2 dir) {
  // Ray exit from the Minkowski difference a - b along dir.
  double t = std::numeric_limits<double>::infinity();
  bool separated = false;
  auto test = [&](Vec2 axis) {
    for (const Vec2 n : {axis, -axis}) {
      const double h = project(a, n).hi - project(b, n).lo;
      if (h <= 0.0) separated = true;
      const double nd = dot(n, dir);
      if (nd > 1e-12) t = std::min(t, h / nd);
    }
  };
  for_each_edge_normal(a, test);
  for_each_edge_normal(b, test);
  if (separated) return 0.0;
  return std::max(0.0, t);
}

bool segment_intersects(std::span<const Vec2> poly, Vec2 p, Vec2 q) {
  // Separating-axis test with the segment as a degenerate polygon.
  const Vec2 seg[2] = {p, q};
  const std::span<const Vec2> s(seg, 2);
  auto separated_on = [&](Vec2 axis) {
    const Interval ia = project(poly, axis);
    const Interval ib = project(s, axis);
    return ia.hi < ib.lo || ib.hi < ia.lo;
  };
  bool sep = false;
  for_each_edge_normal(poly, [&](Vec2 n) { sep = sep || separated_on(n); });
  if (sep) return false;
  const Vec2 d = q - p;
  if (d.x != 0.0 || d.y != 0.0) return !separated_on(normalized(perp(d)));
  return contains(poly, p);
}

Polygon clip(std::span<const Vec2> subject, std::span<const Vec2> clipper) {
  Polygon out(subject.begin(), subject.end());
  for (std::size_t i = 0, n = clipper.size(); i < n && !out.empty(); ++i) {
    const Vec2 a = clipper[i];
    const Vec2 b = clipper[(i + 1) % n];
    auto side = [&](Vec2 p) { return cross(b - a, p - a); };
    Polygon in = std::move(out);
    out.clear();
    for (std::size_t j = 0, m = in.size(); j < m; ++j) {
      const Vec2 p = in[j];
      const Vec2 q = in[(j + 1) % m];
      const double sp = side(p);
      const double sq = side(q);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + t * (q - p));
      }
    }
  }
  return out;
}

}  // namespace declutter::geom
