#pragma once

#include <span>
#include <vector>

namespace declutter::geom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double norm(Vec2 a);
Vec2 normalized(Vec2 a);
Vec2 rotate(Vec2 a, double angle);
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

using Polygon = std::vector<Vec2>;

struct Interval {
  double lo;
  double hi;
};

struct Aabb {
  double x_min, y_min, x_max, y_max;
  bool overlaps(const Aabb& o) const {
    return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max && o.y_min <= y_max;
  }
};

double signed_area(std::span<const Vec2> poly);
Vec2 centroid(std::span<const Vec2> poly);
bool is_convex_ccw(std::span<const Vec2> poly);
Aabb bounds(std::span<const Vec2> poly);
Interval project(std::span<const Vec2> poly, Vec2 axis);

/// Point-in-convex-polygon (CCW), boundary counts as inside.
bool contains(std::span<const Vec2> poly, Vec2 p);

/// Axis-aligned rectangle centred at c with half extents along u and perp(u).
Polygon oriented_rect(Vec2 c, Vec2 u, double half_len, double half_width);

/// Minimum translation (depth, unit normal pointing from a to b) separating
/// two convex polygons. depth <= 0 means separated by at least -depth.
struct Penetration {
  double depth;
  Vec2 normal;
};
Penetration penetration(std::span<const Vec2> a, std::span<const Vec2> b);

bool overlaps(std::span<const Vec2> a, std::span<const Vec2> b, double tol = 0.0);

/// Smallest t >= 0 such that b translated by t*dir no longer overlaps a
/// (dir must be a unit vector). Returns 0 when already separated.
double separation_along(std::span<const Vec2> a, std::span<const Vec2> b, Vec2 dir);

/// True when the closed segment p-q intersects the convex polygon.
bool segment_intersects(std::span<const Vec2> poly, Vec2 p, Vec2 q);

/// Convex polygon clipping (Sutherland-Hodgman); both inputs CCW.
Polygon clip(std::span<const Vec2> subject, std::span<const Vec2> clipper);

}  // namespace declutter::geom
