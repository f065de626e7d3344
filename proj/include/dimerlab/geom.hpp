#pragma once
#include <cmath>
#include <optional>
#include <vector>

namespace dimer {

struct Vec2 {
  double x = 0, y = 0;
  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline double cross3(Vec2 a, Vec2 b, Vec2 c) { return (b - a).cross(c - a); }

// 0 = outside, 1 = inside, 2 = on boundary
int point_in_polygon(const std::vector<Vec2>& poly, Vec2 p, double tol = 1e-12);

bool on_segment(Vec2 a, Vec2 b, Vec2 p, double tol = 1e-12);

// Proper interior crossing of segments ab and cd; returns curve parameter along ab.
// Touching at endpoints or collinear overlap does not count.
std::optional<double> segment_crossing(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

bool segments_touch(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double tol = 1e-12);

struct IntPoint {
  long long x = 0, y = 0;
  bool operator==(const IntPoint&) const = default;
  bool operator<(const IntPoint& o) const { return x < o.x || (x == o.x && y < o.y); }
};

// Counterclockwise convex hull of integer points, no repeated first point.
std::vector<IntPoint> convex_hull(std::vector<IntPoint> pts);
std::vector<Vec2> convex_hull_d(std::vector<Vec2> pts, double tol = 1e-12);

double polygon_area(const std::vector<Vec2>& poly);
Vec2 polygon_centroid(const std::vector<Vec2>& poly);

}  // namespace dimer
