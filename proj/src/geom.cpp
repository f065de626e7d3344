#include "dimerlab/geom.hpp"

#include <algorithm>

namespace dimer {

bool on_segment(Vec2 a, Vec2 b, Vec2 p, double tol) {
  Vec2 ab = b - a, ap = p - a;
  double L = ab.norm();
  if (L < tol) return (p - a).norm() < tol;
  double c = ab.cross(ap) / L;
  if (std::fabs(c) > tol) return false;
  double t = ab.dot(ap) / (L * L);
  return t > -tol && t < 1 + tol;
}

int point_in_polygon(const std::vector<Vec2>& poly, Vec2 p, double tol) {
  size_t n = poly.size();
  for (size_t i = 0; i < n; i++) {
    if (on_segment(poly[i], poly[(i + 1) % n], p, tol)) return 2;
  }
  // ray cast toward +x
  bool in = false;
  for (size_t i = 0; i < n; i++) {
    Vec2 a = poly[i], b = poly[(i + 1) % n];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xh = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (xh > p.x) in = !in;
    }
  }
  return in ? 1 : 0;
}

std::optional<double> segment_crossing(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  Vec2 r = b - a, s = d - c;
  double denom = r.cross(s);
  if (denom == 0) return std::nullopt;
  double t = (c - a).cross(s) / denom;
  double u = (c - a).cross(r) / denom;
  const double eps = 1e-12;
  if (t <= eps || t >= 1 - eps || u <= eps || u >= 1 - eps) return std::nullopt;
  return t;
}

bool segments_touch(Vec2 a, Vec2 b, Vec2 c, Vec2 d, double tol) {
  if (segment_crossing(a, b, c, d)) return true;
  return on_segment(a, b, c, tol) || on_segment(a, b, d, tol) ||
         on_segment(c, d, a, tol) || on_segment(c, d, b, tol);
}

std::vector<IntPoint> convex_hull(std::vector<IntPoint> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  size_t n = pts.size();
  if (n <= 2) return pts;
  auto cr = [](IntPoint O, IntPoint A, IntPoint B) {
    return (A.x - O.x) * (B.y - O.y) - (A.y - O.y) * (B.x - O.x);
  };
  std::vector<IntPoint> h(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; i++) {
    while (k >= 2 && cr(h[k - 2], h[k - 1], pts[i]) <= 0) k--;
    h[k++] = pts[i];
  }
  size_t lower = k + 1;
  for (size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cr(h[k - 2], h[k - 1], pts[i]) <= 0) k--;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

std::vector<Vec2> convex_hull_d(std::vector<Vec2> pts, double tol) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [&](Vec2 a, Vec2 b) { return (a - b).norm() < tol; }),
            pts.end());
  size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Vec2> h(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; i++) {
    while (k >= 2 && cross3(h[k - 2], h[k - 1], pts[i]) <= tol) k--;
    h[k++] = pts[i];
  }
  size_t lower = k + 1;
  for (size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross3(h[k - 2], h[k - 1], pts[i]) <= tol) k--;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; i++) a += poly[i].cross(poly[(i + 1) % n]);
  return 0.5 * a;
}

Vec2 polygon_centroid(const std::vector<Vec2>& poly) {
  double a = 0;
  Vec2 c{0, 0};
  size_t n = poly.size();
  for (size_t i = 0; i < n; i++) {
    double w = poly[i].cross(poly[(i + 1) % n]);
    a += w;
    c = c + (poly[i] + poly[(i + 1) % n]) * w;
  }
  if (std::fabs(a) < 1e-30) {
    for (auto& p : poly) c = c + p;
    return c * (1.0 / poly.size());
  }
  return c * (1.0 / (3.0 * a));
}

}  // namespace dimer
