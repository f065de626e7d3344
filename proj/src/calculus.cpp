#include "dimerlab/calculus.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <sstream>

#include "dimerlab/error.hpp"

namespace dimer {

// ---- support function ----

double SupportFunction::operator()(Vec2 x) const {
  if (hull.empty()) throw Error(Err::MalformedInput, "support function needs a nonempty hull");
  double m = hull[0].dot(x);
  for (size_t i = 1; i < hull.size(); ++i) m = std::max(m, hull[i].dot(x));
  return m;
}

double SupportFunction::lipschitz() const {
  double m = 0;
  for (auto& p : hull) m = std::max(m, p.norm());
  return m;
}

bool SupportFunction::contains(Vec2 p, double tol) const {
  if (hull.empty()) return false;
  if (hull.size() == 1) return (p - hull[0]).norm() <= tol;
  size_t n = hull.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = hull[i], b = hull[(i + 1) % n];
    double len = (b - a).norm();
    if (len < tol) continue;
    if (cross3(a, b, p) < -tol * len) return false;
  }
  return true;
}

SupportFunction support_function(const NewtonPolygon& np) {
  // The polygon is stored in homology coordinates (a,b); the height drift per
  // unit displacement is (b,-a), so the hull is rotated into gradient
  // coordinates here. Rotation preserves counterclockwise order.
  SupportFunction s;
  for (auto& p : np.hull) s.hull.push_back({double(p.y), -double(p.x)});
  if (s.hull.empty()) throw Error(Err::MalformedInput, "empty Newton polygon");
  return s;
}

SupportFunction support_function(std::vector<Vec2> pts) {
  if (pts.empty()) throw Error(Err::MalformedInput, "support function needs points");
  SupportFunction s;
  s.hull = convex_hull_d(std::move(pts));
  return s;
}

// ---- equilateral mesh ----

namespace {

constexpr double kRowRatio = 0.8660254037844386;  // sqrt(3)/2

void build_mesh(AsymptoticHeightField& f, const std::vector<Vec2>& omega, double ell) {
  if (ell <= 0) throw Error(Err::MalformedInput, "mesh size must be positive");
  if (omega.size() < 3) throw Error(Err::MalformedInput, "domain needs at least 3 vertices");
  f.domain = omega;
  f.ell = ell;
  double minx = omega[0].x, maxx = minx, miny = omega[0].y, maxy = miny;
  for (auto& p : omega) {
    minx = std::min(minx, p.x), maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y), maxy = std::max(maxy, p.y);
  }
  double rh = ell * kRowRatio;
  double x0 = minx - ell, y0 = miny - rh;
  f.nx = (int)std::ceil((maxx - x0) / ell) + 2;
  f.ny = (int)std::ceil((maxy - y0) / rh) + 2;
  f.pts.clear();
  f.pts.reserve((size_t)f.nx * f.ny);
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i)
      f.pts.push_back({x0 + i * ell + (j & 1) * ell / 2, y0 + j * rh});
  f.tris.clear();
  for (int j = 0; j + 1 < f.ny; ++j)
    for (int i = 0; i + 1 < f.nx; ++i) {
      int a = j * f.nx + i, b = a + 1;          // row j
      int c = a + f.nx, d = c + 1;              // row j+1
      if (j & 1) {
        f.tris.push_back({a, d, c});
        f.tris.push_back({a, b, d});
      } else {
        f.tris.push_back({a, b, c});
        f.tris.push_back({b, d, c});
      }
    }
  for (auto& t : f.tris)
    if (cross3(f.pts[t.a], f.pts[t.b], f.pts[t.c]) < 0) std::swap(t.b, t.c);
  f.value.assign(f.pts.size(), 0.0);
  f.grad.assign(f.tris.size(), {});
  f.active.assign(f.tris.size(), 0);
  f.flagged.assign(f.tris.size(), 0);
}

void compute_grads(AsymptoticHeightField& f) {
  for (size_t t = 0; t < f.tris.size(); ++t) {
    Vec2 A = f.pts[f.tris[t].a], B = f.pts[f.tris[t].b], C = f.pts[f.tris[t].c];
    double va = f.value[f.tris[t].a], vb = f.value[f.tris[t].b], vc = f.value[f.tris[t].c];
    Vec2 e1 = B - A, e2 = C - A;
    double det = e1.cross(e2);
    f.grad[t] = {((vb - va) * e2.y - (vc - va) * e1.y) / det,
                 (e1.x * (vc - va) - e2.x * (vb - va)) / det};
  }
}

bool tri_meets_polygon(const std::vector<Vec2>& poly, Vec2 A, Vec2 B, Vec2 C) {
  for (Vec2 p : {A, B, C})
    if (point_in_polygon(poly, p, 1e-12) != 0) return true;
  std::vector<Vec2> tri{A, B, C};
  for (auto& p : poly)
    if (point_in_polygon(tri, p, 1e-12) != 0) return true;
  size_t n = poly.size();
  Vec2 side[3][2] = {{A, B}, {B, C}, {C, A}};
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % n];
    for (auto& s : side)
      if (segment_crossing(s[0], s[1], a, b) || segments_touch(s[0], s[1], a, b)) return true;
  }
  return false;
}

void compute_active(AsymptoticHeightField& f) {
  for (size_t t = 0; t < f.tris.size(); ++t)
    f.active[t] =
        tri_meets_polygon(f.domain, f.pts[f.tris[t].a], f.pts[f.tris[t].b], f.pts[f.tris[t].c]);
}

void compute_flags(AsymptoticHeightField& f, const SupportFunction& theta) {
  for (size_t t = 0; t < f.tris.size(); ++t)
    f.flagged[t] = f.active[t] && !theta.contains(f.grad[t], 1e-7);
}

struct Bary {
  double wa, wb, wc;
  double worst() const { return std::min({wa, wb, wc}); }
};

Bary barycentric(Vec2 A, Vec2 B, Vec2 C, Vec2 p) {
  double det = cross3(A, B, C);
  return {cross3(B, C, p) / det, cross3(C, A, p) / det, cross3(A, B, p) / det};
}

}  // namespace

int AsymptoticHeightField::locate(Vec2 p) const {
  if (tris.empty()) throw Error(Err::MalformedInput, "empty mesh");
  double rh = ell * kRowRatio;
  double y0 = pts[0].y;
  int per_strip = 2 * (nx - 1);
  int j = (int)std::floor((p.y - y0) / rh);
  j = std::clamp(j, 0, ny - 2);
  int best = -1;
  double best_worst = -1e18;
  for (int dj : {0, -1, 1}) {
    int jj = j + dj;
    if (jj < 0 || jj > ny - 2) continue;
    for (int t = jj * per_strip; t < (jj + 1) * per_strip; ++t) {
      Bary w = barycentric(pts[tris[t].a], pts[tris[t].b], pts[tris[t].c], p);
      double worst = w.worst();
      if (worst > best_worst) {
        best_worst = worst;
        best = t;
      }
      if (worst >= -1e-12) return t;
    }
    if (dj == 0 && best_worst >= -1e-12) return best;
  }
  return best;
}

double AsymptoticHeightField::operator()(Vec2 p) const {
  int t = locate(p);
  Bary w = barycentric(pts[tris[t].a], pts[tris[t].b], pts[tris[t].c], p);
  return w.wa * value[tris[t].a] + w.wb * value[tris[t].b] + w.wc * value[tris[t].c];
}

int AsymptoticHeightField::flagged_count() const {
  int n = 0;
  for (char c : flagged) n += c;
  return n;
}

double AsymptoticHeightField::max_abs_error(const std::function<double(Vec2)>& h) const {
  std::vector<char> used(pts.size(), 0);
  for (size_t t = 0; t < tris.size(); ++t)
    if (active[t]) used[tris[t].a] = used[tris[t].b] = used[tris[t].c] = 1;
  double m = 0;
  for (size_t i = 0; i < pts.size(); ++i)
    if (used[i]) m = std::max(m, std::abs(value[i] - h(pts[i])));
  return m;
}

std::string AsymptoticHeightField::to_csv() const {
  std::string out;
  char buf[128];
  snprintf(buf, sizeof buf, "# ell %.17g\n", ell);
  out += buf;
  out += "# domain";
  for (auto& p : domain) {
    snprintf(buf, sizeof buf, " %.17g %.17g", p.x, p.y);
    out += buf;
  }
  out += "\nx,y,value\n";
  for (size_t i = 0; i < pts.size(); ++i) {
    snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", pts[i].x, pts[i].y, value[i]);
    out += buf;
  }
  return out;
}

AsymptoticHeightField AsymptoticHeightField::from_csv(const std::string& text) {
  double ell = 0;
  std::vector<Vec2> domain;
  std::vector<double> xs, ys, vs;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (line.rfind("# ell", 0) == 0) {
      ell = std::strtod(line.c_str() + 5, nullptr);
    } else if (line.rfind("# domain", 0) == 0) {
      std::istringstream ds(line.substr(8));
      double x, y;
      while (ds >> x >> y) domain.push_back({x, y});
    } else if (line.rfind("x,y", 0) == 0 || line[0] == '#') {
      continue;
    } else {
      double x, y, v;
      if (sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &v) != 3)
        throw Error(Err::MalformedInput, "bad field CSV row: " + line);
      xs.push_back(x), ys.push_back(y), vs.push_back(v);
    }
  }
  if (ell <= 0 || domain.size() < 3)
    throw Error(Err::MalformedInput, "field CSV is missing ell or domain header");
  AsymptoticHeightField f;
  build_mesh(f, domain, ell);
  if (xs.size() != f.pts.size())
    throw Error(Err::GridMismatch, "field CSV row count does not match the mesh");
  for (size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - f.pts[i].x) > 1e-9 || std::abs(ys[i] - f.pts[i].y) > 1e-9)
      throw Error(Err::GridMismatch, "field CSV point order does not match the mesh");
    f.value[i] = vs[i];
  }
  compute_grads(f);
  compute_active(f);
  return f;
}

AsymptoticHeightField pl_approximation(const std::function<double(Vec2)>& h,
                                       const std::vector<Vec2>& omega, double ell,
                                       const SupportFunction& theta) {
  AsymptoticHeightField f;
  build_mesh(f, omega, ell);
  for (size_t i = 0; i < f.pts.size(); ++i) f.value[i] = h(f.pts[i]);
  compute_grads(f);
  compute_active(f);
  compute_flags(f, theta);
  return f;
}

// ---- continuous extensions ----

namespace {

std::vector<Vec2> boundary_samples(const std::vector<Vec2>& omega, double ell, int factor) {
  std::vector<Vec2> out;
  size_t n = omega.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = omega[i], b = omega[(i + 1) % n];
    double len = (b - a).norm();
    int k = std::max(4, (int)std::ceil(factor * len / ell));
    for (int t = 0; t < k; ++t) out.push_back(a + (b - a) * (double(t) / k));
  }
  return out;
}

AsymptoticHeightField extension_field(const std::vector<Vec2>& omega, const BoundaryFn& chi,
                                      const SupportFunction& theta, double ell, bool take_max) {
  if (!extendable(omega, chi, theta))
    throw Error(Err::NotExtendable, "boundary data violates the support Lipschitz criterion");
  AsymptoticHeightField f;
  build_mesh(f, omega, ell);
  auto eval_all = [&](int factor, std::vector<double>& out) {
    auto samples = boundary_samples(omega, ell, factor);
    std::vector<double> cs(samples.size());
    for (size_t s = 0; s < samples.size(); ++s) cs[s] = chi(samples[s]);
    for (size_t i = 0; i < f.pts.size(); ++i) {
      double best = take_max ? 1e300 : -1e300;
      for (size_t s = 0; s < samples.size(); ++s) {
        double v = take_max ? cs[s] + theta(f.pts[i] - samples[s])
                            : cs[s] - theta(f.pts[i] - samples[s]);
        best = take_max ? std::min(best, v) : std::max(best, v);
      }
      out[i] = best;
    }
  };
  std::vector<double> cur(f.pts.size()), next(f.pts.size());
  int factor = 4;
  eval_all(factor, cur);
  for (int round = 0; round < 3; ++round) {
    factor *= 2;
    eval_all(factor, next);
    double moved = 0;
    for (size_t i = 0; i < cur.size(); ++i) moved = std::max(moved, std::abs(next[i] - cur[i]));
    cur.swap(next);
    if (moved <= 1e-6) break;
  }
  f.value = cur;
  compute_grads(f);
  compute_active(f);
  compute_flags(f, theta);
  return f;
}

}  // namespace

bool extendable(const std::vector<Vec2>& omega, const BoundaryFn& chi,
                const SupportFunction& theta, int samples_per_edge) {
  std::vector<Vec2> samples;
  size_t n = omega.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = omega[i], b = omega[(i + 1) % n];
    for (int t = 0; t < samples_per_edge; ++t)
      samples.push_back(a + (b - a) * (double(t) / samples_per_edge));
  }
  double tol = 1e-9 * (1 + theta.lipschitz());
  std::vector<double> cs(samples.size());
  for (size_t s = 0; s < samples.size(); ++s) cs[s] = chi(samples[s]);
  for (size_t i = 0; i < samples.size(); ++i)
    for (size_t j = 0; j < samples.size(); ++j)
      if (i != j && cs[i] - cs[j] > theta(samples[i] - samples[j]) + tol) return false;
  return true;
}

AsymptoticHeightField max_extension(const std::vector<Vec2>& omega, const BoundaryFn& chi,
                                    const SupportFunction& theta, double ell) {
  return extension_field(omega, chi, theta, ell, true);
}

AsymptoticHeightField min_extension(const std::vector<Vec2>& omega, const BoundaryFn& chi,
                                    const SupportFunction& theta, double ell) {
  return extension_field(omega, chi, theta, ell, false);
}

// ---- graph side ----

namespace {

// Incremental bipartite matcher with a rollback journal. mate[] maps a vertex
// to its matched edge id; locked vertices are frozen by earlier decisions.
struct Matcher {
  const Graph& g;
  std::vector<std::vector<int>> inc;
  std::vector<int> mate;
  std::vector<char> dead, locked, req, vis;
  std::vector<std::pair<int, int>> journal;

  explicit Matcher(const Graph& gr) : g(gr) {
    inc.resize(g.verts.size());
    for (int e = 0; e < (int)g.edges.size(); ++e) {
      inc[g.edges[e].w].push_back(e);
      inc[g.edges[e].b].push_back(e);
    }
    mate.assign(g.verts.size(), -1);
    dead.assign(g.edges.size(), 0);
    locked.assign(g.verts.size(), 0);
    req.resize(g.verts.size());
    for (int v = 0; v < (int)g.verts.size(); ++v) req[v] = !g.verts[v].boundary;
    vis.assign(g.verts.size(), 0);
  }
  int other(int e, int v) const { return g.edges[e].w == v ? g.edges[e].b : g.edges[e].w; }
  void set_mate(int v, int e) {
    journal.push_back({v, mate[v]});
    mate[v] = e;
  }
  bool kuhn(int v) {
    for (int e : inc[v]) {
      if (dead[e]) continue;
      int u = other(e, v);
      if (locked[u] || vis[u]) continue;
      vis[u] = 1;
      int pu = mate[u] < 0 ? -1 : other(mate[u], u);
      if (pu < 0 || kuhn(pu)) {
        set_mate(v, e);
        set_mate(u, e);
        return true;
      }
    }
    return false;
  }
  bool augment(int v) {
    std::fill(vis.begin(), vis.end(), 0);
    return kuhn(v);
  }
  // Shortest alternating path via BFS. Used for boundary repair, where the
  // nearest free vertex is a cut stub a step away and a depth-first search
  // would rewire a long chain instead.
  bool augment_shortest(int v) {
    std::fill(vis.begin(), vis.end(), 0);
    std::vector<int> pe(g.verts.size(), -1);
    std::deque<int> q{v};
    vis[v] = 1;
    int end = -1;
    while (!q.empty() && end < 0) {
      int o = q.front();
      q.pop_front();
      for (int e : inc[o]) {
        if (dead[e]) continue;
        int u = other(e, o);
        if (locked[u] || vis[u]) continue;
        vis[u] = 1;
        pe[u] = e;
        if (mate[u] < 0) {
          end = u;
          break;
        }
        int pu = other(mate[u], u);
        if (!vis[pu]) {
          vis[pu] = 1;
          q.push_back(pu);
        }
      }
    }
    if (end < 0) return false;
    int u = end;
    while (true) {
      int e = pe[u];
      int o = other(e, u);
      int old = mate[o];
      set_mate(u, e);
      set_mate(o, e);
      if (old < 0) break;
      u = other(old, o);
    }
    return true;
  }
  Cover cover() const {
    Cover out;
    for (int v = 0; v < (int)g.verts.size(); ++v)
      if (mate[v] >= 0 && g.edges[mate[v]].w == v) out.push_back(mate[v]);
    std::sort(out.begin(), out.end());
    return out;
  }
};

}  // namespace

Cover reference_cover(const Graph& g) {
  Matcher m(g);
  for (int v = 0; v < (int)g.verts.size(); ++v)
    if (m.req[v] && m.mate[v] < 0 && !m.augment(v))
      throw Error(Err::NoCover, "graph admits no cover");
  int open_req = 0;
  for (int v = 0; v < (int)g.verts.size(); ++v)
    if (m.req[v]) open_req++;
  Cover fixed;
  // Greedily force each edge in ascending id order; an edge that cannot be
  // forced after rematching the displaced vertices is excluded for good, so
  // the surviving set is the lexicographically first cover.
  for (int e = 0; e < (int)g.edges.size() && open_req > 0; ++e) {
    int a = g.edges[e].w, b = g.edges[e].b;
    if (m.locked[a] || m.locked[b]) {
      m.dead[e] = 1;
      continue;
    }
    m.journal.clear();
    int pa = m.mate[a] < 0 ? -1 : m.other(m.mate[a], a);
    int pb = m.mate[b] < 0 ? -1 : m.other(m.mate[b], b);
    m.set_mate(a, e);
    m.set_mate(b, e);
    m.locked[a] = m.locked[b] = 1;
    for (int z : {pa, pb})
      if (z >= 0 && z != a && z != b) m.set_mate(z, -1);
    bool ok = true;
    for (int z : {pa, pb}) {
      if (z < 0 || z == a || z == b) continue;
      if (m.req[z] && m.mate[z] < 0 && !m.augment(z)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      fixed.push_back(e);
      open_req -= (int)m.req[a] + (int)m.req[b];
    } else {
      for (auto it = m.journal.rbegin(); it != m.journal.rend(); ++it) m.mate[it->first] = it->second;
      m.locked[a] = m.locked[b] = 0;
      m.dead[e] = 1;
    }
  }
  std::sort(fixed.begin(), fixed.end());
  return fixed;
}

Cover periodic_reference(const FundamentalDomain& fd, const Graph& g) {
  Graph g1 = torus_quotient(fd, 1);
  if (g1.edges.size() != fd.edges.size())
    throw Error(Err::Internal, "scale-1 quotient does not mirror the fundamental domain");
  auto c1s = enumerate_covers(g1);
  if (c1s.empty()) throw Error(Err::NoCover, "fundamental domain admits no cover at scale 1");
  std::vector<char> in1(fd.edges.size(), 0);
  for (int e : c1s.front()) in1[e] = 1;

  auto frac = [](double t) { return t - std::floor(t + 1e-9); };
  std::vector<int> fdv(g.verts.size(), -1);
  for (int v = 0; v < (int)g.verts.size(); ++v) {
    if (g.verts[v].boundary) continue;  // stub tips sit at cut midpoints
    Vec2 p{frac(g.verts[v].pos.x), frac(g.verts[v].pos.y)};
    for (int k = 0; k < (int)fd.vertices.size(); ++k)
      if (std::abs(p.x - fd.vertices[k].pos.x) < 1e-6 &&
          std::abs(p.y - fd.vertices[k].pos.y) < 1e-6) {
        fdv[v] = k;
        break;
      }
    if (fdv[v] < 0) throw Error(Err::Internal, "patch vertex has no fundamental-domain source");
  }

  Matcher m(g);
  // seed with the periodic lift of the scale-1 reference, then repair the
  // clipped part near the boundary
  for (int e = 0; e < (int)g.edges.size(); ++e) {
    int w = g.edges[e].w, b = g.edges[e].b;
    if (fdv[w] < 0 || fdv[b] < 0) continue;
    Vec2 d = g.edges[e].disp;
    int src = -1;
    for (int k = 0; k < (int)fd.edges.size(); ++k) {
      const FdEdge& fe = fd.edges[k];
      if (fe.white != fdv[w] || fe.black != fdv[b]) continue;
      Vec2 want{fd.vertices[fe.black].pos.x + fe.dx - fd.vertices[fe.white].pos.x,
                fd.vertices[fe.black].pos.y + fe.dy - fd.vertices[fe.white].pos.y};
      if (std::abs(want.x - d.x) < 1e-6 && std::abs(want.y - d.y) < 1e-6) {
        src = k;
        break;
      }
    }
    if (src >= 0 && in1[src] && m.mate[w] < 0 && m.mate[b] < 0) {
      m.set_mate(w, e);
      m.set_mate(b, e);
    }
  }
  for (int v = 0; v < (int)g.verts.size(); ++v)
    if (m.req[v] && m.mate[v] < 0 && !m.augment_shortest(v))
      throw Error(Err::NoCover, "patch admits no cover");
  return m.cover();
}

std::vector<int> support_height_row(const Graph& g, const Cover& ref, int y, bool reversed) {
  if (g.torus) throw Error(Err::MalformedInput, "support heights are defined on patches");
  int F = g.faces.size();
  if (y < 0 || y >= F) throw Error(Err::MalformedInput, "face id out of range");
  auto mr = cover_mask(g, ref);
  std::vector<int> dist(F, INT_MAX);
  std::deque<int> q;
  dist[y] = 0;
  q.push_back(y);
  // 0-1 BFS; crossing edge e left to right raises the height by at most
  // 1-ref[e], right to left by at most ref[e]. Even half-edge ids are the
  // left side. Reversal swaps the two, yielding theta_hat(y, .).
  while (!q.empty()) {
    int f = q.front();
    q.pop_front();
    int df = dist[f];
    for (int h : g.faces[f].walk) {
      int e = h / 2;
      int to = (h & 1) ? g.face_of[h - 1] : g.face_of[h + 1];
      int fwd = (h & 1) ? mr[e] : 1 - mr[e];
      int w = reversed ? 1 - fwd : fwd;
      if (df + w < dist[to]) {
        dist[to] = df + w;
        if (w == 0)
          q.push_front(to);
        else
          q.push_back(to);
      }
    }
  }
  return dist;
}

int support_height_function(const Graph& g, const Cover& ref, int x, int y) {
  auto row = support_height_row(g, ref, y);
  if (x < 0 || x >= (int)row.size()) throw Error(Err::MalformedInput, "face id out of range");
  return row[x];
}

int support_height_function(const Graph& g, int x, int y) {
  return support_height_function(g, reference_cover(g), x, y);
}

int face_at(const Graph& g, Vec2 p) {
  int best = -1;
  double bd = 1e300;
  double inv = 1.0 / std::max(1, g.scale);
  for (int f = 0; f < (int)g.faces.size(); ++f) {
    if (g.faces[f].outer) continue;
    Vec2 s = g.faces[f].sample * inv;
    double d = (s - p).norm();
    if (d < bd) {
      bd = d;
      best = f;
    }
  }
  if (best < 0) throw Error(Err::EmptyPatch, "graph has no interior face");
  return best;
}

double normalized_support(const FundamentalDomain& fd, int n, Vec2 x, Vec2 y) {
  if (n < 1) throw Error(Err::MalformedInput, "scale must be at least 1");
  double dx = std::abs(x.x - y.x), dy = std::abs(x.y - y.y);
  double pad = 0.35 * std::max({dx, dy, 1.0 / n}) + 3.0 / n;
  // snap to whole lattice cells so the boundary repair of the periodic
  // reference sees the same cut geometry at every offset
  double minx = std::floor((std::min(x.x, y.x) - pad) * n) / n;
  double maxx = std::ceil((std::max(x.x, y.x) + pad) * n) / n;
  double miny = std::floor((std::min(x.y, y.y) - pad) * n) / n;
  double maxy = std::ceil((std::max(x.y, y.y) + pad) * n) / n;
  Graph g = planar_patch(fd, n, {{minx, miny}, {maxx, miny}, {maxx, maxy}, {minx, maxy}});
  Cover ref = periodic_reference(fd, g);
  auto row = support_height_row(g, ref, face_at(g, y));
  return row[face_at(g, x)] / double(n);
}

GraphExtension graph_extensions(const Graph& g, const std::map<int, int>& chi, const Cover& ref) {
  if (g.torus) throw Error(Err::MalformedInput, "extensions are defined on patches");
  // Patches with stubs carry explicit boundary cells; stub-free ones (Aztec,
  // grids) expose their rim as the outer face, which then acts as the single
  // boundary face.
  std::vector<int> bset = g.boundary_faces;
  if (bset.empty()) {
    for (int f = 0; f < (int)g.faces.size(); ++f)
      if (g.faces[f].outer) bset.push_back(f);
  }
  if (bset.empty()) throw Error(Err::MalformedInput, "graph has no boundary faces to extend from");
  int F = g.faces.size();
  std::vector<int> bchi;
  for (int b : bset) {
    auto it = chi.find(b);
    if (it == chi.end())
      throw Error(Err::MalformedInput,
                  "boundary data is missing face " + std::to_string(b));
    bchi.push_back(it->second);
  }
  GraphExtension out;
  out.ref = ref;
  out.hmax.h.assign(F, INT_MAX);
  out.hmin.h.assign(F, INT_MIN);
  std::vector<std::vector<int>> fwd(bset.size());
  for (size_t i = 0; i < bset.size(); ++i) {
    int y = bset[i];
    fwd[i] = support_height_row(g, ref, y);
    auto rev = support_height_row(g, ref, y, true);
    for (int x = 0; x < F; ++x) {
      out.hmax.h[x] = std::min(out.hmax.h[x], bchi[i] + fwd[i][x]);
      out.hmin.h[x] = std::max(out.hmin.h[x], bchi[i] - rev[x]);
    }
  }
  for (size_t i = 0; i < bset.size(); ++i)
    for (size_t j = 0; j < bset.size(); ++j) {
      int x = bset[i], y = bset[j];
      if (bchi[i] - bchi[j] > fwd[j][x])
        throw Error(Err::NotExtendable, "boundary data violates the height Lipschitz bound at faces " +
                                            std::to_string(x) + "," + std::to_string(y));
    }
  for (int x = 0; x < F; ++x)
    if (out.hmin.h[x] > out.hmax.h[x])
      throw Error(Err::Internal, "extension bounds crossed");
  return out;
}

HeightFunction graph_max_extension(const Graph& g, const std::map<int, int>& chi) {
  return graph_extensions(g, chi, reference_cover(g)).hmax;
}

HeightFunction graph_min_extension(const Graph& g, const std::map<int, int>& chi) {
  return graph_extensions(g, chi, reference_cover(g)).hmin;
}

Cover cover_from_heights(const Graph& g, const Cover& ref, const std::vector<int>& h) {
  if (h.size() != g.faces.size())
    throw Error(Err::MalformedInput, "height vector size does not match face count");
  auto mr = cover_mask(g, ref);
  Cover out;
  std::vector<int> deg(g.verts.size(), 0);
  for (int e = 0; e < (int)g.edges.size(); ++e) {
    int jump = h[g.face_of[2 * e + 1]] - h[g.face_of[2 * e]];
    int md = mr[e] + jump;
    if (md < 0 || md > 1)
      throw Error(Err::Infeasible, "height jump out of range at edge " + std::to_string(e));
    if (md) {
      out.push_back(e);
      deg[g.edges[e].w]++;
      deg[g.edges[e].b]++;
    }
  }
  for (int v = 0; v < (int)g.verts.size(); ++v) {
    if (deg[v] > 1 || (!g.verts[v].boundary && deg[v] != 1))
      throw Error(Err::Infeasible, "heights do not describe a cover at vertex " + std::to_string(v));
  }
  return out;
}

DiscretizedField discretize(const std::function<double(Vec2)>& h, const std::vector<Vec2>& omega,
                            const FundamentalDomain& fd, int n, const std::map<int, int>* chi_n) {
  if (n < 1) throw Error(Err::MalformedInput, "scale must be at least 1");
  DiscretizedField out;
  out.patch = planar_patch(fd, n, omega);
  const Graph& g = out.patch;
  if (g.faces.size() > 40000)
    throw Error(Err::TooLarge, "discretization patch has too many faces");
  out.ref = periodic_reference(fd, g);
  auto mr = cover_mask(g, out.ref);
  int F = g.faces.size();
  double inv = 1.0 / n;

  std::vector<int> samples;
  std::vector<Vec2> sample_pos(F);
  for (int f = 0; f < F; ++f) {
    if (g.faces[f].outer) continue;
    sample_pos[f] = g.faces[f].sample * inv;
    if (point_in_polygon(omega, sample_pos[f], 1e-9) != 0) samples.push_back(f);
  }
  if (samples.empty()) throw Error(Err::EmptyPatch, "no face samples inside the domain");

  const GraphExtension* ext = nullptr;
  GraphExtension ext_store;
  if (chi_n) {
    ext_store = graph_extensions(g, *chi_n, out.ref);
    ext = &ext_store;
  }

  std::vector<int> eta(F, INT_MAX);
  for (int y : samples) {
    int ay = (int)std::llround(n * h(sample_pos[y]));
    if (ext) ay = std::clamp(ay, ext->hmin.h[y], ext->hmax.h[y]);
    auto row = support_height_row(g, out.ref, y);
    for (int x = 0; x < F; ++x)
      if (row[x] != INT_MAX) eta[x] = std::min(eta[x], ay + row[x]);
  }
  if (ext) {
    for (int x = 0; x < F; ++x) {
      int c = std::clamp(eta[x], ext->hmin.h[x], ext->hmax.h[x]);
      if (c != eta[x]) {
        out.clamped++;
        out.max_clamp = std::max(out.max_clamp, std::abs(c - eta[x]));
        eta[x] = c;
      }
    }
  }
  out.eta.h = std::move(eta);
  out.eta.denom = 1;

  double delta = 0;
  if (chi_n) {
    for (auto& [b, v] : *chi_n) {
      Vec2 p = g.faces[b].sample * inv;
      delta = std::max(delta, std::abs(v * inv - h(p)));
    }
  }
  out.collar = std::max(std::sqrt(delta) / 4, 2.0 * inv);

  for (int x : samples)
    out.sup_err = std::max(out.sup_err, std::abs(h(sample_pos[x]) - out.eta.h[x] * inv));
  out.constant = n * out.sup_err;
  return out;
}

DiscretizedField discretize(const AsymptoticHeightField& h, const FundamentalDomain& fd, int n) {
  return discretize([&](Vec2 p) { return h(p); }, h.domain, fd, n, nullptr);
}

}  // namespace dimer
