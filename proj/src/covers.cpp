#include "dimerlab/covers.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <deque>
#include <set>

#include "dimerlab/error.hpp"

namespace dimer {

std::vector<char> cover_mask(const Graph& g, const Cover& d) {
  std::vector<char> m(g.edges.size(), 0);
  for (int e : d) {
    if (e < 0 || e >= (int)g.edges.size()) throw Error(Err::MalformedInput, "cover references unknown edge");
    m[e] = 1;
  }
  return m;
}

std::vector<int> cover_delta(const Graph& g, const Cover& d) {
  std::vector<char> matched(g.verts.size(), 0);
  for (int e : d) {
    matched[g.edges[e].w] = 1;
    matched[g.edges[e].b] = 1;
  }
  std::vector<int> out;
  for (int v = 0; v < (int)g.verts.size(); ++v)
    if (g.verts[v].boundary && !matched[v]) out.push_back(v);
  return out;
}

BoundaryCondition BoundaryCondition::delta(std::vector<int> unmatched) {
  BoundaryCondition bc;
  bc.kind = Delta;
  bc.unmatched = std::move(unmatched);
  return bc;
}

BoundaryCondition BoundaryCondition::height(std::map<int, int> chi) {
  BoundaryCondition bc;
  bc.kind = Height;
  bc.chi = std::move(chi);
  return bc;
}

namespace {

struct Enumerator {
  const Graph& g;
  std::vector<std::vector<int>> incident;  // edge ids per vertex, ascending
  std::vector<char> vert_matched;
  std::vector<char> edge_dead;
  std::vector<char> required;  // vertex must end up matched
  std::vector<int> chosen;
  std::vector<Cover> out;

  explicit Enumerator(const Graph& gr) : g(gr) {
    incident.resize(g.verts.size());
    for (int e = 0; e < (int)g.edges.size(); ++e) {
      incident[g.edges[e].w].push_back(e);
      incident[g.edges[e].b].push_back(e);
    }
    vert_matched.assign(g.verts.size(), 0);
    edge_dead.assign(g.edges.size(), 0);
    required.assign(g.verts.size(), 0);
  }

  int next_pivot() const {
    for (int v = 0; v < (int)g.verts.size(); ++v)
      if (required[v] && !vert_matched[v]) return v;
    return -1;
  }

  void run() {
    int v = next_pivot();
    if (v < 0) {
      out.emplace_back(chosen);
      return;
    }
    for (int e : incident[v]) {
      if (edge_dead[e]) continue;
      int u = g.edges[e].w == v ? g.edges[e].b : g.edges[e].w;
      if (vert_matched[u]) continue;
      vert_matched[v] = vert_matched[u] = 1;
      chosen.push_back(e);
      run();
      chosen.pop_back();
      vert_matched[v] = vert_matched[u] = 0;
    }
  }
};

}  // namespace

std::vector<Cover> enumerate_covers(const Graph& g, const BoundaryCondition& bc,
                                    const EnumOptions& opt) {
  if (g.internal_count() > opt.max_internal && !opt.force)
    throw Error(Err::TooLarge, "refusing to enumerate covers of a graph with " +
                                   std::to_string(g.internal_count()) +
                                   " internal vertices (limit " + std::to_string(opt.max_internal) +
                                   "); pass force to override");

  Enumerator en(g);
  for (int v = 0; v < (int)g.verts.size(); ++v) en.required[v] = !g.verts[v].boundary;

  if (bc.kind == BoundaryCondition::Delta) {
    std::vector<char> in_delta(g.verts.size(), 0);
    for (int v : bc.unmatched) {
      if (v < 0 || v >= (int)g.verts.size() || !g.verts[v].boundary)
        throw Error(Err::MalformedInput, "delta condition lists a non-boundary vertex");
      in_delta[v] = 1;
    }
    for (int v = 0; v < (int)g.verts.size(); ++v)
      if (g.verts[v].boundary && !in_delta[v]) en.required[v] = 1;
    for (int e = 0; e < (int)g.edges.size(); ++e)
      if (in_delta[g.edges[e].w] || in_delta[g.edges[e].b]) en.edge_dead[e] = 1;
  }

  en.run();
  std::vector<Cover> covers = std::move(en.out);

  if (bc.kind != BoundaryCondition::Delta) {
    // Edges joining two boundary vertices are not reached by any pivot and
    // may be used or not, independently.
    std::vector<int> free_edges;
    for (int e = 0; e < (int)g.edges.size(); ++e)
      if (g.verts[g.edges[e].w].boundary && g.verts[g.edges[e].b].boundary) free_edges.push_back(e);
    if (!free_edges.empty()) {
      std::vector<Cover> expanded;
      for (const Cover& c : covers) {
        size_t m = free_edges.size();
        for (size_t bits = 0; bits < (size_t(1) << m); ++bits) {
          Cover c2 = c;
          for (size_t i = 0; i < m; ++i)
            if (bits & (size_t(1) << i)) c2.push_back(free_edges[i]);
          expanded.push_back(std::move(c2));
        }
      }
      covers = std::move(expanded);
    }
  }

  for (Cover& c : covers) std::sort(c.begin(), c.end());
  std::sort(covers.begin(), covers.end());

  if (bc.kind == BoundaryCondition::Height) {
    if (covers.empty()) return covers;
    if (g.boundary_faces.empty())
      throw Error(Err::MalformedInput, "height boundary condition needs a graph with boundary faces");
    std::set<int> want(g.boundary_faces.begin(), g.boundary_faces.end());
    std::set<int> got;
    for (auto& kv : bc.chi) got.insert(kv.first);
    if (want != got)
      throw Error(Err::MalformedInput, "height boundary condition must assign exactly the boundary faces");
    const Cover& ref = covers.front();
    int base = bc.chi.at(g.boundary_faces.front());
    std::vector<Cover> kept;
    for (const Cover& c : covers) {
      std::vector<int> bh = boundary_heights(g, c, ref);
      bool match = true;
      for (size_t i = 0; i < g.boundary_faces.size() && match; ++i)
        if (bh[i] != bc.chi.at(g.boundary_faces[i]) - base) match = false;
      if (match) kept.push_back(c);
    }
    covers = std::move(kept);
  }
  return covers;
}

namespace {

// Dual step across edge e from its left face to its right face, with the
// frame offset between the two face lifts in units of the cell count n.
struct DualStep {
  int from, to;
  int jump;       // h(to) - h(from) contribution scale, times (d_e - r_e) sign
  int kx, ky;     // lift offset, cells
};

std::vector<int> walk_positions(const Graph& g) {
  std::vector<int> pos(2 * g.edges.size(), -1);
  for (const Face& f : g.faces)
    for (int i = 0; i < (int)f.walk.size(); ++i) pos[f.walk[i]] = i;
  return pos;
}

void lift_offset(const Graph& g, const std::vector<int>& pos, int e, int& kx, int& ky) {
  kx = ky = 0;
  if (!g.torus) return;
  int ha = 2 * e, hb = 2 * e + 1;
  const Face& A = g.faces[g.face_of[ha]];
  const Face& B = g.faces[g.face_of[hb]];
  Vec2 pa = A.lifted[pos[ha]];
  Vec2 qb = B.lifted[(pos[hb] + 1) % B.walk.size()];
  double n = g.torus_n;
  double fx = (pa.x - qb.x) / n, fy = (pa.y - qb.y) / n;
  kx = (int)std::llround(fx);
  ky = (int)std::llround(fy);
  if (std::abs(fx - kx) > 1e-6 || std::abs(fy - ky) > 1e-6)
    throw Error(Err::Internal, "face lift offset is not a whole number of cells");
}

struct HeightBfs {
  std::vector<int> h;
  std::vector<int> ax, ay;  // winding of the lift each face was anchored in
  int mono_a = 0, mono_b = 0;  // height gain per unit x / y winding
};

// Breadth-first integration of face-jump data. jump_of(e) gives
// h(right) - h(left) across edge e. Returns heights anchored at g.f0 and, on
// the torus, the monodromy solved from the winding defects.
template <class JumpFn>
HeightBfs integrate_jumps(const Graph& g, JumpFn jump_of) {
  std::vector<int> pos = walk_positions(g);
  int F = g.faces.size();
  HeightBfs r;
  r.h.assign(F, 0);
  r.ax.assign(F, 0);
  r.ay.assign(F, 0);
  std::vector<char> seen(F, 0);

  struct Eq {
    int kx, ky, rhs;
  };
  std::vector<Eq> eqs;

  std::deque<int> q;
  seen[g.f0] = 1;
  q.push_back(g.f0);
  // Edge-driven traversal: for the frontier face, scan all edges on its walk.
  while (!q.empty()) {
    int f = q.front();
    q.pop_front();
    for (int hh : g.faces[f].walk) {
      int e = hh / 2;
      int L = g.face_of[2 * e], R = g.face_of[2 * e + 1];
      int jump = jump_of(e);
      int kx, ky;
      lift_offset(g, pos, e, kx, ky);
      // Step in both directions so self-loop faces still yield equations.
      struct Dir {
        int from, to, dj, dkx, dky;
      } dirs[2] = {{L, R, jump, -kx, -ky}, {R, L, -jump, kx, ky}};
      for (const auto& d : dirs) {
        if (d.from != f) continue;
        int wx = r.ax[f] + d.dkx, wy = r.ay[f] + d.dky;
        int val = r.h[f] + d.dj;
        if (!seen[d.to]) {
          seen[d.to] = 1;
          r.h[d.to] = val;
          r.ax[d.to] = wx;
          r.ay[d.to] = wy;
          q.push_back(d.to);
        } else {
          Eq eq{wx - r.ax[d.to], wy - r.ay[d.to], val - r.h[d.to]};
          if (eq.kx == 0 && eq.ky == 0) {
            if (eq.rhs != 0)
              throw Error(Err::InconsistentChain, "height increments do not close up around a face loop");
          } else {
            eqs.push_back(eq);
          }
        }
      }
    }
  }
  for (int f = 0; f < F; ++f)
    if (!seen[f]) throw Error(Err::Internal, "dual graph is not connected");

  if (!eqs.empty()) {
    const Eq* e1 = nullptr;
    const Eq* e2 = nullptr;
    for (const Eq& e : eqs) {
      if (!e1) {
        e1 = &e;
        continue;
      }
      long det = (long)e1->kx * e.ky - (long)e1->ky * e.kx;
      if (det != 0) {
        e2 = &e;
        break;
      }
    }
    if (!e2) {
      // All windings parallel: monodromy along one direction only.
      if (!e1) throw Error(Err::Internal, "no winding equations on a torus");
      throw Error(Err::Internal, "winding equations do not span both torus directions");
    }
    long det = (long)e1->kx * e2->ky - (long)e1->ky * e2->kx;
    long na = (long)e1->rhs * e2->ky - (long)e2->rhs * e1->ky;
    long nb = (long)e1->kx * e2->rhs - (long)e2->kx * e1->rhs;
    if (na % det != 0 || nb % det != 0)
      throw Error(Err::InconsistentChain, "winding equations have no integer solution");
    r.mono_a = (int)(na / det);
    r.mono_b = (int)(nb / det);
    for (const Eq& e : eqs)
      if ((long)e.kx * r.mono_a + (long)e.ky * r.mono_b != e.rhs)
        throw Error(Err::InconsistentChain, "height increments are inconsistent across torus windings");
  }
  return r;
}

}  // namespace

HeightFunction height_function(const Graph& g, const Cover& d, const Cover& ref) {
  std::vector<char> md = cover_mask(g, d), mr = cover_mask(g, ref);
  HeightBfs r = integrate_jumps(g, [&](int e) { return (int)md[e] - (int)mr[e]; });
  HeightFunction out;
  out.h = std::move(r.h);
  out.denom = 1;
  // A loop winding once in x is homologous to the horizontal cut, so its
  // height defect measures the second slope component (with a sign from the
  // crossing co-orientation), and symmetrically for y.
  out.mono_s = r.mono_b;
  out.mono_t = -r.mono_a;
  if (g.torus) {
    auto st = slope(g, d, ref);
    if (out.mono_s != st.first || out.mono_t != st.second)
      throw Error(Err::Internal, "monodromy (" + std::to_string(out.mono_s) + "," +
                                     std::to_string(out.mono_t) + ") disagrees with the slope (" +
                                     std::to_string(st.first) + "," + std::to_string(st.second) +
                                     "), raw winding gains (" + std::to_string(r.mono_a) + "," +
                                     std::to_string(r.mono_b) + ")");
  }
  return out;
}

std::pair<int, int> slope(const Graph& g, const Cover& d, const Cover& ref) {
  if (!g.torus) return {0, 0};
  std::vector<char> md = cover_mask(g, d), mr = cover_mask(g, ref);
  long s = 0, t = 0;
  for (int e = 0; e < (int)g.edges.size(); ++e) {
    int c = (int)md[e] - (int)mr[e];
    s += (long)c * g.edges[e].wrap_x;
    t += (long)c * g.edges[e].wrap_y;
  }
  return {(int)s, (int)t};
}

std::vector<int> boundary_heights(const Graph& g, const Cover& d, const Cover& ref) {
  HeightFunction hf = height_function(g, d, ref);
  std::vector<int> out;
  out.reserve(g.boundary_faces.size());
  int base = g.boundary_faces.empty() ? 0 : hf.h[g.boundary_faces.front()];
  for (int f : g.boundary_faces) out.push_back(hf.h[f] - base);
  return out;
}

int regular_valence(const Graph& g) {
  std::vector<int> deg(g.verts.size(), 0);
  for (const GEdge& e : g.edges) {
    deg[e.w]++;
    deg[e.b]++;
  }
  int N = 0;
  for (int v = 0; v < (int)g.verts.size(); ++v) {
    if (g.verts[v].boundary) continue;
    if (N == 0)
      N = deg[v];
    else if (deg[v] != N)
      throw Error(Err::NotRegular, "internal vertices have mixed valences");
  }
  if (N == 0) throw Error(Err::NotRegular, "graph has no internal vertices");
  return N;
}

HeightFunction absolute_height(const Graph& g, const Cover& d) {
  if (g.torus) throw Error(Err::MalformedInput, "absolute heights are defined on planar patches");
  int N = regular_valence(g);
  std::vector<char> md = cover_mask(g, d);
  HeightBfs r = integrate_jumps(g, [&](int e) { return N * (int)md[e] - 1; });
  HeightFunction out;
  out.h = std::move(r.h);
  out.denom = N;
  return out;
}

LocalRuleResult check_local_rule(const Graph& g, const std::vector<int>& f) {
  LocalRuleResult res;
  if (g.torus) throw Error(Err::MalformedInput, "the local rule applies to planar patches");
  if (f.size() != g.faces.size()) throw Error(Err::MalformedInput, "one value per face expected");
  int N = regular_valence(g);
  std::vector<int> deg(g.verts.size(), 0);
  Cover cov;
  for (int e = 0; e < (int)g.edges.size(); ++e) {
    int jump = f[g.face_of[2 * e + 1]] - f[g.face_of[2 * e]];
    if (jump == N - 1) {
      cov.push_back(e);
      deg[g.edges[e].w]++;
      deg[g.edges[e].b]++;
    } else if (jump != -1) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "edge %d: jump %d is neither -1 nor %d", e, jump, N - 1);
      res.why = buf;
      return res;
    }
  }
  for (int v = 0; v < (int)g.verts.size(); ++v) {
    if (!g.verts[v].boundary && deg[v] != 1) {
      res.why = "vertex " + std::to_string(v) + ": " + std::to_string(deg[v]) + " matched edges";
      return res;
    }
    if (g.verts[v].boundary && deg[v] > 1) {
      res.why = "boundary vertex " + std::to_string(v) + " matched twice";
      return res;
    }
  }
  res.ok = true;
  res.cover = std::move(cov);
  return res;
}

std::vector<std::vector<int>> oriented_dual_distances(const Graph& g) {
  int F = g.faces.size();
  std::vector<std::vector<int>> adj(F);
  for (int e = 0; e < (int)g.edges.size(); ++e)
    adj[g.face_of[2 * e + 1]].push_back(g.face_of[2 * e]);  // right to left only
  std::vector<std::vector<int>> dist(F, std::vector<int>(F, INT_MAX));
  for (int s = 0; s < F; ++s) {
    std::deque<int> q{s};
    dist[s][s] = 0;
    while (!q.empty()) {
      int a = q.front();
      q.pop_front();
      for (int b : adj[a])
        if (dist[s][b] == INT_MAX) {
          dist[s][b] = dist[s][a] + 1;
          q.push_back(b);
        }
    }
  }
  return dist;
}

LipschitzReport modified_lipschitz_check(const Graph& g, const Cover& d) {
  LipschitzReport rep;
  HeightFunction hf = absolute_height(g, d);
  auto dist = oriented_dual_distances(g);
  int F = g.faces.size();
  for (int f1 = 0; f1 < F; ++f1)
    for (int f2 = 0; f2 < F; ++f2) {
      if (f1 == f2) continue;
      int pi = dist[f2][f1];
      if (pi == INT_MAX) {
        rep.unreachable_pairs++;
        continue;
      }
      rep.checked_pairs++;
      if (hf.h[f1] - hf.h[f2] > pi) {
        rep.ok = false;
        if (rep.first_violation.empty())
          rep.first_violation = "faces " + std::to_string(f1) + "," + std::to_string(f2) +
                                ": height gap " + std::to_string(hf.h[f1] - hf.h[f2]) +
                                " exceeds path bound " + std::to_string(pi);
      }
    }
  return rep;
}

NewtonPolygon newton_polygon(const FundamentalDomain& fd) {
  Graph g = torus_quotient(fd, 1);
  std::vector<Cover> covers = enumerate_covers(g);
  if (covers.empty()) throw Error(Err::NoCover, "fundamental domain admits no cover");
  const Cover& ref = covers.front();
  NewtonPolygon np;
  for (int e : ref) {
    np.shift.x += g.edges[e].wrap_x;
    np.shift.y += g.edges[e].wrap_y;
  }
  std::set<std::pair<int, int>> seen;
  for (const Cover& c : covers) {
    auto st = slope(g, c, ref);
    if (seen.insert(st).second) np.slopes.push_back({st.first, st.second});
  }
  std::sort(np.slopes.begin(), np.slopes.end(), [](const IntPoint& a, const IntPoint& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  np.hull = convex_hull(np.slopes);
  return np;
}

}  // namespace dimer
