#include "dimerlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace dimer {

using nlohmann::json;

static long long floordiv(long long a, long long b) {
  long long q = a / b, r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) q--;
  return q;
}

int FundamentalDomain::white_count() const {
  int c = 0;
  for (auto& v : vertices) c += v.white ? 1 : 0;
  return c;
}

int FundamentalDomain::black_count() const { return (int)vertices.size() - white_count(); }

void FundamentalDomain::validate() const {
  if (vertices.empty() || edges.empty())
    throw Error(Err::MalformedInput, "fundamental domain needs vertices and edges");
  for (auto& v : vertices) {
    if (!(v.pos.x >= 0 && v.pos.x < 1 && v.pos.y >= 0 && v.pos.y < 1))
      throw Error(Err::MalformedInput, "vertex position outside the unit cell: " + v.id);
  }
  for (size_t i = 0; i < vertices.size(); i++)
    for (size_t j = i + 1; j < vertices.size(); j++)
      if ((vertices[i].pos - vertices[j].pos).norm() < 1e-9)
        throw Error(Err::MalformedInput, "coincident vertex positions");
  for (auto& e : edges) {
    if (e.white < 0 || e.white >= (int)vertices.size() || e.black < 0 ||
        e.black >= (int)vertices.size())
      throw Error(Err::MalformedInput, "edge references unknown vertex");
    if (!vertices[e.white].white || vertices[e.black].white)
      throw Error(Err::MalformedInput, "edge endpoints must be white then black");
    if (!(e.weight > 0)) throw Error(Err::MalformedInput, "edge weights must be positive");
  }
  // straight-line biperiodic embedding: check all segment pairs in a 3x3 block
  struct Seg {
    Vec2 a, b;
    int k;
  };
  std::vector<Seg> segs;
  for (int cy = -1; cy <= 1; cy++)
    for (int cx = -1; cx <= 1; cx++)
      for (size_t k = 0; k < edges.size(); k++) {
        const FdEdge& e = edges[k];
        Vec2 a = vertices[e.white].pos + Vec2(cx, cy);
        Vec2 b = vertices[e.black].pos + Vec2(cx + e.dx, cy + e.dy);
        segs.push_back({a, b, (int)k});
      }
  for (size_t i = 0; i < segs.size(); i++)
    for (size_t j = i + 1; j < segs.size(); j++) {
      if (segment_crossing(segs[i].a, segs[i].b, segs[j].a, segs[j].b))
        throw Error(Err::MalformedInput, "plane embedding has crossing edges");
      // overlap beyond a shared endpoint
      Vec2 di = segs[i].b - segs[i].a, dj = segs[j].b - segs[j].a;
      if (std::fabs(di.cross(dj)) < 1e-12) {
        int touch = 0;
        for (Vec2 p : {segs[j].a, segs[j].b})
          if (on_segment(segs[i].a, segs[i].b, p, 1e-9)) touch++;
        for (Vec2 p : {segs[i].a, segs[i].b})
          if (on_segment(segs[j].a, segs[j].b, p, 1e-9)) touch++;
        bool share_end = (segs[i].a - segs[j].a).norm() < 1e-9 ||
                         (segs[i].a - segs[j].b).norm() < 1e-9 ||
                         (segs[i].b - segs[j].a).norm() < 1e-9 ||
                         (segs[i].b - segs[j].b).norm() < 1e-9;
        if (touch > (share_end ? 2 : 0))
          throw Error(Err::MalformedInput, "plane embedding has overlapping edges");
      }
    }
  for (int cy = -1; cy <= 1; cy++)
    for (int cx = -1; cx <= 1; cx++)
      for (auto& v : vertices) {
        Vec2 p = v.pos + Vec2(cx, cy);
        for (auto& s : segs) {
          if ((p - s.a).norm() < 1e-9 || (p - s.b).norm() < 1e-9) continue;
          if (on_segment(s.a, s.b, p, 1e-9))
            throw Error(Err::MalformedInput, "vertex lies on the interior of an edge");
        }
      }
}

Vec2 Graph::hedge_dvec(int h) const {
  Vec2 d = edges[h >> 1].disp;
  return (h & 1) ? Vec2(-d.x, -d.y) : d;
}

int Graph::internal_count() const {
  int c = 0;
  for (auto& v : verts) c += v.boundary ? 0 : 1;
  return c;
}

std::vector<double> Graph::weights() const {
  std::vector<double> w(edges.size());
  for (size_t i = 0; i < edges.size(); i++) w[i] = edges[i].weight;
  return w;
}

void Graph::check_connected() const {
  if (verts.empty()) throw Error(Err::EmptyPatch, "graph has no vertices");
  std::vector<std::vector<int>> adj(verts.size());
  for (auto& e : edges) {
    adj[e.w].push_back(e.b);
    adj[e.b].push_back(e.w);
  }
  std::vector<char> seen(verts.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  size_t cnt = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        cnt++;
        stack.push_back(u);
      }
  }
  if (cnt != verts.size()) throw Error(Err::MalformedInput, "graph is not connected");
}

void Graph::build() {
  size_t V = verts.size(), E = edges.size();
  if (V == 0 || E == 0) throw Error(Err::EmptyPatch, "empty graph");
  std::vector<int> valence(V, 0);
  for (auto& e : edges) {
    if (e.w < 0 || e.w >= (int)V || e.b < 0 || e.b >= (int)V)
      throw Error(Err::MalformedInput, "edge references unknown vertex");
    if (!verts[e.w].white || verts[e.b].white)
      throw Error(Err::MalformedInput, "edges must join white to black");
    if (!(e.weight > 0)) throw Error(Err::MalformedInput, "edge weights must be positive");
    valence[e.w]++;
    valence[e.b]++;
  }
  for (size_t v = 0; v < V; v++) {
    if (verts[v].boundary && valence[v] != 1)
      throw Error(Err::MalformedInput, "boundary vertices must have valence one");
    if (valence[v] == 0) throw Error(Err::MalformedInput, "isolated vertex");
  }

  rot.assign(V, {});
  for (size_t e = 0; e < E; e++) {
    rot[edges[e].w].push_back(2 * (int)e);
    rot[edges[e].b].push_back(2 * (int)e + 1);
  }
  for (auto& r : rot) {
    std::stable_sort(r.begin(), r.end(), [&](int a, int b) {
      Vec2 da = hedge_dvec(a), db = hedge_dvec(b);
      return std::atan2(da.y, da.x) < std::atan2(db.y, db.x);
    });
  }
  std::vector<int> rot_pos(2 * E, -1);
  for (auto& r : rot)
    for (size_t i = 0; i < r.size(); i++) rot_pos[r[i]] = (int)i;

  // interior-left face tracing: successor of h is the half-edge clockwise
  // from reverse(h) at the head vertex
  auto next_he = [&](int h) {
    int head = hedge_head(h);
    const auto& r = rot[head];
    int p = rot_pos[h ^ 1];
    return r[(p + r.size() - 1) % r.size()];
  };

  std::vector<int> walk_of(2 * E, -1);
  struct RawFace {
    std::vector<int> walk;
    std::vector<Vec2> lifted;
    double area;
  };
  std::vector<RawFace> raw;
  for (size_t h0 = 0; h0 < 2 * E; h0++) {
    if (walk_of[h0] != -1) continue;
    RawFace f;
    int h = (int)h0;
    Vec2 p = verts[hedge_tail(h)].pos;
    do {
      walk_of[h] = (int)raw.size();
      f.walk.push_back(h);
      f.lifted.push_back(p);
      p = p + hedge_dvec(h);
      h = next_he(h);
    } while (h != (int)h0);
    f.area = 0;
    for (size_t i = 0; i < f.lifted.size(); i++)
      f.area += f.lifted[i].cross(f.lifted[(i + 1) % f.lifted.size()]);
    f.area *= 0.5;
    raw.push_back(std::move(f));
  }

  // split walks at boundary-vertex tips into boundary cells
  struct Piece {
    std::vector<int> walk;
    std::vector<Vec2> lifted;
    bool outer = false, boundary_cell = false;
  };
  std::vector<Piece> pieces;
  for (auto& f : raw) {
    std::vector<size_t> tips;
    for (size_t i = 0; i < f.walk.size(); i++)
      if (verts[hedge_tail(f.walk[i])].boundary) tips.push_back(i);
    if (tips.empty()) {
      Piece p;
      p.walk = f.walk;
      p.lifted = f.lifted;
      p.outer = !torus && f.area < 0;
      pieces.push_back(std::move(p));
    } else {
      for (size_t t = 0; t < tips.size(); t++) {
        size_t a = tips[t], b = tips[(t + 1) % tips.size()];
        Piece p;
        p.boundary_cell = true;
        for (size_t i = a; i != b; i = (i + 1) % f.walk.size()) {
          p.walk.push_back(f.walk[i]);
          p.lifted.push_back(f.lifted[i]);
        }
        pieces.push_back(std::move(p));
      }
    }
  }

  std::vector<size_t> order(pieces.size());
  for (size_t i = 0; i < order.size(); i++) order[i] = i;
  auto min_he = [&](const Piece& p) { return *std::min_element(p.walk.begin(), p.walk.end()); };
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return min_he(pieces[a]) < min_he(pieces[b]); });

  faces.clear();
  face_of.assign(2 * E, -1);
  boundary_faces.clear();
  for (size_t oi = 0; oi < order.size(); oi++) {
    Piece& p = pieces[order[oi]];
    Face f;
    f.walk = p.walk;
    f.lifted = p.lifted;
    f.outer = p.outer;
    f.boundary_cell = p.boundary_cell;
    Vec2 s{0, 0};
    for (auto& q : f.lifted) s = s + q;
    f.sample = s * (1.0 / f.lifted.size());
    for (int h : f.walk) face_of[h] = (int)faces.size();
    if (f.boundary_cell) boundary_faces.push_back((int)faces.size());
    faces.push_back(std::move(f));
  }
  for (size_t h = 0; h < 2 * E; h++)
    if (face_of[h] < 0) throw Error(Err::Internal, "face tracing missed a half-edge");

  f0 = -1;
  if (!boundary_faces.empty()) {
    f0 = boundary_faces.front();
  } else if (!torus) {
    for (size_t i = 0; i < faces.size(); i++)
      if (faces[i].outer) f0 = (int)i;
    if (f0 < 0) throw Error(Err::Internal, "planar graph without outer face");
  } else {
    f0 = 0;
  }

  if (!torus) {
    long long euler = (long long)V - (long long)E + (long long)raw.size();
    if (euler != 2) throw Error(Err::MalformedInput, "embedding is not planar (Euler check)");
  } else {
    long long euler = (long long)V - (long long)E + (long long)raw.size();
    if (euler != 0) throw Error(Err::Internal, "torus Euler check failed");
  }
}

Graph torus_quotient(const FundamentalDomain& fd, int n) {
  fd.validate();
  if (n < 1) throw Error(Err::MalformedInput, "torus size must be >= 1");
  Graph g;
  g.torus = true;
  g.torus_n = n;
  int V = (int)fd.vertices.size(), E = (int)fd.edges.size();
  g.verts.resize((size_t)n * n * V);
  for (int j = 0; j < n; j++)
    for (int i = 0; i < n; i++)
      for (int v = 0; v < V; v++) {
        GVertex& gv = g.verts[(size_t)(j * n + i) * V + v];
        gv.pos = fd.vertices[v].pos + Vec2(i, j);
        gv.white = fd.vertices[v].white;
      }
  g.edges.resize((size_t)n * n * E);
  for (int j = 0; j < n; j++)
    for (int i = 0; i < n; i++)
      for (int k = 0; k < E; k++) {
        const FdEdge& e = fd.edges[k];
        GEdge& ge = g.edges[(size_t)(j * n + i) * E + k];
        long long ti = i + e.dx, tj = j + e.dy;
        ge.wrap_x = (int)floordiv(ti, n);
        ge.wrap_y = (int)floordiv(tj, n);
        int ci = (int)(ti - (long long)n * ge.wrap_x);
        int cj = (int)(tj - (long long)n * ge.wrap_y);
        ge.w = (j * n + i) * V + e.white;
        ge.b = (cj * n + ci) * V + e.black;
        ge.weight = e.weight;
        ge.disp = fd.vertices[e.black].pos + Vec2(e.dx, e.dy) - fd.vertices[e.white].pos;
      }
  g.check_connected();
  g.build();
  return g;
}

Graph planar_patch(const FundamentalDomain& fd, int n, const std::vector<Vec2>& region) {
  fd.validate();
  if (n < 1) throw Error(Err::MalformedInput, "patch scale must be >= 1");
  if (region.size() < 3) throw Error(Err::MalformedInput, "region must be a polygon");
  for (size_t i = 0; i < region.size(); i++)
    for (size_t j = i + 1; j < region.size(); j++) {
      bool adjacent = (j == i + 1) || (i == 0 && j == region.size() - 1);
      Vec2 a = region[i], b = region[(i + 1) % region.size()];
      Vec2 c = region[j], d = region[(j + 1) % region.size()];
      if (!adjacent && segments_touch(a, b, c, d))
        throw Error(Err::MalformedInput, "region polygon is not simple");
    }

  double mnx = 1e300, mny = 1e300, mxx = -1e300, mxy = -1e300;
  for (auto& p : region) {
    mnx = std::min(mnx, p.x);
    mny = std::min(mny, p.y);
    mxx = std::max(mxx, p.x);
    mxy = std::max(mxy, p.y);
  }
  int i0 = (int)std::floor(n * mnx) - 2, i1 = (int)std::ceil(n * mxx) + 2;
  int j0 = (int)std::floor(n * mny) - 2, j1 = (int)std::ceil(n * mxy) + 2;

  int V = (int)fd.vertices.size(), E = (int)fd.edges.size();
  auto inside = [&](Vec2 unscaled) {
    return point_in_polygon(region, unscaled * (1.0 / n)) != 0;
  };

  Graph g;
  g.scale = n;
  std::map<std::tuple<int, int, int>, int> idx;
  for (int j = j0; j <= j1; j++)
    for (int i = i0; i <= i1; i++)
      for (int v = 0; v < V; v++) {
        Vec2 p = fd.vertices[v].pos + Vec2(i, j);
        if (inside(p)) {
          idx[{i, j, v}] = (int)g.verts.size();
          GVertex gv;
          gv.pos = p;
          gv.white = fd.vertices[v].white;
          g.verts.push_back(gv);
        }
      }
  for (int j = j0; j <= j1; j++)
    for (int i = i0; i <= i1; i++)
      for (int k = 0; k < E; k++) {
        const FdEdge& e = fd.edges[k];
        auto wit = idx.find({i, j, e.white});
        auto bit = idx.find({i + e.dx, j + e.dy, e.black});
        if (wit == idx.end() && bit == idx.end()) continue;
        Vec2 wp = fd.vertices[e.white].pos + Vec2(i, j);
        Vec2 bp = fd.vertices[e.black].pos + Vec2(i + e.dx, j + e.dy);
        GEdge ge;
        ge.weight = e.weight;
        if (wit != idx.end() && bit != idx.end()) {
          ge.w = wit->second;
          ge.b = bit->second;
          ge.disp = bp - wp;
        } else if (wit != idx.end()) {
          GVertex tip;
          tip.pos = (wp + bp) * 0.5;
          tip.white = false;
          tip.boundary = true;
          int ti = (int)g.verts.size();
          g.verts.push_back(tip);
          ge.w = wit->second;
          ge.b = ti;
          ge.disp = tip.pos - wp;
        } else {
          GVertex tip;
          tip.pos = (wp + bp) * 0.5;
          tip.white = true;
          tip.boundary = true;
          int ti = (int)g.verts.size();
          g.verts.push_back(tip);
          ge.w = ti;
          ge.b = bit->second;
          ge.disp = bp - tip.pos;
        }
        g.edges.push_back(ge);
      }

  // keep the largest connected component (ties: smallest minimum vertex id)
  if (!g.verts.empty()) {
    std::vector<int> comp(g.verts.size(), -1);
    std::vector<std::vector<int>> adj(g.verts.size());
    for (auto& e : g.edges) {
      adj[e.w].push_back(e.b);
      adj[e.b].push_back(e.w);
    }
    int nc = 0;
    for (size_t s = 0; s < g.verts.size(); s++) {
      if (comp[s] != -1) continue;
      std::vector<int> st{(int)s};
      comp[s] = nc;
      while (!st.empty()) {
        int v = st.back();
        st.pop_back();
        for (int u : adj[v])
          if (comp[u] == -1) {
            comp[u] = nc;
            st.push_back(u);
          }
      }
      nc++;
    }
    if (nc > 1) {
      std::vector<int> sz(nc, 0);
      for (int c : comp) sz[c]++;
      int best = 0;
      for (int c = 1; c < nc; c++)
        if (sz[c] > sz[best]) best = c;
      std::vector<int> remap(g.verts.size(), -1);
      Graph h;
      h.scale = g.scale;
      for (size_t v = 0; v < g.verts.size(); v++)
        if (comp[v] == best) {
          remap[v] = (int)h.verts.size();
          h.verts.push_back(g.verts[v]);
        }
      for (auto& e : g.edges)
        if (comp[e.w] == best) {
          GEdge ne = e;
          ne.w = remap[e.w];
          ne.b = remap[e.b];
          h.edges.push_back(ne);
        }
      g = std::move(h);
    }
  }

  int internal = 0;
  for (auto& v : g.verts) internal += v.boundary ? 0 : 1;
  if (internal == 0 || g.edges.empty())
    throw Error(Err::EmptyPatch, "region retains no internal vertex at this scale");
  g.build();
  return g;
}

Graph aztec_graph(int order) {
  if (order < 1) throw Error(Err::MalformedInput, "aztec order must be >= 1");
  Graph g;
  g.scale = order;
  std::map<std::pair<int, int>, int> idx;
  auto in_diamond = [&](int a, int b) {
    return std::abs(a + 0.5) + std::abs(b + 0.5) <= order + 1e-9;
  };
  for (int b = -order; b < order; b++)
    for (int a = -order; a < order; a++)
      if (in_diamond(a, b)) {
        idx[{a, b}] = (int)g.verts.size();
        GVertex v;
        v.pos = Vec2(a + 0.5, b + 0.5);
        v.white = ((a + b) % 2 + 2) % 2 == 0;
        g.verts.push_back(v);
      }
  auto add_edge = [&](std::pair<int, int> p, std::pair<int, int> q) {
    auto pi = idx.find(p), qi = idx.find(q);
    if (pi == idx.end() || qi == idx.end()) return;
    GEdge e;
    bool p_white = g.verts[pi->second].white;
    e.w = p_white ? pi->second : qi->second;
    e.b = p_white ? qi->second : pi->second;
    e.disp = g.verts[e.b].pos - g.verts[e.w].pos;
    g.edges.push_back(e);
  };
  for (int b = -order; b < order; b++)
    for (int a = -order; a < order; a++)
      if (in_diamond(a, b)) {
        add_edge({a, b}, {a + 1, b});
        add_edge({a, b}, {a, b + 1});
      }
  g.build();
  return g;
}

Graph grid_patch(int w, int h) {
  if (w < 1 || h < 1) throw Error(Err::MalformedInput, "grid dimensions must be >= 1");
  Graph g;
  auto id = [&](int i, int j) { return j * w + i; };
  for (int j = 0; j < h; j++)
    for (int i = 0; i < w; i++) {
      GVertex v;
      v.pos = Vec2(i, j);
      v.white = (i + j) % 2 == 0;
      g.verts.push_back(v);
    }
  auto add_edge = [&](int ui, int uj, int vi, int vj) {
    int u = id(ui, uj), v = id(vi, vj);
    GEdge e;
    bool uw = g.verts[u].white;
    e.w = uw ? u : v;
    e.b = uw ? v : u;
    e.disp = g.verts[e.b].pos - g.verts[e.w].pos;
    g.edges.push_back(e);
  };
  for (int j = 0; j < h; j++)
    for (int i = 0; i < w; i++) {
      if (i + 1 < w) add_edge(i, j, i + 1, j);
      if (j + 1 < h) add_edge(i, j, i, j + 1);
    }
  g.build();
  return g;
}

// ---- JSON ----

static json fd_to_json(const FundamentalDomain& fd) {
  json j;
  j["vertices"] = json::array();
  for (auto& v : fd.vertices)
    j["vertices"].push_back({{"id", v.id},
                             {"color", v.white ? "white" : "black"},
                             {"pos", {v.pos.x, v.pos.y}}});
  j["edges"] = json::array();
  for (auto& e : fd.edges)
    j["edges"].push_back({{"white", fd.vertices[e.white].id},
                          {"black", fd.vertices[e.black].id},
                          {"offset", {e.dx, e.dy}},
                          {"weight", e.weight}});
  return j;
}

std::string FundamentalDomain::to_json_text() const { return fd_to_json(*this).dump(2) + "\n"; }

FundamentalDomain FundamentalDomain::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (std::exception& e) {
    throw Error(Err::MalformedInput, std::string("bad JSON: ") + e.what());
  }
  FundamentalDomain fd;
  try {
    std::map<std::string, int> ids;
    for (auto& jv : j.at("vertices")) {
      FdVertex v;
      v.id = jv.at("id").get<std::string>();
      std::string c = jv.at("color").get<std::string>();
      if (c != "white" && c != "black")
        throw Error(Err::MalformedInput, "vertex color must be white or black");
      v.white = c == "white";
      v.pos = Vec2(jv.at("pos").at(0).get<double>(), jv.at("pos").at(1).get<double>());
      if (ids.count(v.id)) throw Error(Err::MalformedInput, "duplicate vertex id " + v.id);
      ids[v.id] = (int)fd.vertices.size();
      fd.vertices.push_back(v);
    }
    for (auto& je : j.at("edges")) {
      FdEdge e;
      std::string wi = je.at("white").get<std::string>(), bi = je.at("black").get<std::string>();
      if (!ids.count(wi) || !ids.count(bi))
        throw Error(Err::MalformedInput, "edge references unknown vertex id");
      e.white = ids[wi];
      e.black = ids[bi];
      e.dx = je.at("offset").at(0).get<int>();
      e.dy = je.at("offset").at(1).get<int>();
      e.weight = je.value("weight", 1.0);
      fd.edges.push_back(e);
    }
  } catch (Error&) {
    throw;
  } catch (std::exception& e) {
    throw Error(Err::MalformedInput, std::string("bad fundamental-domain file: ") + e.what());
  }
  fd.validate();
  return fd;
}

FundamentalDomain FundamentalDomain::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::MalformedInput, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string Graph::to_json_text() const {
  json j;
  j["scale"] = scale;
  j["vertices"] = json::array();
  for (size_t v = 0; v < verts.size(); v++) {
    json jv = {{"id", (int)v},
               {"color", verts[v].white ? "white" : "black"},
               {"pos", {verts[v].pos.x, verts[v].pos.y}}};
    if (verts[v].boundary) jv["boundary"] = true;
    j["vertices"].push_back(jv);
  }
  j["edges"] = json::array();
  for (auto& e : edges)
    j["edges"].push_back({{"white", e.w}, {"black", e.b}, {"weight", e.weight}});
  return j.dump(2) + "\n";
}

Graph Graph::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (std::exception& e) {
    throw Error(Err::MalformedInput, std::string("bad JSON: ") + e.what());
  }
  Graph g;
  try {
    g.scale = j.value("scale", 1);
    std::map<int, int> ids;
    for (auto& jv : j.at("vertices")) {
      GVertex v;
      int id = jv.at("id").get<int>();
      std::string c = jv.at("color").get<std::string>();
      if (c != "white" && c != "black")
        throw Error(Err::MalformedInput, "vertex color must be white or black");
      v.white = c == "white";
      v.pos = Vec2(jv.at("pos").at(0).get<double>(), jv.at("pos").at(1).get<double>());
      v.boundary = jv.value("boundary", false);
      if (ids.count(id)) throw Error(Err::MalformedInput, "duplicate vertex id");
      ids[id] = (int)g.verts.size();
      g.verts.push_back(v);
    }
    for (auto& je : j.at("edges")) {
      GEdge e;
      int wi = je.at("white").get<int>(), bi = je.at("black").get<int>();
      if (!ids.count(wi) || !ids.count(bi))
        throw Error(Err::MalformedInput, "edge references unknown vertex id");
      e.w = ids[wi];
      e.b = ids[bi];
      e.weight = je.value("weight", 1.0);
      e.disp = g.verts[e.b].pos - g.verts[e.w].pos;
      g.edges.push_back(e);
    }
  } catch (Error&) {
    throw;
  } catch (std::exception& e) {
    throw Error(Err::MalformedInput, std::string("bad graph file: ") + e.what());
  }
  g.check_connected();
  g.build();
  return g;
}

Graph Graph::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::MalformedInput, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace dimer
