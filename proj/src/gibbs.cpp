#include "dimerlab/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "dimerlab/error.hpp"

namespace dimer {

using nlohmann::json;

WeightSystem WeightSystem::uniform(const Graph& g) {
  WeightSystem ws;
  ws.w.assign(g.edges.size(), 1.0);
  return ws;
}

WeightSystem WeightSystem::from_json_text(const Graph& g, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Err::MalformedInput, std::string("weight file: ") + e.what());
  }
  if (!j.is_object()) throw Error(Err::MalformedInput, "weight file must be a JSON object");
  WeightSystem ws = uniform(g);
  for (auto& [key, val] : j.items()) {
    int id;
    try {
      id = std::stoi(key);
    } catch (...) {
      throw Error(Err::MalformedInput, "weight key '" + key + "' is not an edge id");
    }
    if (id < 0 || id >= (int)g.edges.size())
      throw Error(Err::MalformedInput, "weight for unknown edge " + key);
    if (!val.is_number()) throw Error(Err::MalformedInput, "weight for edge " + key + " not a number");
    ws.w[id] = val.get<double>();
  }
  ws.validate(g);
  return ws;
}

WeightSystem WeightSystem::load(const Graph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::MalformedInput, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(g, ss.str());
}

std::string WeightSystem::to_json_text() const {
  json j = json::object();
  for (size_t i = 0; i < w.size(); ++i) j[std::to_string(i)] = w[i];
  return j.dump(2);
}

void WeightSystem::validate(const Graph& g) const {
  if (w.size() != g.edges.size())
    throw Error(Err::MalformedInput, "weight system size does not match the edge count");
  for (size_t i = 0; i < w.size(); ++i)
    if (!(w[i] > 0) || !std::isfinite(w[i]))
      throw Error(Err::MalformedInput, "weight of edge " + std::to_string(i) + " must be positive");
}

double cover_weight(const Graph& g, const WeightSystem& w, const Cover& d) {
  w.validate(g);
  double p = 1;
  for (int e : d) p *= w.w[e];
  return p;
}

double partition_function(const Graph& g, const WeightSystem& w, const BoundaryCondition& bc,
                          const EnumOptions& opt) {
  w.validate(g);
  double z = 0;
  for (const Cover& d : enumerate_covers(g, bc, opt)) z += cover_weight(g, w, d);
  return z;
}

double log_partition_function(const Graph& g, const WeightSystem& w, const BoundaryCondition& bc,
                              const EnumOptions& opt) {
  w.validate(g);
  std::vector<double> logs;
  for (const Cover& d : enumerate_covers(g, bc, opt)) {
    double s = 0;
    for (int e : d) s += std::log(w.w[e]);
    logs.push_back(s);
  }
  if (logs.empty()) throw Error(Err::NoCover, "no admissible cover");
  double m = *std::max_element(logs.begin(), logs.end());
  double acc = 0;
  for (double s : logs) acc += std::exp(s - m);
  return m + std::log(acc);
}

Rational partition_function_exact(const Graph& g, const std::vector<Rational>& w,
                                  const BoundaryCondition& bc, const EnumOptions& opt) {
  if (w.size() != g.edges.size())
    throw Error(Err::MalformedInput, "weight system size does not match the edge count");
  Rational z = 0;
  for (const Cover& d : enumerate_covers(g, bc, opt)) {
    Rational p = 1;
    for (int e : d) p *= w[e];
    z += p;
  }
  return z;
}

double boltzmann_probability(const Graph& g, const WeightSystem& w, const Cover& d) {
  double z = partition_function(g, w);
  if (z <= 0) throw Error(Err::NoCover, "graph admits no cover");
  return cover_weight(g, w, d) / z;
}

MeanHeight mean_height(const Graph& g, const WeightSystem& w, const BoundaryCondition& bc,
                       const EnumOptions& opt) {
  auto covers = enumerate_covers(g, bc, opt);
  if (covers.empty()) throw Error(Err::NoCover, "no admissible cover");
  bool absolute = false;
  if (!g.torus) {
    try {
      regular_valence(g);
      absolute = true;
    } catch (const Error&) {
    }
  }
  MeanHeight out;
  out.h.assign(g.faces.size(), 0.0);
  double z = 0;
  for (const Cover& d : covers) {
    double p = cover_weight(g, w, d);
    z += p;
    HeightFunction hf = absolute ? absolute_height(g, d) : height_function(g, d, covers.front());
    out.denom = hf.denom;
    for (size_t f = 0; f < out.h.size(); ++f) out.h[f] += p * hf.h[f];
  }
  for (double& v : out.h) v /= z;
  return out;
}

namespace {

struct TipPlacement {
  Vec2 x, y;  // black tip (ends the white half), white tip (starts the black half)
};

TipPlacement tips_for(const Graph& g, int e, double t) {
  const GEdge& ed = g.edges[e];
  Vec2 a = g.verts[ed.w].pos;
  Vec2 d = ed.disp;
  TipPlacement tp;
  tp.x = a + d * (t * 0.9);
  tp.y = a + d * (t + (1 - t) * 0.1);
  return tp;
}

}  // namespace

EdgeCut cut_edges(const Graph& g, const WeightSystem& w, std::vector<int> cut) {
  w.validate(g);
  if (g.torus) throw Error(Err::MalformedInput, "edge cutting applies to planar patches");
  std::sort(cut.begin(), cut.end());
  if (std::adjacent_find(cut.begin(), cut.end()) != cut.end())
    throw Error(Err::MalformedInput, "duplicate edge in cut list");
  for (int e : cut) {
    if (e < 0 || e >= (int)g.edges.size()) throw Error(Err::MalformedInput, "unknown edge id");
    if (g.verts[g.edges[e].w].boundary || g.verts[g.edges[e].b].boundary)
      throw Error(Err::BoundaryEdge, "edge " + std::to_string(e) + " touches the boundary");
  }

  std::vector<char> is_cut(g.edges.size(), 0);
  for (int e : cut) is_cut[e] = 1;

  // A separating cut set needs the curve interface, which returns the pieces.
  {
    std::vector<std::vector<int>> adj(g.verts.size());
    for (int e = 0; e < (int)g.edges.size(); ++e)
      if (!is_cut[e]) {
        adj[g.edges[e].w].push_back(g.edges[e].b);
        adj[g.edges[e].b].push_back(g.edges[e].w);
      }
    std::vector<char> seen(g.verts.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    size_t reached = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u : adj[v])
        if (!seen[u]) {
          seen[u] = 1;
          reached++;
          stack.push_back(u);
        }
    }
    if (reached != g.verts.size())
      throw Error(Err::MalformedInput, "cutting these edges disconnects the patch");
  }

  EdgeCut r;
  r.g.torus = false;
  r.g.scale = g.scale;
  r.g.verts = g.verts;
  r.edge_map.assign(g.edges.size(), -1);

  for (int e = 0; e < (int)g.edges.size(); ++e) {
    if (is_cut[e]) continue;
    r.edge_map[e] = r.g.edges.size();
    r.g.edges.push_back(g.edges[e]);
    r.w.w.push_back(w.w[e]);
  }
  for (int e : cut) {
    const GEdge& ed = g.edges[e];
    TipPlacement tp = tips_for(g, e, 0.5);
    int xb = r.g.verts.size();
    r.g.verts.push_back({tp.x, false, true});
    int yw = r.g.verts.size();
    r.g.verts.push_back({tp.y, true, true});
    EdgeCut::Halves h;
    h.old_edge = e;
    h.tip_black = xb;
    h.tip_white = yw;
    h.white_half = r.g.edges.size();
    r.g.edges.push_back({ed.w, xb, ed.weight, 0, 0, tp.x - g.verts[ed.w].pos});
    r.w.w.push_back(w.w[e]);
    h.black_half = r.g.edges.size();
    r.g.edges.push_back({yw, ed.b, 1.0, 0, 0, g.verts[ed.b].pos - tp.y});
    r.w.w.push_back(1.0);
    r.cuts.push_back(h);
  }
  r.g.build();
  r.g.check_connected();
  return r;
}

EdgeCut cut_edge(const Graph& g, const WeightSystem& w, int edge) {
  return cut_edges(g, w, {edge});
}

Cover EdgeCut::push(const Cover& d) const {
  Cover out;
  std::set<int> cut_set;
  for (auto& h : cuts) cut_set.insert(h.old_edge);
  for (int e : d) {
    if (cut_set.count(e)) continue;
    if (edge_map[e] < 0) throw Error(Err::Internal, "cover edge lost in cut");
    out.push_back(edge_map[e]);
  }
  for (auto& h : cuts)
    if (std::binary_search(d.begin(), d.end(), h.old_edge)) {
      out.push_back(h.white_half);
      out.push_back(h.black_half);
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::string graph_weight_key(const Graph& g, const WeightSystem& w) {
  char buf[256];
  std::vector<std::string> vl, el;
  for (const GVertex& v : g.verts) {
    std::snprintf(buf, sizeof buf, "v %.12g %.12g %d %d", v.pos.x, v.pos.y, (int)v.white,
                  (int)v.boundary);
    vl.push_back(buf);
  }
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const GEdge& ed = g.edges[e];
    std::snprintf(buf, sizeof buf, "e %.12g %.12g %.12g %.12g %.12g", g.verts[ed.w].pos.x,
                  g.verts[ed.w].pos.y, g.verts[ed.b].pos.x, g.verts[ed.b].pos.y, w.w[e]);
    el.push_back(buf);
  }
  std::sort(vl.begin(), vl.end());
  std::sort(el.begin(), el.end());
  std::string key;
  for (auto& s : vl) key += s + "\n";
  for (auto& s : el) key += s + "\n";
  return key;
}

namespace {

struct CrossingRaw {
  double t;      // global position along rho
  int edge;
  Vec2 point;
  Vec2 rho_dir;  // direction of the crossing segment
};

// Face on the given side of a crossed edge: pre = before the curve passes.
int side_face(const Graph& g, const CrossingRaw& c, bool pre) {
  double s = cross3(Vec2{0, 0}, g.edges[c.edge].disp, c.rho_dir);
  // Left face of the white->black direction is the side with positive cross.
  bool before_is_left = s < 0;
  bool want_left = pre ? before_is_left : !before_is_left;
  return want_left ? g.face_of[2 * c.edge] : g.face_of[2 * c.edge + 1];
}

double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 d = b - a;
  double len2 = d.dot(d);
  double t = len2 > 0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  Vec2 q = a + d * t;
  return (p - q).norm();
}

}  // namespace

CurveCut cut_along_curve(const Graph& g, const WeightSystem& w, const std::vector<Vec2>& rho) {
  w.validate(g);
  if (g.torus) throw Error(Err::MalformedInput, "curve cutting applies to planar patches");
  if (rho.size() < 2) throw Error(Err::MalformedInput, "curve needs at least two points");
  for (size_t i = 0; i + 1 < rho.size(); ++i)
    if ((rho[i + 1] - rho[i]).norm() < 1e-12)
      throw Error(Err::MalformedInput, "curve has a zero-length segment");

  // General position, first bullet: the curve stays clear of vertices.
  for (const GVertex& v : g.verts)
    for (size_t i = 0; i + 1 < rho.size(); ++i)
      if (dist_point_segment(v.pos, rho[i], rho[i + 1]) < 1e-9)
        throw Error(Err::NotGeneralPosition, "curve passes through a vertex");

  // Collect crossings; second bullet: every intersection is transversal.
  std::vector<CrossingRaw> cr;
  for (size_t i = 0; i + 1 < rho.size(); ++i) {
    Vec2 a = rho[i], b = rho[i + 1];
    for (int e = 0; e < (int)g.edges.size(); ++e) {
      Vec2 p = g.verts[g.edges[e].w].pos;
      Vec2 q = p + g.edges[e].disp;
      if (auto t = segment_crossing(a, b, p, q)) {
        cr.push_back({(double)i + *t, e, a + (b - a) * *t, b - a});
      } else if (segments_touch(a, b, p, q)) {
        throw Error(Err::NotGeneralPosition, "curve touches an edge without crossing it");
      }
    }
  }
  if (cr.empty()) throw Error(Err::MalformedInput, "curve does not cross any edge");
  std::sort(cr.begin(), cr.end(), [](const CrossingRaw& a, const CrossingRaw& b) { return a.t < b.t; });
  {
    std::set<int> seen;
    for (auto& c : cr)
      if (!seen.insert(c.edge).second)
        throw Error(Err::NotGeneralPosition, "curve crosses an edge more than once");
  }
  for (auto& c : cr)
    if (g.verts[g.edges[c.edge].w].boundary || g.verts[g.edges[c.edge].b].boundary)
      throw Error(Err::BoundaryEdge, "curve crosses a boundary edge");

  int k = cr.size();
  // Visited faces: entry, between consecutive crossings, exit. Third bullet:
  // each bounded face is met in one connected arc.
  std::vector<int> visit(k + 1);
  visit[0] = side_face(g, cr[0], true);
  for (int i = 1; i < k; ++i) {
    visit[i] = side_face(g, cr[i - 1], false);
    if (visit[i] != side_face(g, cr[i], true))
      throw Error(Err::NotGeneralPosition, "curve leaves a face through a non-adjacent edge");
  }
  visit[k] = side_face(g, cr[k - 1], false);

  {
    std::map<int, int> count;
    for (int f : visit) count[f]++;
    for (auto& [f, n] : count) {
      if (g.faces[f].outer) {
        if (!(n == 2 && visit.front() == f && visit.back() == f))
          throw Error(Err::NotGeneralPosition, "curve meets the outer face away from its ends");
      } else if (n != 1) {
        throw Error(Err::NotGeneralPosition, "curve meets a face in a disconnected set");
      }
    }
    for (int i = 1; i < k; ++i)
      if (g.faces[visit[i]].boundary_cell)
        throw Error(Err::NotGeneralPosition, "curve re-enters the boundary region mid-way");
    if (!g.faces[visit[0]].outer && !g.faces[visit[0]].boundary_cell)
      throw Error(Err::NotGeneralPosition, "curve starts inside an internal face");
    if (!g.faces[visit[k]].outer && !g.faces[visit[k]].boundary_cell)
      throw Error(Err::NotGeneralPosition, "curve ends inside an internal face");
  }

  // Assemble the cut graph on the full vertex set, then split into components.
  int V = g.verts.size();
  std::vector<int> comp_of(V + 2 * k, -1);
  std::vector<std::vector<int>> vadj(V + 2 * k);
  std::vector<char> is_cut(g.edges.size(), 0);
  for (auto& c : cr) is_cut[c.edge] = 1;
  for (int e = 0; e < (int)g.edges.size(); ++e)
    if (!is_cut[e]) {
      vadj[g.edges[e].w].push_back(g.edges[e].b);
      vadj[g.edges[e].b].push_back(g.edges[e].w);
    }
  for (int i = 0; i < k; ++i) {
    int xb = V + 2 * i, yw = V + 2 * i + 1;
    vadj[g.edges[cr[i].edge].w].push_back(xb);
    vadj[xb].push_back(g.edges[cr[i].edge].w);
    vadj[g.edges[cr[i].edge].b].push_back(yw);
    vadj[yw].push_back(g.edges[cr[i].edge].b);
  }
  int ncomp = 0;
  for (int s = 0; s < V + 2 * k; ++s) {
    if (comp_of[s] >= 0) continue;
    std::vector<int> stack{s};
    comp_of[s] = ncomp;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u : vadj[v])
        if (comp_of[u] < 0) {
          comp_of[u] = ncomp;
          stack.push_back(u);
        }
    }
    ncomp++;
  }

  CurveCut r;
  r.components.resize(ncomp);
  r.weights.resize(ncomp);
  r.vertex_map.assign(V, {-1, -1});
  r.edge_map.assign(g.edges.size(), {-1, -1});
  for (int c = 0; c < ncomp; ++c) {
    r.components[c].torus = false;
    r.components[c].scale = g.scale;
  }
  std::vector<std::pair<int, int>> tip_map(2 * k, {-1, -1});
  for (int v = 0; v < V; ++v) {
    int c = comp_of[v];
    r.vertex_map[v] = {c, (int)r.components[c].verts.size()};
    r.components[c].verts.push_back(g.verts[v]);
  }
  for (int i = 0; i < k; ++i) {
    // Tips flank the actual crossing point along the edge.
    const GEdge& ed = g.edges[cr[i].edge];
    Vec2 wpos = g.verts[ed.w].pos;
    double len2 = ed.disp.dot(ed.disp);
    double te = len2 > 0 ? (cr[i].point - wpos).dot(ed.disp) / len2 : 0.5;
    TipPlacement tp;
    tp.x = wpos + ed.disp * (te * 0.9);
    tp.y = wpos + ed.disp * (te + (1 - te) * 0.1);
    int cb = comp_of[V + 2 * i], cw = comp_of[V + 2 * i + 1];
    tip_map[2 * i] = {cb, (int)r.components[cb].verts.size()};
    r.components[cb].verts.push_back({tp.x, false, true});
    tip_map[2 * i + 1] = {cw, (int)r.components[cw].verts.size()};
    r.components[cw].verts.push_back({tp.y, true, true});
  }
  for (int e = 0; e < (int)g.edges.size(); ++e) {
    if (is_cut[e]) continue;
    int c = comp_of[g.edges[e].w];
    if (c != comp_of[g.edges[e].b]) throw Error(Err::Internal, "uncut edge spans components");
    GEdge ne = g.edges[e];
    ne.w = r.vertex_map[g.edges[e].w].second;
    ne.b = r.vertex_map[g.edges[e].b].second;
    r.edge_map[e] = {c, (int)r.components[c].edges.size()};
    r.components[c].edges.push_back(ne);
    r.weights[c].w.push_back(w.w[e]);
  }
  r.crossings.resize(k);
  for (int i = 0; i < k; ++i) {
    const GEdge& ed = g.edges[cr[i].edge];
    auto [cb, xb] = tip_map[2 * i];
    auto [cw, yw] = tip_map[2 * i + 1];
    CurveCut::Crossing& cx = r.crossings[i];
    cx.old_edge = cr[i].edge;
    cx.t = cr[i].t;
    cx.white_half = {cb, (int)r.components[cb].edges.size()};
    Vec2 xpos = r.components[cb].verts[xb].pos;
    r.components[cb].edges.push_back(
        {r.vertex_map[ed.w].second, xb, ed.weight, 0, 0, xpos - g.verts[ed.w].pos});
    r.weights[cb].w.push_back(w.w[cr[i].edge]);
    cx.black_half = {cw, (int)r.components[cw].edges.size()};
    Vec2 ypos = r.components[cw].verts[yw].pos;
    r.components[cw].edges.push_back(
        {yw, r.vertex_map[ed.b].second, 1.0, 0, 0, g.verts[ed.b].pos - ypos});
    r.weights[cw].w.push_back(1.0);
  }
  for (int c = 0; c < ncomp; ++c) r.components[c].build();

  // Map each old half-edge to its component half-edge, stubs included.
  auto map_half = [&](int h) -> std::pair<int, int> {
    int e = h / 2;
    auto [c, ne] = r.edge_map[e];
    if (c < 0) return {-1, -1};
    return {c, 2 * ne + (h & 1)};
  };
  // For a crossed half-edge h at crossing i: stub half-edges bounding the
  // walk arc after/before it (same walk parity as h).
  auto stub_half = [&](int i, int par, bool after) -> std::pair<int, int> {
    bool black_side = (par == 0) == after;  // arc beyond the head for parity 0 is the black tip side
    auto [c, ne] = black_side ? r.crossings[i].black_half : r.crossings[i].white_half;
    return {c, 2 * ne + par};
  };

  std::map<int, int> crossing_of;  // edge -> crossing index
  for (int i = 0; i < k; ++i) crossing_of[cr[i].edge] = i;

  // Face map for uncrossed faces.
  r.face_map.assign(g.faces.size(), {-1, -1});
  std::set<int> visited_set(visit.begin(), visit.end());
  for (int f = 0; f < (int)g.faces.size(); ++f) {
    if (visited_set.count(f)) continue;
    std::pair<int, int> got{-1, -1};
    for (int h : g.faces[f].walk) {
      auto [c, nh] = map_half(h);
      if (c < 0) throw Error(Err::Internal, "uncrossed face contains a cut edge");
      std::pair<int, int> cand{c, r.components[c].face_of[nh]};
      if (got.first < 0)
        got = cand;
      else if (got != cand)
        throw Error(Err::Internal, "uncrossed face maps to two faces");
    }
    r.face_map[f] = got;
  }

  // Pairing of visited faces with their halves. Each arc of the old walk
  // between crossings, together with its bounding stubs, lands in one face.
  auto resolve_arc = [&](const std::vector<std::pair<int, int>>& halves) -> std::pair<int, int> {
    std::pair<int, int> got{-1, -1};
    for (auto [c, nh] : halves) {
      if (c < 0) continue;
      std::pair<int, int> cand{c, r.components[c].face_of[nh]};
      if (got.first < 0)
        got = cand;
      else if (got != cand)
        throw Error(Err::Internal, "face arc maps to two faces");
    }
    if (got.first < 0) throw Error(Err::Internal, "empty face arc");
    return got;
  };

  auto left_normal_side = [&](int ci, Vec2 p) {
    Vec2 d = cr[ci].rho_dir;
    Vec2 n{-d.y, d.x};
    return (p - cr[ci].point).dot(n) > 0;
  };

  for (int vi = 0; vi <= k; ++vi) {
    int f = visit[vi];
    if (g.faces[f].outer && vi == k) continue;  // already paired at entry
    const Face& face = g.faces[f];
    int len = face.walk.size();

    std::vector<int> cross_pos;
    for (int p = 0; p < len; ++p)
      if (is_cut[face.walk[p] / 2]) cross_pos.push_back(p);

    std::vector<std::pair<int, int>> arcA, arcB;  // half-edge refs per side
    Vec2 probeA, probeB;
    int ciA, ciB;
    if (!face.boundary_cell && cross_pos.size() == 2) {
      int p = cross_pos[0], q = cross_pos[1];
      int ep = face.walk[p], eq = face.walk[q];
      int ip = crossing_of.at(ep / 2), iq = crossing_of.at(eq / 2);
      // arc from after p to before q
      for (int t = (p + 1) % len; t != q; t = (t + 1) % len) arcA.push_back(map_half(face.walk[t]));
      arcA.push_back(stub_half(ip, ep & 1, true));
      arcA.push_back(stub_half(iq, eq & 1, false));
      for (int t = (q + 1) % len; t != p; t = (t + 1) % len) arcB.push_back(map_half(face.walk[t]));
      arcB.push_back(stub_half(iq, eq & 1, true));
      arcB.push_back(stub_half(ip, ep & 1, false));
      probeA = face.lifted[(p + 1) % len];  // tail of the entry of arc A = head of walk[p]
      ciA = ip;
      probeB = face.lifted[(q + 1) % len];
      ciB = iq;
    } else if (face.boundary_cell && cross_pos.size() == 1) {
      int p = cross_pos[0];
      int ep = face.walk[p];
      int ip = crossing_of.at(ep / 2);
      for (int t = p + 1; t < len; ++t) arcA.push_back(map_half(face.walk[t]));
      arcA.push_back(stub_half(ip, ep & 1, true));
      for (int t = 0; t < p; ++t) arcB.push_back(map_half(face.walk[t]));
      arcB.push_back(stub_half(ip, ep & 1, false));
      probeA = face.lifted[(p + 1) % len];  // head of the crossed half-edge
      ciA = ip;
      probeB = face.lifted[p];  // tail of the crossed half-edge
      ciB = ip;
    } else {
      throw Error(Err::Internal, "unexpected crossing pattern in a visited face");
    }

    CurveCut::FacePair pr;
    pr.old_face = f;
    auto fa = resolve_arc(arcA);
    auto fb = resolve_arc(arcB);
    bool a_left = left_normal_side(ciA, probeA);
    bool b_left = left_normal_side(ciB, probeB);
    if (a_left == b_left) throw Error(Err::Internal, "face halves on the same side of the curve");
    pr.left = a_left ? fa : fb;
    pr.right = a_left ? fb : fa;
    r.pairs.push_back(pr);
  }
  return r;
}

std::vector<Cover> CurveCut::push(const Cover& d) const {
  std::vector<Cover> out(components.size());
  std::vector<char> in(edge_map.size(), 0);
  for (int e : d) {
    if (e < 0 || e >= (int)edge_map.size())
      throw Error(Err::MalformedInput, "cover references unknown edge");
    in[e] = 1;
    auto [c, ne] = edge_map[e];
    if (c >= 0) out[c].push_back(ne);
  }
  for (const Crossing& cx : crossings)
    if (in[cx.old_edge]) {
      out[cx.white_half.first].push_back(cx.white_half.second);
      out[cx.black_half.first].push_back(cx.black_half.second);
    }
  for (Cover& c : out) std::sort(c.begin(), c.end());
  return out;
}

CuttingRuleReport check_cutting_rule(const Graph& g, const WeightSystem& w,
                                     const std::map<int, int>& chi, const std::vector<Vec2>& rho) {
  CuttingRuleReport rep;
  rep.z_direct = partition_function(g, w, BoundaryCondition::height(chi));

  CurveCut cc = cut_along_curve(g, w, rho);
  if (cc.components.size() != 2)
    throw Error(Err::MalformedInput, "cutting-rule check expects a separating curve");

  // Heights on both sides must be taken relative to the two restrictions of
  // one cover of the whole graph, the same lexicographically first one the
  // direct route anchors chi to. Otherwise the per-face offsets between
  // unrelated references break the additive-constant matching below.
  std::vector<Cover> refs = cc.push(enumerate_covers(g).front());

  // Per component: group covers by boundary-height vector. Where original
  // boundary cells survive, keep only classes agreeing with chi up to one
  // additive constant, fixing that constant.
  struct Class {
    std::vector<int> bh;
    double z = 0;
    long alpha = 0;
  };
  std::vector<std::vector<Class>> classes(2);
  bool pinned[2] = {false, false};
  for (int c = 0; c < 2; ++c) {
    const Graph& gc = cc.components[c];
    auto covers = enumerate_covers(gc);
    if (covers.empty()) continue;
    std::map<std::vector<int>, double> zmap;
    for (const Cover& d : covers)
      zmap[boundary_heights(gc, d, refs[c])] += cover_weight(gc, cc.weights[c], d);

    std::vector<std::pair<int, int>> orig;  // (slot in gc.boundary_faces, chi value)
    std::map<int, int> slot_of;
    for (size_t i = 0; i < gc.boundary_faces.size(); ++i) slot_of[gc.boundary_faces[i]] = i;
    for (int f = 0; f < (int)g.faces.size(); ++f) {
      if (!g.faces[f].boundary_cell) continue;
      auto [mc, mf] = cc.face_map[f];
      if (mc != c) continue;
      orig.push_back({slot_of.at(mf), chi.at(f)});
    }
    pinned[c] = !orig.empty();

    for (auto& [bh, z] : zmap) {
      long alpha = 0;
      bool ok = true;
      if (pinned[c]) {
        alpha = orig[0].second - bh[orig[0].first];
        for (auto& [slot, val] : orig)
          if (bh[slot] + alpha != val) {
            ok = false;
            break;
          }
      }
      if (ok) classes[c].push_back({bh, z, alpha});
    }
  }

  std::vector<std::map<int, int>> slot_of(2);
  for (int c = 0; c < 2; ++c)
    for (size_t i = 0; i < cc.components[c].boundary_faces.size(); ++i)
      slot_of[c][cc.components[c].boundary_faces[i]] = i;

  rep.z_factored = 0;
  for (const Class& ca : classes[0])
    for (const Class& cb : classes[1]) {
      const Class* by_comp[2] = {&ca, &cb};
      long alpha[2] = {ca.alpha, cb.alpha};
      bool known[2] = {pinned[0], pinned[1]};
      // Constraints: equal heights across every paired face, and the chi
      // value on paired faces that were boundary cells. A component whose
      // original cells were all crossed gets its constant from these.
      bool ok = true;
      for (int pass = 0; pass < 3 && ok; ++pass) {
        bool progress = false;
        for (const auto& pr : cc.pairs) {
          auto [cl, fl] = pr.left;
          auto [crr, fr] = pr.right;
          long rl = by_comp[cl]->bh[slot_of[cl].at(fl)];
          long rr = by_comp[crr]->bh[slot_of[crr].at(fr)];
          if (g.faces[pr.old_face].boundary_cell) {
            long want = chi.at(pr.old_face);
            for (auto [cx, rx] : {std::pair<int, long>{cl, rl}, {crr, rr}}) {
              if (!known[cx]) {
                alpha[cx] = want - rx;
                known[cx] = true;
                progress = true;
              } else if (rx + alpha[cx] != want) {
                ok = false;
              }
            }
          }
          if (known[cl] && known[crr]) {
            if (rl + alpha[cl] != rr + alpha[crr]) ok = false;
          } else if (known[cl] != known[crr]) {
            int u = known[cl] ? crr : cl;
            long kv = known[cl] ? rl + alpha[cl] : rr + alpha[crr];
            long ru = known[cl] ? rr : rl;
            alpha[u] = kv - ru;
            known[u] = true;
            progress = true;
          }
          if (!ok) break;
        }
        if (!progress) break;
      }
      if (!known[0] || !known[1]) throw Error(Err::Internal, "cut side with no height anchor");
      if (!ok) continue;
      rep.z_factored += ca.z * cb.z;
      rep.joint_classes++;
    }
  double denom = std::max(std::abs(rep.z_direct), 1e-300);
  rep.rel_error = std::abs(rep.z_direct - rep.z_factored) / denom;
  return rep;
}

}  // namespace dimer
