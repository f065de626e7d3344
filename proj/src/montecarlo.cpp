#include "dimerlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "dimerlab/calculus.hpp"
#include "dimerlab/error.hpp"

namespace dimer {
namespace {

// Perfect matching on the non-killed part of the graph: every vertex outside
// `killed` must end up matched. Kuhn augmentation from each required white.
Cover matched_cover(const Graph& g, const std::vector<char>& killed) {
  int nv = (int)g.verts.size();
  std::vector<int> mate(nv, -1);
  std::vector<char> vis(nv, 0);
  std::vector<std::vector<int>> adj(nv);
  for (int e = 0; e < (int)g.edges.size(); ++e) {
    if (killed[g.edges[e].w] || killed[g.edges[e].b]) continue;
    adj[g.edges[e].w].push_back(e);
  }
  auto kuhn = [&](auto&& self, int wv) -> bool {
    for (int e : adj[wv]) {
      int bv = g.edges[e].b;
      if (vis[bv]) continue;
      vis[bv] = 1;
      if (mate[bv] < 0 || self(self, mate[bv])) {
        mate[bv] = wv;
        mate[wv] = e;  // whites store the edge id
        return true;
      }
    }
    return false;
  };
  for (int v = 0; v < nv; ++v) {
    if (killed[v] || !g.verts[v].white) continue;
    std::fill(vis.begin(), vis.end(), 0);
    if (!kuhn(kuhn, v)) throw Error(Err::NoCover, "no cover matches the requested boundary");
  }
  for (int v = 0; v < nv; ++v)
    if (!killed[v] && !g.verts[v].white && mate[v] < 0)
      throw Error(Err::NoCover, "no cover matches the requested boundary");
  Cover d;
  for (int v = 0; v < nv; ++v)
    if (!killed[v] && g.verts[v].white) d.push_back(mate[v]);
  std::sort(d.begin(), d.end());
  return d;
}

Cover initial_cover(const Graph& g, const BoundaryCondition& bc) {
  switch (bc.kind) {
    case BoundaryCondition::None:
      return reference_cover(g);
    case BoundaryCondition::Delta: {
      std::vector<char> killed(g.verts.size(), 0);
      for (int v : bc.unmatched) {
        if (v < 0 || v >= (int)g.verts.size() || !g.verts[v].boundary)
          throw Error(Err::MalformedInput, "delta condition names a non-boundary vertex");
        killed[v] = 1;
      }
      return matched_cover(g, killed);
    }
    case BoundaryCondition::Height: {
      auto ext = graph_max_extension(g, bc.chi);
      return cover_from_heights(g, ext.ref, ext.hmax);
    }
  }
  throw Error(Err::Internal, "unknown boundary condition");
}

// Faces the boundary is pinned to: the tagged boundary faces, or the outer
// faces of a stub-free graph.
std::vector<int> boundary_face_set(const Graph& g) {
  if (!g.boundary_faces.empty()) return g.boundary_faces;
  std::vector<int> out;
  for (int f = 0; f < (int)g.faces.size(); ++f)
    if (g.faces[f].outer) out.push_back(f);
  return out;
}

int dual_distance_to_boundary(const Graph& g, int face) {
  auto bset = boundary_face_set(g);
  std::vector<int> dist(g.faces.size(), -1);
  std::deque<int> q;
  for (int f : bset) {
    dist[f] = 0;
    q.push_back(f);
  }
  while (!q.empty()) {
    int f = q.front();
    q.pop_front();
    for (int hh : g.faces[f].walk) {
      int to = g.face_of[hh ^ 1];
      if (dist[to] < 0) {
        dist[to] = dist[f] + 1;
        q.push_back(to);
      }
    }
  }
  if (dist[face] < 0) throw Error(Err::Unreachable, "face not connected to the boundary");
  return dist[face];
}

struct ExactDistribution {
  std::vector<double> p;       // normalized cover probabilities
  std::vector<Cover> covers;   // admissible covers
  Cover ref;                   // heights below are relative to this
  std::vector<std::vector<int>> h;  // per cover, per face
};

ExactDistribution exact_distribution(const Graph& g, const WeightSystem& w,
                                     const BoundaryCondition& bc, const EnumOptions& opt) {
  ExactDistribution d;
  d.covers = enumerate_covers(g, bc, opt);
  if (d.covers.empty()) throw Error(Err::NoCover, "boundary condition admits no cover");
  d.ref = d.covers.front();
  for (const Cover& c : d.covers) d.p.push_back(cover_weight(g, w, c));
  double z = std::accumulate(d.p.begin(), d.p.end(), 0.0);
  for (double& x : d.p) x /= z;
  for (const Cover& c : d.covers) d.h.push_back(height_function(g, c, d.ref).h);
  return d;
}

}  // namespace

ChainState make_chain(const Graph& g, const WeightSystem& w, const BoundaryCondition& bc,
                      uint64_t seed) {
  if (g.torus) throw Error(Err::MalformedInput, "sampling runs on patches, not tori");
  w.validate(g);
  ChainState s;
  s.g = &g;
  s.w = w;
  s.bc = bc;
  s.seed = seed;
  s.ref = initial_cover(g, bc);
  s.mask = cover_mask(g, s.ref);
  s.h.assign(g.faces.size(), 0);
  for (int f = 0; f < (int)g.faces.size(); ++f) {
    const Face& fc = g.faces[f];
    if (fc.outer || fc.boundary_cell) continue;
    if (fc.walk.size() < 2 || fc.walk.size() % 2) continue;
    s.candidates.push_back(f);
  }
  return s;
}

void glauber_step(ChainState& s, CounterRng& rng) {
  const Graph& g = *s.g;
  ++s.steps;
  if (s.candidates.empty()) return;
  int f = s.candidates[rng.next_below(s.candidates.size())];
  const auto& walk = g.faces[f].walk;
  char phase = s.mask[walk[0] >> 1];
  double ratio = 1;
  for (size_t i = 0; i < walk.size(); ++i) {
    int e = walk[i] >> 1;
    if (s.mask[e] != ((i & 1) ? char(!phase) : phase)) return;
    ratio = s.mask[e] ? ratio / s.w.w[e] : ratio * s.w.w[e];
  }
  if (ratio < 1 && rng.next_double() >= ratio) return;
  for (int hh : walk) s.mask[hh >> 1] ^= 1;
  // Only h(f) moves; re-anchor it across the first walk edge.
  int dmd = phase ? -1 : 1;
  s.h[f] += (walk[0] & 1) ? dmd : -dmd;
  ++s.accepted;
}

Cover chain_cover(const ChainState& s) {
  Cover d;
  for (int e = 0; e < (int)s.mask.size(); ++e)
    if (s.mask[e]) d.push_back(e);
  return d;
}

bool chain_consistent(const ChainState& s) {
  const Graph& g = *s.g;
  Cover d = chain_cover(s);
  std::vector<int> deg(g.verts.size(), 0);
  for (int e : d) {
    ++deg[g.edges[e].w];
    ++deg[g.edges[e].b];
  }
  for (int v = 0; v < (int)g.verts.size(); ++v) {
    if (deg[v] > 1) return false;
    if (!g.verts[v].boundary && deg[v] != 1) return false;
  }
  if (cover_delta(g, d) != cover_delta(g, s.ref)) return false;
  return height_function(g, d, s.ref).h == s.h;
}

MeanHeightEstimate estimate_mean_height(const Graph& g, const WeightSystem& w,
                                        const BoundaryCondition& bc, uint64_t steps,
                                        uint64_t burn_in, uint64_t seed) {
  if (steps == 0) throw Error(Err::MalformedInput, "need at least one measurement step");
  ChainState s = make_chain(g, w, bc, seed);
  int nf = (int)g.faces.size();
  MeanHeightEstimate out;
  out.ref = s.ref;
  if (s.candidates.empty()) {
    // Nothing to rotate. Exact enumeration keeps the estimate honest when
    // the class holds more than one cover.
    auto d = exact_distribution(g, w, bc, {});
    auto base = height_function(g, d.ref, s.ref).h;
    out.h.assign(nf, 0);
    out.se.assign(nf, 0);
    for (size_t i = 0; i < d.covers.size(); ++i)
      for (int f = 0; f < nf; ++f) out.h[f] += d.p[i] * (d.h[i][f] + base[f]);
    out.enumerated = true;
    out.steps = 0;
    return out;
  }
  CounterRng rng(seed);
  for (uint64_t i = 0; i < burn_in; ++i) glauber_step(s, rng);
  uint64_t accepted0 = s.accepted;
  const int nb = (int)std::min<uint64_t>(20, steps);
  std::vector<double> sum(nf, 0);
  std::vector<std::vector<double>> bsum(nb, std::vector<double>(nf, 0));
  std::vector<uint64_t> bcount(nb, 0);
  for (uint64_t i = 0; i < steps; ++i) {
    glauber_step(s, rng);
    int b = (int)(i * nb / steps);
    ++bcount[b];
    for (int f = 0; f < nf; ++f) {
      sum[f] += s.h[f];
      bsum[b][f] += s.h[f];
    }
#ifndef NDEBUG
    if ((i + 1) % 10000 == 0 && !chain_consistent(s))
      throw Error(Err::InconsistentChain, "chain heights diverged from the cover");
#endif
  }
  if (!chain_consistent(s))
    throw Error(Err::InconsistentChain, "chain heights diverged from the cover");
  out.h.assign(nf, 0);
  out.se.assign(nf, 0);
  for (int f = 0; f < nf; ++f) {
    out.h[f] = sum[f] / (double)steps;
    if (nb > 1) {
      double var = 0;
      for (int b = 0; b < nb; ++b) {
        double d = bsum[b][f] / (double)bcount[b] - out.h[f];
        var += d * d;
      }
      out.se[f] = std::sqrt(var / (nb * (nb - 1.0)));
    }
  }
  out.steps = steps;
  out.acceptance = (double)(s.accepted - accepted0) / (double)steps;
  return out;
}

ConcentrationReport concentration_check(const Graph& g, const WeightSystem& w,
                                        const BoundaryCondition& bc, int face, double a,
                                        uint64_t trials, uint64_t seed) {
  if (face < 0 || face >= (int)g.faces.size())
    throw Error(Err::MalformedInput, "face id out of range");
  if (a <= 0) throw Error(Err::MalformedInput, "deviation scale must be positive");
  ConcentrationReport r;
  r.m = dual_distance_to_boundary(g, face);
  r.bound = 2 * std::exp(-a * a / 2);
  double thr = a * std::sqrt((double)r.m);
  try {
    auto d = exact_distribution(g, w, bc, {});
    double mean = 0;
    for (size_t i = 0; i < d.covers.size(); ++i) mean += d.p[i] * d.h[i][face];
    for (size_t i = 0; i < d.covers.size(); ++i)
      if (std::abs(d.h[i][face] - mean) > thr + 1e-9) r.tail += d.p[i];
    r.exact = true;
  } catch (const Error& e) {
    if (e.code() != Err::TooLarge || trials == 0) throw;
    ChainState s = make_chain(g, w, bc, seed);
    CounterRng rng(seed);
    uint64_t thin = 5 * std::max<uint64_t>(1, s.candidates.size());
    for (uint64_t i = 0; i < 100 * thin; ++i) glauber_step(s, rng);
    std::vector<int> draws;
    draws.reserve(trials);
    double mean = 0;
    for (uint64_t t = 0; t < trials; ++t) {
      for (uint64_t i = 0; i < thin; ++i) glauber_step(s, rng);
      draws.push_back(s.h[face]);
      mean += s.h[face];
    }
    mean /= (double)trials;
    uint64_t hits = 0;
    for (int v : draws)
      if (std::abs(v - mean) > thr + 1e-9) ++hits;
    r.tail = (double)hits / (double)trials;
    r.se = std::sqrt(std::max(r.tail * (1 - r.tail), 1.0 / trials) / (double)trials);
  }
  r.pass = r.tail <= r.bound + 3 * r.se;
  return r;
}

std::vector<std::map<int, int>> boundary_classes(const Graph& g, const EnumOptions& opt) {
  auto covers = enumerate_covers(g, {}, opt);
  if (covers.empty()) throw Error(Err::NoCover, "graph has no cover");
  std::set<std::vector<int>> seen;
  for (const Cover& d : covers) seen.insert(boundary_heights(g, d, covers.front()));
  std::vector<std::map<int, int>> out;
  for (const auto& v : seen) {
    std::map<int, int> chi;
    for (size_t i = 0; i < g.boundary_faces.size(); ++i) chi[g.boundary_faces[i]] = v[i];
    out.push_back(chi);
  }
  return out;
}

CouplingReport coupling_monotonicity_check(
    const Graph& g, const WeightSystem& w,
    const std::vector<std::pair<std::map<int, int>, std::map<int, int>>>& pairs,
    const EnumOptions& opt) {
  CouplingReport rep;
  for (const auto& [lo, hi] : pairs) {
    ++rep.pairs;
    auto anchored = [&](const std::map<int, int>& chi) {
      std::map<int, int> out = chi;
      if (!out.empty()) {
        int base = out.begin()->second;
        for (auto& [f, v] : out) v -= base;
      }
      return out;
    };
    auto clo = anchored(lo), chi_ = anchored(hi);
    if (clo.size() != chi_.size())
      throw Error(Err::MalformedInput, "boundary functions cover different face sets");
    for (auto it = clo.begin(), jt = chi_.begin(); it != clo.end(); ++it, ++jt) {
      if (it->first != jt->first)
        throw Error(Err::MalformedInput, "boundary functions cover different face sets");
      if (it->second > jt->second)
        throw Error(Err::MalformedInput, "pair is not pointwise ordered");
    }
    auto mlo = mean_height(g, w, BoundaryCondition::height(lo), opt);
    auto mhi = mean_height(g, w, BoundaryCondition::height(hi), opt);
    for (size_t f = 0; f < mlo.h.size(); ++f) {
      if ((mlo.h[f] - mhi.h[f]) / mlo.denom > 1e-12) {
        rep.monotone = false;
        if (rep.first_violation.empty())
          rep.first_violation = "pair " + std::to_string(rep.pairs - 1) + " face " +
                                std::to_string(f) + ": " + std::to_string(mlo.h[f]) + " > " +
                                std::to_string(mhi.h[f]);
      }
    }
  }
  return rep;
}

}  // namespace dimer
