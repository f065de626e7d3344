#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "dimerlab/error.hpp"
#include "dimerlab/gibbs.hpp"

using namespace dimer;

namespace {

std::string preset(const std::string& name) {
  return std::string(TEST_SOURCE_DIR) + "/presets/" + name;
}

const std::vector<Vec2> kUnitSquare = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
const std::vector<Vec2> kRegion33 = {{0, 0}, {0.8, 0}, {0.8, 0.8}, {0, 0.8}};

Graph patch33() {
  auto fd = FundamentalDomain::load(preset("square.json"));
  return planar_patch(fd, 2, kRegion33);
}

Graph patch44() {
  auto fd = FundamentalDomain::load(preset("square.json"));
  return planar_patch(fd, 2, kUnitSquare);
}

Graph hexpatch(double side) {
  auto fd = FundamentalDomain::load(preset("hexagonal.json"));
  std::vector<Vec2> reg = {{0, 0}, {side, 0}, {side, side}, {0, side}};
  return planar_patch(fd, 2, reg);
}

WeightSystem ramp_weights(const Graph& g, double base, double step, int stride, int mod) {
  WeightSystem w = WeightSystem::uniform(g);
  for (size_t e = 0; e < w.w.size(); ++e) w.w[e] = base + step * ((e * stride) % mod);
  return w;
}

std::map<int, int> chi_of(const Graph& g, const std::vector<int>& bh) {
  std::map<int, int> chi;
  for (size_t i = 0; i < g.boundary_faces.size(); ++i) chi[g.boundary_faces[i]] = bh[i];
  return chi;
}

// Count pairs of component covers that use the two halves of every crossed
// edge consistently. Each such pair glues back to one cover of the original
// graph, so the total must equal the cover count.
long glue_count(const CurveCut& cc) {
  auto ca = enumerate_covers(cc.components[0], {}, {60, true});
  auto cb = enumerate_covers(cc.components[1], {}, {60, true});
  auto sig = [&](const Cover& d, int comp) {
    std::set<int> in(d.begin(), d.end());
    unsigned long s = 0;
    for (const auto& cx : cc.crossings) {
      int used = 0;
      if (cx.white_half.first == comp) used = in.count(cx.white_half.second);
      else if (cx.black_half.first == comp) used = in.count(cx.black_half.second);
      s = s * 2 + used;
    }
    return s;
  };
  std::map<unsigned long, long> na, nb;
  for (auto& d : ca) na[sig(d, 0)]++;
  for (auto& d : cb) nb[sig(d, 1)]++;
  long total = 0;
  for (auto& [k, n] : na)
    if (nb.count(k)) total += n * nb[k];
  return total;
}

}  // namespace

TEST_CASE("weight systems: json parsing, defaults and validation") {
  Graph g = Graph::load(preset("cycle4.json"));
  WeightSystem w = WeightSystem::from_json_text(g, R"({"0": 3.0, "2": 0.5})");
  CHECK(w.w == std::vector<double>{3.0, 1.0, 0.5, 1.0});

  WeightSystem back = WeightSystem::from_json_text(g, w.to_json_text());
  CHECK(back.w == w.w);

  CHECK_THROWS_WITH_AS(WeightSystem::from_json_text(g, "[1,2]"),
                       "weight file must be a JSON object", Error);
  CHECK_THROWS_AS(WeightSystem::from_json_text(g, R"({"x": 1.0})"), Error);
  CHECK_THROWS_AS(WeightSystem::from_json_text(g, R"({"7": 1.0})"), Error);
  CHECK_THROWS_AS(WeightSystem::from_json_text(g, R"({"1": 0.0})"), Error);
  CHECK_THROWS_AS(WeightSystem::from_json_text(g, R"({"1": -2.0})"), Error);
  CHECK_THROWS_AS(WeightSystem::from_json_text(g, R"({"1": "a"})"), Error);
  CHECK_THROWS_AS(WeightSystem::load(g, preset("missing.json")), Error);

  WeightSystem bad = WeightSystem::uniform(g);
  bad.w.pop_back();
  CHECK_THROWS_AS(bad.validate(g), Error);
}

TEST_CASE("partition function: four-cycle matches the two-cover formula") {
  Graph g = Graph::load(preset("cycle4.json"));
  auto covers = enumerate_covers(g);
  REQUIRE(covers.size() == 2);
  REQUIRE(covers[0] == Cover{0, 2});
  REQUIRE(covers[1] == Cover{1, 3});

  WeightSystem w = WeightSystem::uniform(g);
  CHECK(partition_function(g, w) == 2.0);

  w.w = {2, 3, 5, 7};
  CHECK(partition_function(g, w) == doctest::Approx(2 * 5 + 3 * 7).epsilon(1e-15));
  CHECK(cover_weight(g, w, covers[0]) == doctest::Approx(10.0));
  CHECK(cover_weight(g, w, covers[1]) == doctest::Approx(21.0));
}

TEST_CASE("partition function: boundary conditions on the single-edge graph") {
  Graph g = Graph::from_json_text(R"({
    "scale": 1,
    "vertices": [
      {"id": 0, "color": "white", "pos": [0.0, 0.0], "boundary": true},
      {"id": 1, "color": "black", "pos": [1.0, 0.0], "boundary": true}
    ],
    "edges": [{"white": 0, "black": 1, "weight": 1.0}]
  })");
  WeightSystem w = WeightSystem::uniform(g);
  w.w[0] = 3.0;
  CHECK(partition_function(g, w) == 4.0);  // edge used or not
  CHECK(partition_function(g, w, BoundaryCondition::delta({})) == 3.0);
  CHECK(partition_function(g, w, BoundaryCondition::delta({0, 1})) == 1.0);  // empty cover
  CHECK(partition_function(g, w, BoundaryCondition::delta({0})) == 0.0);
  CHECK_THROWS_AS(log_partition_function(g, w, BoundaryCondition::delta({0})), Error);

  // the full cover carries w0 of the total mass
  CHECK(boltzmann_probability(g, w, Cover{0}) == doctest::Approx(0.75));
  CHECK(boltzmann_probability(g, w, Cover{}) == doctest::Approx(0.25));
}

TEST_CASE("exact rational partition function") {
  Graph g = Graph::load(preset("cycle4.json"));
  std::vector<Rational> w = {Rational(1, 3), Rational(1, 5), Rational(1, 7), Rational(1, 9)};
  CHECK(partition_function_exact(g, w) == Rational(22, 315));

  Graph az = aztec_graph(2);
  std::vector<Rational> uw(az.edges.size(), 1);
  CHECK(partition_function_exact(az, uw) == 8);
  CHECK_THROWS_AS(partition_function_exact(az, std::vector<Rational>(3, 1)), Error);
}

TEST_CASE("partition function splits over boundary-height classes") {
  Graph g = patch33();
  auto covers = enumerate_covers(g);
  REQUIRE(covers.size() == 448);

  WeightSystem w = ramp_weights(g, 0.5, 0.13, 7, 11);
  std::map<std::vector<int>, double> cls;
  for (auto& d : covers) cls[boundary_heights(g, d, covers[0])] += cover_weight(g, w, d);

  double total = 0;
  for (auto& [bh, z] : cls) {
    // shift chi to exercise the up-to-constant comparison
    std::vector<int> shifted = bh;
    for (int& v : shifted) v += 5;
    double zc = partition_function(g, w, BoundaryCondition::height(chi_of(g, shifted)));
    CHECK(zc == doctest::Approx(z).epsilon(1e-12));
    total += zc;
  }
  CHECK(total == doctest::Approx(partition_function(g, w)).epsilon(1e-12));
}

TEST_CASE("log partition function survives weights far outside double range") {
  Graph g = Graph::load(preset("cycle4.json"));
  WeightSystem w = WeightSystem::uniform(g);
  CHECK(log_partition_function(g, w) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

  for (double& x : w.w) x = 1e200;  // cover weight 1e400 overflows double
  double expect = std::log(2.0) + 400 * std::log(10.0);
  CHECK(log_partition_function(g, w) == doctest::Approx(expect).epsilon(1e-12));

  for (double& x : w.w) x = 1e-200;
  expect = std::log(2.0) - 400 * std::log(10.0);
  CHECK(log_partition_function(g, w) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("boltzmann probabilities on the four-cycle") {
  Graph g = Graph::load(preset("cycle4.json"));
  WeightSystem w = WeightSystem::uniform(g);
  w.w = {3, 1, 1, 1};
  CHECK(boltzmann_probability(g, w, Cover{0, 2}) == doctest::Approx(0.75));
  CHECK(boltzmann_probability(g, w, Cover{1, 3}) == doctest::Approx(0.25));
}

TEST_CASE("mean height: four-cycle uses absolute heights scaled by the valence") {
  Graph g = Graph::load(preset("cycle4.json"));
  int inner = -1;
  for (int f = 0; f < (int)g.faces.size(); ++f)
    if (!g.faces[f].outer) inner = f;
  REQUIRE(inner == 0);

  auto covers = enumerate_covers(g);
  CHECK(absolute_height(g, covers[0]).h[inner] == -1);
  CHECK(absolute_height(g, covers[1]).h[inner] == 1);

  WeightSystem w = WeightSystem::uniform(g);
  MeanHeight mh = mean_height(g, w);
  CHECK(mh.denom == 2);
  CHECK(mh.h[inner] == doctest::Approx(0.0));  // (+1 - 1) / 2

  w.w = {3, 1, 1, 1};
  mh = mean_height(g, w);
  CHECK(mh.h[inner] == doctest::Approx(-0.5));  // 0.75 * (-1) + 0.25 * (+1)
}

TEST_CASE("mean height: mixed-valence aztec graph falls back to relative heights") {
  Graph g = aztec_graph(2);
  MeanHeight mh = mean_height(g, WeightSystem::uniform(g));
  CHECK(mh.denom == 1);
  REQUIRE(mh.h.size() == 6);
  std::vector<double> expect = {0, -0.25, -0.75, -0.5, -0.75, -0.25};
  for (size_t f = 0; f < expect.size(); ++f) CHECK(mh.h[f] == doctest::Approx(expect[f]).epsilon(1e-14));
}

TEST_CASE("mean height matches a by-hand boltzmann average on a regular patch") {
  Graph g = patch33();
  WeightSystem w = ramp_weights(g, 0.5, 0.13, 7, 11);
  MeanHeight mh = mean_height(g, w);
  CHECK(mh.denom == 4);

  auto covers = enumerate_covers(g);
  double z = 0;
  std::vector<double> acc(g.faces.size(), 0);
  for (auto& d : covers) {
    double p = cover_weight(g, w, d);
    z += p;
    auto ah = absolute_height(g, d);
    for (size_t f = 0; f < acc.size(); ++f) acc[f] += p * ah.h[f];
  }
  for (size_t f = 0; f < acc.size(); ++f)
    CHECK(mh.h[f] == doctest::Approx(acc[f] / z).epsilon(1e-12));

  // uniform pinned values
  MeanHeight u = mean_height(g, WeightSystem::uniform(g));
  CHECK(u.h[0] == doctest::Approx(0.0));
  CHECK(u.h[5] == doctest::Approx(9.0 / 28).epsilon(1e-12));
  CHECK(*std::max_element(u.h.begin(), u.h.end()) == doctest::Approx(9.0 / 14).epsilon(1e-12));
}

TEST_CASE("mean height under a height boundary condition averages only that class") {
  Graph g = patch33();
  auto covers = enumerate_covers(g);
  auto bh = boundary_heights(g, covers[100], covers[0]);
  auto bc = BoundaryCondition::height(chi_of(g, bh));
  WeightSystem w = ramp_weights(g, 0.5, 0.13, 7, 11);

  MeanHeight mh = mean_height(g, w, bc);
  double z = 0;
  std::vector<double> acc(g.faces.size(), 0);
  for (auto& d : covers) {
    if (boundary_heights(g, d, covers[0]) != bh) continue;
    double p = cover_weight(g, w, d);
    z += p;
    auto ah = absolute_height(g, d);
    for (size_t f = 0; f < acc.size(); ++f) acc[f] += p * ah.h[f];
  }
  REQUIRE(z > 0);
  for (size_t f = 0; f < acc.size(); ++f)
    CHECK(mh.h[f] == doctest::Approx(acc[f] / z).epsilon(1e-12));
}

TEST_CASE("edge cut: covers map through with the same weight") {
  Graph g = patch33();
  WeightSystem w = ramp_weights(g, 0.5, 0.13, 7, 11);
  int target = -1;
  for (int e = 0; e < (int)g.edges.size(); ++e)
    if (!g.verts[g.edges[e].w].boundary && !g.verts[g.edges[e].b].boundary) {
      target = e;
      break;
    }
  REQUIRE(target >= 0);

  EdgeCut ec = cut_edge(g, w, target);
  CHECK(ec.g.verts.size() == g.verts.size() + 2);
  CHECK(ec.g.edges.size() == g.edges.size() + 1);
  REQUIRE(ec.cuts.size() == 1);
  CHECK(ec.cuts[0].old_edge == target);
  CHECK(ec.w.w[ec.cuts[0].white_half] == w.w[target]);
  CHECK(ec.w.w[ec.cuts[0].black_half] == 1.0);
  CHECK(ec.edge_map[target] == -1);

  for (const Cover& d : enumerate_covers(g)) {
    Cover img = ec.push(d);
    CHECK(cover_weight(ec.g, ec.w, img) == doctest::Approx(cover_weight(g, w, d)).epsilon(1e-14));
    bool used = std::binary_search(d.begin(), d.end(), target);
    bool wh = std::binary_search(img.begin(), img.end(), ec.cuts[0].white_half);
    bool bh = std::binary_search(img.begin(), img.end(), ec.cuts[0].black_half);
    CHECK(wh == used);
    CHECK(bh == used);
  }
}

TEST_CASE("edge cut: Z equals the tip-consistent sum over covers of the cut graph") {
  Graph g = patch33();
  WeightSystem w = ramp_weights(g, 0.5, 0.13, 7, 11);
  int target = -1;
  for (int e = 0; e < (int)g.edges.size(); ++e)
    if (!g.verts[g.edges[e].w].boundary && !g.verts[g.edges[e].b].boundary) target = e;
  REQUIRE(target >= 0);

  EdgeCut ec = cut_edge(g, w, target);
  // independent route: enumerate the cut graph and keep covers using the two
  // halves together or not at all
  double z2 = 0;
  long kept = 0, dropped = 0;
  for (const Cover& d : enumerate_covers(ec.g)) {
    bool wh = std::binary_search(d.begin(), d.end(), ec.cuts[0].white_half);
    bool bh = std::binary_search(d.begin(), d.end(), ec.cuts[0].black_half);
    if (wh != bh) {
      dropped++;
      continue;
    }
    kept++;
    z2 += cover_weight(ec.g, ec.w, d);
  }
  CHECK(kept == 448);
  CHECK(dropped > 0);  // the cut graph does admit inconsistent covers
  CHECK(z2 == doctest::Approx(partition_function(g, w)).epsilon(1e-12));
}

TEST_CASE("edge cut: boundary and bogus edges are rejected") {
  Graph g = patch33();
  WeightSystem w = WeightSystem::uniform(g);
  int stub = -1;
  for (int e = 0; e < (int)g.edges.size(); ++e)
    if (g.verts[g.edges[e].w].boundary || g.verts[g.edges[e].b].boundary) stub = e;
  REQUIRE(stub >= 0);
  CHECK_THROWS_AS(cut_edge(g, w, stub), Error);
  CHECK_THROWS_AS(cut_edge(g, w, -1), Error);
  CHECK_THROWS_AS(cut_edge(g, w, (int)g.edges.size()), Error);
  CHECK_THROWS_AS(cut_edges(g, w, {5, 5}), Error);

  // cutting every internal edge at one vertex strands it among its tips
  std::vector<int> star;
  for (int e = 0; e < (int)g.edges.size(); ++e)
    if (!g.verts[g.edges[e].b].boundary && g.edges[e].w == g.edges[2].w) star.push_back(e);
  try {
    cut_edges(g, w, star);
    FAIL("separating cut set not rejected");
  } catch (const Error& ex) {
    CHECK(ex.code() == Err::MalformedInput);
    CHECK(std::string(ex.what()).find("disconnect") != std::string::npos);
  }

  Graph t = torus_quotient(FundamentalDomain::load(preset("square.json")), 2);
  CHECK_THROWS_AS(cut_edge(t, WeightSystem::uniform(t), 0), Error);
}

TEST_CASE("edge cuts commute") {
  Graph g = patch33();
  WeightSystem w = ramp_weights(g, 0.5, 0.13, 7, 11);
  // first pair of internal edges with four distinct endpoints, so neither
  // order strands a vertex between the cuts
  int a = -1, b = -1;
  for (int e = 0; e < (int)g.edges.size() && b < 0; ++e) {
    if (g.verts[g.edges[e].w].boundary || g.verts[g.edges[e].b].boundary) continue;
    if (a < 0) {
      a = e;
    } else if (g.edges[e].w != g.edges[a].w && g.edges[e].b != g.edges[a].b) {
      b = e;
    }
  }
  REQUIRE(a >= 0);
  REQUIRE(b > a);

  EdgeCut ab1 = cut_edge(g, w, a);
  EdgeCut ab = cut_edge(ab1.g, ab1.w, ab1.edge_map[b]);
  EdgeCut ba1 = cut_edge(g, w, b);
  EdgeCut ba = cut_edge(ba1.g, ba1.w, ba1.edge_map[a]);
  EdgeCut both = cut_edges(g, w, {b, a});

  std::string k1 = graph_weight_key(ab.g, ab.w);
  std::string k2 = graph_weight_key(ba.g, ba.w);
  std::string k3 = graph_weight_key(both.g, both.w);
  CHECK(k1 == k2);
  CHECK(k1 == k3);
  CHECK(k1 != graph_weight_key(g, w));
  REQUIRE(both.cuts.size() == 2);
  CHECK(both.cuts[0].old_edge == a);  // canonical ascending order
  CHECK(both.cuts[1].old_edge == b);
}

TEST_CASE("graph weight key ignores labeling, not content") {
  Graph g = Graph::load(preset("cycle4.json"));
  WeightSystem w = WeightSystem::uniform(g);
  // same graph with vertices listed in a different order
  Graph h = Graph::from_json_text(R"({
    "scale": 1,
    "vertices": [
      {"id": 3, "color": "black", "pos": [0.0, 1.0]},
      {"id": 0, "color": "white", "pos": [0.0, 0.0]},
      {"id": 1, "color": "black", "pos": [1.0, 0.0]},
      {"id": 2, "color": "white", "pos": [1.0, 1.0]}
    ],
    "edges": [
      {"white": 0, "black": 1, "weight": 1.0},
      {"white": 2, "black": 1, "weight": 1.0},
      {"white": 2, "black": 3, "weight": 1.0},
      {"white": 0, "black": 3, "weight": 1.0}
    ]
  })");
  CHECK(graph_weight_key(g, w) == graph_weight_key(h, WeightSystem::uniform(h)));
  WeightSystem w2 = w;
  w2.w[2] = 1.5;
  CHECK(graph_weight_key(g, w) != graph_weight_key(g, w2));
}

TEST_CASE("curve cut: vertical line through a four-by-four grid") {
  Graph g = grid_patch(4, 4);
  WeightSystem w = WeightSystem::uniform(g);
  CurveCut cc = cut_along_curve(g, w, {{1.5, -1.0}, {1.5, 4.0}});
  REQUIRE(cc.components.size() == 2);
  CHECK(cc.crossings.size() == 4);
  CHECK(cc.pairs.size() == 4);
  for (const Graph& c : cc.components) {
    CHECK(c.verts.size() == 12);  // eight grid vertices plus four tips
    CHECK(c.edges.size() == 14);
    CHECK(c.faces.size() == 7);
    CHECK(c.boundary_faces.size() == 4);
  }
  // one pair per crossed interior face plus one for the outer face
  int outer_pairs = 0;
  for (auto& p : cc.pairs) outer_pairs += g.faces[p.old_face].outer;
  CHECK(outer_pairs == 1);
  for (auto& p : cc.pairs) CHECK(p.left.first != p.right.first);

  CHECK(glue_count(cc) == 36);
  CHECK(enumerate_covers(g).size() == 36);

  // pushing covers through preserves the weight
  WeightSystem rw = ramp_weights(g, 0.5, 0.13, 7, 11);
  CurveCut cw = cut_along_curve(g, rw, {{1.5, -1.0}, {1.5, 4.0}});
  for (const Cover& d : enumerate_covers(g)) {
    auto img = cw.push(d);
    double p = 1;
    for (int c = 0; c < 2; ++c) p *= cover_weight(cw.components[c], cw.weights[c], img[c]);
    CHECK(p == doctest::Approx(cover_weight(g, rw, d)).epsilon(1e-14));
  }
}

TEST_CASE("curve cut: vertical line through a stubbed square patch") {
  Graph g = patch44();
  WeightSystem w = WeightSystem::uniform(g);
  CurveCut cc = cut_along_curve(g, w, {{1.0, -0.5}, {1.0, 2.5}});
  REQUIRE(cc.components.size() == 2);
  CHECK(cc.crossings.size() == 4);
  CHECK(cc.pairs.size() == 5);  // entry cell, three interior faces, exit cell
  for (const Graph& c : cc.components) {
    CHECK(c.verts.size() == 20);
    CHECK(c.edges.size() == 22);
    CHECK(c.faces.size() == 15);
    CHECK(c.boundary_faces.size() == 12);
  }
  CHECK(g.faces[cc.pairs.front().old_face].boundary_cell);
  CHECK(g.faces[cc.pairs.back().old_face].boundary_cell);
  CHECK(glue_count(cc) == 10724);

  // a crooked cut and one shaving off a single vertex
  CurveCut zig = cut_along_curve(g, w, {{-0.2, 0.6}, {1.1, 0.9}, {0.9, 2.2}});
  CHECK(zig.components.size() == 2);
  CHECK(zig.crossings.size() == 5);
  CHECK(zig.pairs.size() == 6);
  CHECK(glue_count(zig) == 10724);

  CurveCut u = cut_along_curve(g, w, {{0.3, -0.5}, {0.3, 0.35}, {0.8, 0.35}, {0.8, -0.5}});
  CHECK(u.components.size() == 2);
  CHECK(u.crossings.size() == 3);
  CHECK(u.pairs.size() == 4);
  std::vector<size_t> sizes = {u.components[0].verts.size(), u.components[1].verts.size()};
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<size_t>{5, 33});
  CHECK(glue_count(u) == 10724);
}

TEST_CASE("curve cut: general-position violations are reported") {
  Graph g = patch44();
  WeightSystem w = WeightSystem::uniform(g);
  auto err = [&](std::vector<Vec2> rho) {
    try {
      cut_along_curve(g, w, rho);
      return std::string("none");
    } catch (const Error& e) {
      return std::string(err_name(e.code())) + ": " + e.what();
    }
  };
  CHECK(err({{0.75, -0.5}, {0.75, 2.5}}) == "NotGeneralPosition: curve passes through a vertex");
  CHECK(err({{1.0, -0.5}, {1.0, 0.25}}) ==
        "NotGeneralPosition: curve touches an edge without crossing it");
  CHECK(err({{1.0, -0.2}, {1.0, 0.3}, {1.1, 0.1}, {1.2, 0.3}}) ==
        "NotGeneralPosition: curve crosses an edge more than once");
  CHECK(err({{0.65, 0.02}, {0.85, 0.12}}) == "BoundaryEdge: curve crosses a boundary edge");
  CHECK(err({{1.0, 1.0}, {1.0, 2.5}}) == "NotGeneralPosition: curve starts inside an internal face");
  CHECK(err({{-0.5, -0.5}, {-0.2, -0.2}}) == "MalformedInput: curve does not cross any edge");
  CHECK(err({{1.0, -0.5}}) == "MalformedInput: curve needs at least two points");
  CHECK(err({{1.0, -0.5}, {1.0, -0.5}, {1.0, 2.5}}) ==
        "MalformedInput: curve has a zero-length segment");

  // revisiting an interior face through fresh edges
  Graph grid = grid_patch(4, 4);
  WeightSystem gw = WeightSystem::uniform(grid);
  CHECK_THROWS_WITH_AS(
      cut_along_curve(grid, gw,
                      {{1.5, -0.5},
                       {1.5, 1.5},
                       {2.5, 1.5},
                       {2.5, 2.5},
                       {1.5, 2.5},
                       {1.5, 1.7},
                       {0.7, 1.7},
                       {0.7, 0.7},
                       {-0.5, 0.5}}),
      "curve meets a face in a disconnected set", Error);
  CHECK_THROWS_WITH_AS(
      cut_along_curve(grid, gw,
                      {{-0.5, 1.5}, {0.5, 1.5}, {0.5, -0.5}, {1.5, -0.5}, {1.5, 0.5}, {3.5, 0.5}}),
      "curve meets the outer face away from its ends", Error);

  // crossing through a boundary cell mid-way, distinct edges throughout
  Graph hex = hexpatch(2.2);
  CHECK_THROWS_WITH_AS(
      cut_along_curve(hex, WeightSystem::uniform(hex),
                      {{2.0, -0.3}, {2.0, 0.8}, {1.45, 0.8}, {1.0, 0.3}, {0.35, 0.7}}),
      "curve re-enters the boundary region mid-way", Error);

  Graph t = torus_quotient(FundamentalDomain::load(preset("square.json")), 2);
  CHECK_THROWS_AS(cut_along_curve(t, WeightSystem::uniform(t), {{0.5, -0.5}, {0.5, 2.5}}), Error);
}

TEST_CASE("cutting rule on a stubbed square patch") {
  Graph g = patch44();
  auto covers = enumerate_covers(g);
  REQUIRE(covers.size() == 10724);

  // most populated boundary-height class, frozen from enumeration
  std::map<std::vector<int>, int> cls;
  for (auto& d : covers) cls[boundary_heights(g, d, covers[0])]++;
  CHECK(cls.size() == 3825);
  std::vector<int> best = {0, -1, 0, -1, 0, -1, 0, 0, -1, 1, 0, 1, 1, 1, 1, 0};
  REQUIRE(cls.count(best));
  CHECK(cls.at(best) == 36);

  std::vector<Vec2> rho = {{1.0, -0.5}, {1.0, 2.5}};
  WeightSystem w = WeightSystem::uniform(g);
  CuttingRuleReport rep = check_cutting_rule(g, w, chi_of(g, best), rho);
  CHECK(rep.z_direct == doctest::Approx(36.0).epsilon(1e-14));
  CHECK(rep.joint_classes == 6);
  CHECK(rep.rel_error <= 1e-12);

  // shifting chi by a constant changes nothing
  std::vector<int> shifted = best;
  for (int& v : shifted) v += 7;
  CuttingRuleReport rep2 = check_cutting_rule(g, w, chi_of(g, shifted), rho);
  CHECK(rep2.z_direct == doctest::Approx(rep.z_direct));
  CHECK(rep2.joint_classes == rep.joint_classes);

  // generic weights
  WeightSystem rw = ramp_weights(g, 0.5, 0.13, 7, 11);
  CuttingRuleReport rep3 = check_cutting_rule(g, rw, chi_of(g, best), rho);
  CHECK(rep3.z_direct == doctest::Approx(72.581499089867).epsilon(1e-10));
  CHECK(rep3.rel_error <= 1e-12);

  // a crooked curve and a singleton class
  CuttingRuleReport rep4 =
      check_cutting_rule(g, w, chi_of(g, boundary_heights(g, covers[5000], covers[0])),
                         {{-0.2, 0.6}, {1.1, 0.9}, {0.9, 2.2}});
  CHECK(rep4.z_direct == doctest::Approx(2.0));
  CHECK(rep4.rel_error <= 1e-12);

  CuttingRuleReport rep5 =
      check_cutting_rule(g, w, chi_of(g, boundary_heights(g, covers[0], covers[0])), rho);
  CHECK(rep5.z_direct == doctest::Approx(1.0));
  CHECK(rep5.joint_classes == 1);
  CHECK(rep5.rel_error <= 1e-12);
}

TEST_CASE("cutting rule on a hexagonal patch") {
  Graph g = hexpatch(1.1);
  auto covers = enumerate_covers(g);
  REQUIRE(covers.size() == 44);

  std::map<std::vector<int>, int> cls;
  for (auto& d : covers) cls[boundary_heights(g, d, covers[0])]++;
  CHECK(cls.size() == 40);
  std::vector<int> best = {0, -1, -1, -1, -1, 0, 0, -1};
  REQUIRE(cls.count(best));
  CHECK(cls.at(best) == 2);

  std::vector<Vec2> rho = {{1.0, -0.3}, {1.0, 2.3}};
  WeightSystem w = WeightSystem::uniform(g);
  CurveCut cc = cut_along_curve(g, w, rho);
  CHECK(cc.components.size() == 2);
  CHECK(cc.crossings.size() == 2);
  CHECK(cc.pairs.size() == 3);
  CHECK(glue_count(cc) == 44);

  CuttingRuleReport rep = check_cutting_rule(g, w, chi_of(g, best), rho);
  CHECK(rep.z_direct == doctest::Approx(2.0));
  CHECK(rep.joint_classes == 2);
  CHECK(rep.rel_error <= 1e-12);

  WeightSystem rw = ramp_weights(g, 0.7, 0.09, 5, 13);
  CuttingRuleReport rep2 = check_cutting_rule(g, rw, chi_of(g, best), rho);
  CHECK(rep2.z_direct == doctest::Approx(7.19486).epsilon(1e-5));
  CHECK(rep2.rel_error <= 1e-12);
}
