#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "dimerlab/lattice.hpp"
#include "doctest.h"

using namespace dimer;

static std::string preset(const char* name) {
  return std::string(TEST_SOURCE_DIR) + "/presets/" + name;
}

TEST_CASE("fundamental domain presets load and validate") {
  auto sq = FundamentalDomain::load(preset("square.json"));
  CHECK(sq.vertices.size() == 4);
  CHECK(sq.edges.size() == 8);
  CHECK(sq.white_count() == 2);

  auto hex = FundamentalDomain::load(preset("hexagonal.json"));
  CHECK(hex.vertices.size() == 2);
  CHECK(hex.edges.size() == 3);

  auto sq2 = FundamentalDomain::load(preset("square_two_vertex.json"));
  CHECK(sq2.edges.size() == 4);
}

TEST_CASE("fd validation rejects bad input") {
  FundamentalDomain fd;
  fd.vertices.push_back({"w", true, {0.25, 0.25}});
  fd.vertices.push_back({"b", false, {0.75, 0.75}});
  fd.edges.push_back({0, 1, 0, 0, 1.0});

  SUBCASE("negative weight") {
    fd.edges[0].weight = -1;
    CHECK_THROWS_AS(fd.validate(), Error);
  }
  SUBCASE("crossing edges") {
    // second white so the two diagonals of a square cross
    fd.vertices.push_back({"w2", true, {0.75, 0.25}});
    fd.vertices.push_back({"b2", false, {0.25, 0.76}});
    fd.edges.push_back({2, 3, 0, 0, 1.0});
    CHECK_THROWS_AS(fd.validate(), Error);
  }
  SUBCASE("white-white edge") {
    fd.vertices[1].white = true;
    CHECK_THROWS_AS(fd.validate(), Error);
  }
}

TEST_CASE("torus quotient sizes") {
  auto sq2 = FundamentalDomain::load(preset("square_two_vertex.json"));
  auto g1 = torus_quotient(sq2, 1);
  CHECK(g1.verts.size() == 2);
  CHECK(g1.edges.size() == 4);
  auto g2 = torus_quotient(sq2, 2);
  CHECK(g2.verts.size() == 8);
  CHECK(g2.edges.size() == 16);

  auto hex = FundamentalDomain::load(preset("hexagonal.json"));
  auto h2 = torus_quotient(hex, 2);
  CHECK(h2.verts.size() == 8);
  CHECK(h2.edges.size() == 12);

  auto sq = FundamentalDomain::load(preset("square.json"));
  auto s2 = torus_quotient(sq, 2);
  CHECK(s2.verts.size() == 16);
  CHECK(s2.edges.size() == 32);
  CHECK(s2.faces.size() == 16);  // 2n x 2n grid faces on the torus
}

TEST_CASE("torus face tracing satisfies Euler formula") {
  auto hex = FundamentalDomain::load(preset("hexagonal.json"));
  auto g = torus_quotient(hex, 1);
  CHECK(g.faces.size() == 1);
  auto g3 = torus_quotient(hex, 3);
  CHECK((int)g3.verts.size() - (int)g3.edges.size() + (int)g3.faces.size() == 0);
  CHECK(g3.faces.size() == 9);  // one hexagon per cell
}

TEST_CASE("4-cycle faces: one internal, one outer") {
  auto g = Graph::load(preset("cycle4.json"));
  CHECK(g.verts.size() == 4);
  CHECK(g.edges.size() == 4);
  REQUIRE(g.faces.size() == 2);
  int outer = -1, inner = -1;
  for (int f = 0; f < 2; f++) (g.faces[f].outer ? outer : inner) = f;
  REQUIRE(outer >= 0);
  REQUIRE(inner >= 0);
  CHECK(g.f0 == outer);
  CHECK(g.faces[inner].walk.size() == 4);
}

TEST_CASE("planar patch of the square lattice over a diamond") {
  auto sq = FundamentalDomain::load(preset("square.json"));
  std::vector<Vec2> diamond{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  auto g = planar_patch(sq, 8, diamond);

  std::vector<int> valence(g.verts.size(), 0);
  for (auto& e : g.edges) {
    valence[e.w]++;
    valence[e.b]++;
  }
  int nb = 0;
  for (size_t v = 0; v < g.verts.size(); v++) {
    if (g.verts[v].boundary) {
      nb++;
      CHECK(valence[v] == 1);
    } else {
      CHECK(valence[v] == 4);  // interior keeps full valence, stubs included
    }
  }
  CHECK(nb > 0);
  CHECK(g.scale == 8);
  CHECK(g.boundary_faces.size() == (size_t)nb);
  CHECK(g.f0 == g.boundary_faces.front());

  // rescaled vertices lie in the closed region
  for (auto& v : g.verts)
    if (!v.boundary)
      CHECK(std::fabs(v.pos.x / 8) + std::fabs(v.pos.y / 8) <= 1.0 + 1e-9);
}

TEST_CASE("patch vertex set approximates the region (Hausdorff C/n)") {
  auto sq = FundamentalDomain::load(preset("square.json"));
  std::vector<Vec2> unit{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (int n : {4, 8}) {
    auto g = planar_patch(sq, n, unit);
    double worst = 0;
    for (double x = 0.05; x < 1.0; x += 0.1)
      for (double y = 0.05; y < 1.0; y += 0.1) {
        double best = 1e9;
        for (auto& v : g.verts)
          best = std::min(best, (v.pos * (1.0 / n) - Vec2(x, y)).norm());
        worst = std::max(worst, best);
      }
    CHECK(worst <= 2.0 / n);
  }
}

TEST_CASE("empty patch raises") {
  auto sq = FundamentalDomain::load(preset("square.json"));
  std::vector<Vec2> tiny{{0.01, 0.01}, {0.02, 0.01}, {0.02, 0.02}};
  CHECK_THROWS_AS(planar_patch(sq, 1, tiny), Error);
  try {
    planar_patch(sq, 1, tiny);
  } catch (const Error& e) {
    CHECK(e.code() == Err::EmptyPatch);
  }
}

TEST_CASE("aztec diamond graphs") {
  CHECK(aztec_graph(1).verts.size() == 4);
  CHECK(aztec_graph(2).verts.size() == 12);
  CHECK(aztec_graph(3).verts.size() == 24);
  CHECK(aztec_graph(4).verts.size() == 40);
  auto g = aztec_graph(2);
  int nw = 0;
  for (auto& v : g.verts) nw += v.white ? 1 : 0;
  CHECK(nw * 2 == (int)g.verts.size());
  for (auto& v : g.verts) CHECK(!v.boundary);
}

TEST_CASE("grid patch and graph json round trip") {
  auto g = grid_patch(4, 4);
  CHECK(g.verts.size() == 16);
  CHECK(g.edges.size() == 24);
  auto text = g.to_json_text();
  auto h = Graph::from_json_text(text);
  CHECK(h.verts.size() == g.verts.size());
  CHECK(h.edges.size() == g.edges.size());
  CHECK(h.faces.size() == g.faces.size());
}

TEST_CASE("boundary cells split the outer region one per boundary vertex") {
  auto sq = FundamentalDomain::load(preset("square.json"));
  std::vector<Vec2> box{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  auto g = planar_patch(sq, 4, box);
  int nb = 0;
  for (auto& v : g.verts) nb += v.boundary ? 1 : 0;
  CHECK((int)g.boundary_faces.size() == nb);
  std::set<int> seen;
  for (int f : g.boundary_faces) {
    CHECK(g.faces[f].boundary_cell);
    // each boundary cell starts at a distinct tip
    int tail = g.hedge_tail(g.faces[f].walk.front());
    CHECK(g.verts[tail].boundary);
    CHECK(!seen.count(tail));
    seen.insert(tail);
  }
}
