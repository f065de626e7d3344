#pragma once
#include <map>
#include <vector>

#include "dimerlab/lattice.hpp"

namespace dimer {

// A dimer cover: every internal vertex matched exactly once, boundary
// vertices matched at most once. Stored as the sorted list of edge ids.
using Cover = std::vector<int>;

std::vector<char> cover_mask(const Graph& g, const Cover& d);

// Unmatched boundary vertices of a cover.
std::vector<int> cover_delta(const Graph& g, const Cover& d);

struct BoundaryCondition {
  enum Kind { None, Delta, Height } kind = None;
  std::vector<int> unmatched;  // Delta: these boundary vertices stay unmatched
  std::map<int, int> chi;      // Height: face id -> value, up to additive constant

  static BoundaryCondition delta(std::vector<int> unmatched);
  static BoundaryCondition height(std::map<int, int> chi);
};

struct EnumOptions {
  int max_internal = 40;
  bool force = false;  // lift the size guard
};

// All covers, lexicographically ordered by sorted edge-id list.
std::vector<Cover> enumerate_covers(const Graph& g, const BoundaryCondition& bc = {},
                                    const EnumOptions& opt = {});

// Heights live on faces. Values are integers scaled by denom (1 for
// cover-relative heights, the valence N for absolute heights), anchored to 0
// at g.f0. On the torus the function is defined on the cut-open fundamental
// domain and (mono_s, mono_t) records the monodromy, which equals the slope.
struct HeightFunction {
  std::vector<int> h;
  int denom = 1;
  int mono_s = 0, mono_t = 0;
};

HeightFunction height_function(const Graph& g, const Cover& d, const Cover& ref);

// Intersection numbers of the cycle d - ref with the two homology cuts.
std::pair<int, int> slope(const Graph& g, const Cover& d, const Cover& ref);

// Boundary restriction of the height of d relative to ref, one value per
// g.boundary_faces entry; anchored so the first boundary face reads 0.
std::vector<int> boundary_heights(const Graph& g, const Cover& d, const Cover& ref);

// Absolute height of a cover on a patch whose internal vertices all have the
// same valence N; values scaled by N.
HeightFunction absolute_height(const Graph& g, const Cover& d);

// Common internal valence, or NotRegular.
int regular_valence(const Graph& g);

struct LocalRuleResult {
  bool ok = false;
  Cover cover;        // reconstruction when ok
  std::string why;    // first violation otherwise
};

// Checks the absolute-height local rule (values increase counterclockwise
// around white vertices, clockwise around black, one wrap-around drop at the
// matched edge) and reconstructs the unique cover when it holds.
LocalRuleResult check_local_rule(const Graph& g, const std::vector<int>& f);

struct LipschitzReport {
  bool ok = true;
  int checked_pairs = 0;
  int unreachable_pairs = 0;  // no oriented dual path; reported, not a failure
  std::string first_violation;
};

// h(f1) - h(f2) <= pi(f1,f2)/N where pi(f1,f2) is the length of the shortest
// dual path from f2 to f1 that turns clockwise at black vertices and
// counterclockwise at white ones (all crossings right-to-left).
LipschitzReport modified_lipschitz_check(const Graph& g, const Cover& d);

// Oriented dual distances: dist[a][b] = shortest oriented path a -> b.
std::vector<std::vector<int>> oriented_dual_distances(const Graph& g);

struct NewtonPolygon {
  std::vector<IntPoint> slopes;  // distinct slopes of G(1) covers, ref-shifted
  std::vector<IntPoint> hull;    // counterclockwise hull
  IntPoint shift;                // offset-sum of the reference cover
};

NewtonPolygon newton_polygon(const FundamentalDomain& fd);

}  // namespace dimer
