#pragma once
#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <string>
#include <vector>

#include "dimerlab/covers.hpp"
#include "dimerlab/lattice.hpp"

namespace dimer {

using Rational = boost::multiprecision::cpp_rational;

// Positive weight per edge; the weight of a cover is the product over its
// edges. Serialized as a JSON object mapping edge id to weight; ids absent
// from the file default to 1.
struct WeightSystem {
  std::vector<double> w;

  static WeightSystem uniform(const Graph& g);
  static WeightSystem load(const Graph& g, const std::string& path);
  static WeightSystem from_json_text(const Graph& g, const std::string& text);
  std::string to_json_text() const;
  void validate(const Graph& g) const;
};

double cover_weight(const Graph& g, const WeightSystem& w, const Cover& d);

// Exact sum of cover weights by enumeration; 0 when no cover satisfies bc.
// Use the determinant route in the spectral module for larger graphs.
double partition_function(const Graph& g, const WeightSystem& w, const BoundaryCondition& bc = {},
                          const EnumOptions& opt = {});

// log Z via log-sum-exp, safe for weights spanning many orders of magnitude.
// Requires at least one admissible cover.
double log_partition_function(const Graph& g, const WeightSystem& w,
                              const BoundaryCondition& bc = {}, const EnumOptions& opt = {});

// Exact arithmetic variant for golden tests.
Rational partition_function_exact(const Graph& g, const std::vector<Rational>& w,
                                  const BoundaryCondition& bc = {}, const EnumOptions& opt = {});

double boltzmann_probability(const Graph& g, const WeightSystem& w, const Cover& d);

// Expected height under the Boltzmann measure, one value per face.
// On a patch of common internal valence N the heights are absolute ones
// scaled by N (denom = N); otherwise heights are taken relative to the
// lexicographically first admissible cover (denom = 1).
struct MeanHeight {
  std::vector<double> h;
  int denom = 1;
};
MeanHeight mean_height(const Graph& g, const WeightSystem& w, const BoundaryCondition& bc = {},
                       const EnumOptions& opt = {});

// Cutting an internal edge splits it into a white half (keeps the edge
// weight) and a black half (weight 1), each ending in a fresh valence-one
// boundary vertex, so every cover maps to a cover of the cut graph with the
// same weight.
struct EdgeCut {
  Graph g;
  WeightSystem w;
  std::vector<int> edge_map;  // old edge id -> new id; -1 for cut edges
  struct Halves {
    int old_edge;
    int white_half, black_half;  // new edge ids
    int tip_black, tip_white;    // new vertex ids (tip_black ends the white half)
  };
  std::vector<Halves> cuts;  // ascending old-edge order

  Cover push(const Cover& d) const;
};

EdgeCut cut_edges(const Graph& g, const WeightSystem& w, std::vector<int> edges);
EdgeCut cut_edge(const Graph& g, const WeightSystem& w, int edge);

// Canonical content fingerprint used to compare cut results structurally.
std::string graph_weight_key(const Graph& g, const WeightSystem& w);

// Cuts every edge crossed by the polyline rho, which must be in general
// position: clear of vertices, transversal to edges, and meeting each
// bounded face in one connected arc. Returns the resulting component
// graphs and the pairing between each crossed face and its two halves.
struct CurveCut {
  std::vector<Graph> components;
  std::vector<WeightSystem> weights;
  std::vector<std::pair<int, int>> vertex_map;  // old vertex -> (component, id)
  std::vector<std::pair<int, int>> edge_map;    // old edge -> (component, id); (-1,-1) if cut
  std::vector<std::pair<int, int>> face_map;    // uncrossed old face -> (component, id)

  struct Crossing {
    int old_edge;
    double t;  // position along the curve
    std::pair<int, int> white_half, black_half;
  };
  std::vector<Crossing> crossings;  // in curve order

  struct FacePair {
    int old_face;
    std::pair<int, int> left, right;  // halves on each side of the curve
  };
  std::vector<FacePair> pairs;  // in curve order, entry face first

  // Image of a cover, one per component: both halves of a crossed edge in d.
  std::vector<Cover> push(const Cover& d) const;
};

CurveCut cut_along_curve(const Graph& g, const WeightSystem& w, const std::vector<Vec2>& rho);

// Checks Z(graph, chi) against the factored sum over boundary conditions of
// the two components produced by cutting along rho. Both sides are computed
// by independent enumerations.
struct CuttingRuleReport {
  double z_direct = 0;
  double z_factored = 0;
  int joint_classes = 0;
  double rel_error = 0;
};
CuttingRuleReport check_cutting_rule(const Graph& g, const WeightSystem& w,
                                     const std::map<int, int>& chi, const std::vector<Vec2>& rho);

}  // namespace dimer
