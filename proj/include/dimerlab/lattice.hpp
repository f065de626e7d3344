#pragma once
#include <string>
#include <vector>

#include "dimerlab/error.hpp"
#include "dimerlab/geom.hpp"

namespace dimer {

struct FdVertex {
  std::string id;
  bool white = false;
  Vec2 pos;  // in [0,1)^2
};

struct FdEdge {
  int white = -1, black = -1;  // indices into vertices
  int dx = 0, dy = 0;          // cell offset from white's cell to black's cell
  double weight = 1.0;
};

// One period of a biperiodic bipartite plane graph. Translates of the cell by
// Z^2 tile the plane; edges may reach into neighbouring cells via (dx,dy).
struct FundamentalDomain {
  std::vector<FdVertex> vertices;
  std::vector<FdEdge> edges;

  int white_count() const;
  int black_count() const;
  void validate() const;  // bipartite refs, weights > 0, embedding without crossings

  static FundamentalDomain from_json_text(const std::string& text);
  static FundamentalDomain load(const std::string& path);
  std::string to_json_text() const;
};

struct GVertex {
  Vec2 pos;
  bool white = false;
  bool boundary = false;  // valence-one boundary vertex
};

struct GEdge {
  int w = -1, b = -1;  // white / black endpoint
  double weight = 1.0;
  int wrap_x = 0, wrap_y = 0;  // signed torus cut crossings; 0 on patches
  Vec2 disp;                   // unwrapped displacement white -> black
};

struct Face {
  std::vector<int> walk;       // half-edge sequence, interior on the left
  std::vector<Vec2> lifted;    // lifted tail position per walk entry
  bool outer = false;          // unbounded face of a stub-free planar graph
  bool boundary_cell = false;  // cell touching a boundary vertex
  Vec2 sample;                 // representative point (mean of lifted tails)
};

// Embedded bipartite graph, either a planar patch (possibly with valence-one
// boundary vertices) or an n x n torus quotient. Half-edge 2e points white to
// black, 2e+1 back. Faces are traced from the rotation system given by the
// embedding; face ids are canonical (sorted by minimal half-edge).
class Graph {
public:
  std::vector<GVertex> verts;
  std::vector<GEdge> edges;
  bool torus = false;
  int torus_n = 0;
  int scale = 1;  // patch rescale factor (positions/scale approximate the domain)

  // filled by build()
  std::vector<std::vector<int>> rot;  // per vertex: outgoing half-edges, ccw
  std::vector<Face> faces;
  std::vector<int> face_of;  // half-edge -> face id
  std::vector<int> boundary_faces;
  int f0 = -1;

  int hedge(int e, int dir) const { return 2 * e + dir; }
  int hedge_edge(int h) const { return h >> 1; }
  int hedge_tail(int h) const { return (h & 1) ? edges[h >> 1].b : edges[h >> 1].w; }
  int hedge_head(int h) const { return (h & 1) ? edges[h >> 1].w : edges[h >> 1].b; }
  Vec2 hedge_dvec(int h) const;  // unwrapped displacement tail -> head
  int left_face(int e) const { return face_of[2 * e]; }
  int right_face(int e) const { return face_of[2 * e + 1]; }

  int internal_count() const;
  std::vector<double> weights() const;
  bool is_internal(int v) const { return !verts[v].boundary; }

  void build();  // rotations, faces, f0; validates structure
  void check_connected() const;

  std::string to_json_text() const;
  static Graph from_json_text(const std::string& text);
  static Graph load(const std::string& path);
};

// Quotient of the biperiodic graph by (nZ)^2, drawn on the n x n torus.
// Homology cuts are fixed: the vertical cut between cell column n-1 and 0 and
// the horizontal one between row n-1 and 0; wrap counts on edges are signed
// crossings with those cuts.
Graph torus_quotient(const FundamentalDomain& fd, int n);

// Patch of the n-rescaled plane graph induced by vertices whose rescaled
// position lies in the closed region; edges leaving the retained set are cut
// at their midpoint, the outer half replaced by a valence-one boundary vertex.
Graph planar_patch(const FundamentalDomain& fd, int n, const std::vector<Vec2>& region);

// Aztec-diamond dimer graph of the given order (cells of the diamond as
// vertices); stub-free, so covers are exactly the perfect matchings.
Graph aztec_graph(int order);

// w x h block of the grid dimer graph (stub-free).
Graph grid_patch(int w, int h);

}  // namespace dimer
