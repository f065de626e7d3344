#pragma once
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dimerlab/covers.hpp"
#include "dimerlab/geom.hpp"
#include "dimerlab/lattice.hpp"

namespace dimer {

// theta(x) = max over hull vertices p of <p,x>. Positively homogeneous,
// subadditive, and maximal among admissible fields vanishing at the origin.
struct SupportFunction {
  std::vector<Vec2> hull;  // counterclockwise, no repeated first vertex

  double operator()(Vec2 x) const;
  double lipschitz() const;              // max |p| over the hull
  bool contains(Vec2 p, double tol = 1e-9) const;
};

SupportFunction support_function(const NewtonPolygon& np);
SupportFunction support_function(std::vector<Vec2> pts);  // hull of pts

struct Tri {
  int a = 0, b = 0, c = 0;
};

// Piecewise-linear field on an equilateral mesh covering a polygon (plus one
// ring of margin). Point rows are ell*sqrt(3)/2 apart; odd rows shift ell/2.
struct AsymptoticHeightField {
  std::vector<Vec2> domain;   // ccw polygon
  double ell = 0;
  int nx = 0, ny = 0;         // mesh points per row / rows
  std::vector<Vec2> pts;      // nx*ny, row-major
  std::vector<double> value;
  std::vector<Tri> tris;
  std::vector<Vec2> grad;     // per triangle
  std::vector<char> active;   // triangle intersects the domain
  std::vector<char> flagged;  // active triangle whose gradient leaves the hull

  // PL interpolation; points outside the mesh evaluate on the nearest
  // triangle's plane.
  double operator()(Vec2 p) const;
  int locate(Vec2 p) const;  // triangle index

  int flagged_count() const;
  double max_abs_error(const std::function<double(Vec2)>& h) const;  // at active pts

  std::string to_csv() const;
  static AsymptoticHeightField from_csv(const std::string& text);
};

// Mesh + values sampled from h at every mesh point (h must evaluate on the
// one-cell margin ring around the domain). Gradients outside theta's hull on
// active triangles are flagged.
AsymptoticHeightField pl_approximation(const std::function<double(Vec2)>& h,
                                       const std::vector<Vec2>& omega, double ell,
                                       const SupportFunction& theta);

using BoundaryFn = std::function<double(Vec2)>;

// chi(x) - chi(y) <= theta(x-y) over sampled boundary pairs, both
// orientations.
bool extendable(const std::vector<Vec2>& omega, const BoundaryFn& chi,
                const SupportFunction& theta, int samples_per_edge = 96);

// h_max(x) = min over boundary y of chi(y) + theta(x-y), and the mirrored
// h_min(x) = max over boundary y of chi(y) - theta(x-y). Boundary sampling
// starts at four points per mesh cell and doubles until values move less
// than 1e-6. Throws NotExtendable when the Lipschitz criterion fails.
AsymptoticHeightField max_extension(const std::vector<Vec2>& omega, const BoundaryFn& chi,
                                    const SupportFunction& theta, double ell);
AsymptoticHeightField min_extension(const std::vector<Vec2>& omega, const BoundaryFn& chi,
                                    const SupportFunction& theta, double ell);

// ---- graph side ----

// Lexicographically first cover, equal to enumerate_covers(g).front() but
// computed by greedy edge selection with augmenting-path repair, so it works
// on patches far too large to enumerate.
Cover reference_cover(const Graph& g);

// Reference cover induced by the lift of G(1)'s first cover to a patch of
// fd at scale g.scale, repaired near the boundary. Unlike the plain
// lexicographic cover its slope gauge matches the torus reference, which is
// what the scaled support comparisons assume.
Cover periodic_reference(const FundamentalDomain& fd, const Graph& g);

// theta_hat(x,y) = max over covers D of h_{D,ref}(x) - h_{D,ref}(y), exact
// via 0-1 shortest paths on the dual. Row form returns theta_hat(., y);
// reversed = true returns theta_hat(y, .) instead.
std::vector<int> support_height_row(const Graph& g, const Cover& ref, int y,
                                    bool reversed = false);
int support_height_function(const Graph& g, int x, int y);
int support_height_function(const Graph& g, const Cover& ref, int x, int y);

// Nearest non-outer face to p in sample/scale coordinates.
int face_at(const Graph& g, Vec2 p);

// theta_hat(face at x, face at y) / n on a patch of fd at scale n covering
// the segment with margin, using the periodic reference.
double normalized_support(const FundamentalDomain& fd, int n, Vec2 x, Vec2 y);

// Extensions of boundary data chi (face id -> value, relative to ref, same
// normalization as boundary_heights): hmax[x] = min over boundary faces y of
// chi(y) + theta_hat(x,y), hmin mirrored. Throws NotExtendable naming the
// violating face pair. chi must cover every boundary face.
struct GraphExtension {
  HeightFunction hmax, hmin;  // relative heights, denom 1
  Cover ref;
};
GraphExtension graph_extensions(const Graph& g, const std::map<int, int>& chi, const Cover& ref);
HeightFunction graph_max_extension(const Graph& g, const std::map<int, int>& chi);
HeightFunction graph_min_extension(const Graph& g, const std::map<int, int>& chi);

// Rebuild the cover whose height relative to ref is h (values on faces).
// Throws when some jump falls outside {0,1} occupation or the degree
// constraints fail, i.e. when h is not a realized height function.
Cover cover_from_heights(const Graph& g, const Cover& ref, const std::vector<int>& h);

struct DiscretizedField {
  Graph patch;
  Cover ref;             // periodic reference
  HeightFunction eta;    // integer heights per face, relative to ref
  double sup_err = 0;    // max |h - eta/n| over in-domain faces
  double constant = 0;   // n * sup_err
  int clamped = 0;       // faces moved by the extension clamp
  int max_clamp = 0;     // deepest clamp, height units
  double collar = 0;     // boundary collar width for the clamp path
};

// eta_hat(x) = min over in-domain faces y of round(n h(y)) + theta_hat(x,y),
// clamped between the graph extensions of chi_n when boundary data is given.
// The patch is built over omega at scale n with the periodic reference.
DiscretizedField discretize(const std::function<double(Vec2)>& h, const std::vector<Vec2>& omega,
                            const FundamentalDomain& fd, int n,
                            const std::map<int, int>* chi_n = nullptr);
DiscretizedField discretize(const AsymptoticHeightField& h, const FundamentalDomain& fd, int n);

}  // namespace dimer
