#pragma once
#include <array>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "dimerlab/covers.hpp"
#include "dimerlab/gibbs.hpp"
#include "dimerlab/lattice.hpp"

namespace dimer {

// Edge signs making the product around every face of length 2k equal
// (-1)^(k+1): interior faces on a patch, all faces on the torus. Tree edges
// get +1, the rest is fixed leaves-first along a dual spanning tree.
std::vector<int> kasteleyn_signs(const Graph& g);

// Weighted number of covers matching every vertex, boundary tips included,
// via |det| of the signed white x black matrix. Returns 0 when the colors
// are unbalanced or no such cover exists. Large graphs go through a sparse
// LU; the log variant stays finite long after Z overflows a double.
double kasteleyn_count(const Graph& g, const WeightSystem& w);
double log_kasteleyn_count(const Graph& g, const WeightSystem& w);  // -inf when Z = 0

struct LaurentPolynomial2 {
  std::map<std::pair<int, int>, double> c;  // (i,j) -> coefficient of z^i w^j

  double at(int i, int j) const;
  std::complex<double> eval(std::complex<double> z, std::complex<double> w) const;
  LaurentPolynomial2 shifted(int di, int dj) const;  // z^di w^dj * this
  std::vector<IntPoint> support() const;
  std::vector<IntPoint> newton_hull() const;  // ccw convex hull of the support
};

// Determinant of the magnetically twisted fundamental-domain Kasteleyn
// matrix: edges crossing the torus cuts pick up powers of z and w. Exponents
// are shifted by the reference cover so the support equals
// newton_polygon(fd).slopes, and the gauge freedom (z -> -z, w -> -w,
// overall sign) is spent making hull corner coefficients positive wherever
// the parity class allows, the lexicographically first corner always.
// Weights default to the ones stored on the domain.
LaurentPolynomial2 characteristic_polynomial(const FundamentalDomain& fd);
LaurentPolynomial2 characteristic_polynomial(const FundamentalDomain& fd,
                                             const std::vector<double>& weights);

struct QuadValue {
  double value = 0;
  double error = 0;  // quadrature error estimate
};

// (2pi)^-2 double integral of log|P| over the unit torus. The inner angle is
// integrated exactly by Jensen's formula on the polynomial roots, the outer
// one by adaptive Gauss-Legendre. QuadratureFailure when the requested
// absolute error cannot be reached.
QuadValue free_energy(const LaurentPolynomial2& p, double target = 1e-6);

// Same integral over |z| = e^bx, |w| = e^by. ronkin(p, 0, 0) = free_energy(p).
QuadValue ronkin(const LaurentPolynomial2& p, double bx, double by, double target = 1e-6);

struct SigmaValue {
  double sigma = 0;
  bool frozen_limit = false;  // optimum pinned to the |B| <= 30 box
  Vec2 argmin;                // maximizing magnetic field
};

// Minus the Legendre transform of the Ronkin function:
// sigma(s,t) = inf_B [R(B) - s Bx - t By]. Concave on the Newton polygon.
// Interior slopes run BFGS with gradients read off the Jensen root counts;
// on the polygon boundary the transform collapses to the one-variable edge
// polynomial and is evaluated in closed form (hull corners in particular
// give the log-weight of the frozen cover). OutsidePolygon off the polygon.
SigmaValue surface_tension(const LaurentPolynomial2& p, double s, double t,
                           Vec2 warm_start = {0, 0});

// Piecewise-linear surface tension over a concentric-ring triangulation of
// the Newton polygon: ring k is the hull scaled by k/res about the centroid,
// with each hull edge split into k parts, so coarser tables are point
// subsets of finer ones. Corners take exact frozen values. Diagonals are
// flipped to the upper envelope of the lifted samples, so a reported hinge
// violation means the sampled values themselves break concavity; the values
// are never adjusted.
struct SurfaceTensionTable {
  std::vector<Vec2> pts;
  std::vector<double> sigma;
  std::vector<char> frozen;  // frozen-limit flag per point
  std::vector<std::array<int, 3>> tris;
  std::vector<Vec2> hull;  // Newton polygon, ccw
  Vec2 center;             // ring origin
  int res = 0;

  struct Hinge {
    int a = -1, b = -1;    // shared edge
    int apex = -1;         // vertex tested against the opposite plane
    double gap = 0;        // positive = concavity violation
  };
  std::vector<Hinge> violations;

  // PL interpolation; OutsidePolygon outside the hull.
  double interpolate(double s, double t) const;

 private:
  friend SurfaceTensionTable tabulate_sigma(const LaurentPolynomial2&, int);
  std::vector<int> cell_start;           // bucket grid over the hull box, CSR rows
  std::vector<int> cell_tris;
  int grid_n = 0;
  Vec2 bb_lo, bb_span;
  int locate(double s, double t) const;  // triangle id, -1 outside
};

SurfaceTensionTable tabulate_sigma(const LaurentPolynomial2& p, int res);

// Fixed-slope torus partition functions Z_{s,t}(G(n)), extracted from the
// twisted determinant of G(n) by a DFT over roots of unity; per-class signs
// are constant, so class magnitudes are exact sums of cover weights. Slopes
// are relative to the periodic lift of the fundamental-domain reference
// cover.
struct SlopePartition {
  int n = 0;
  std::map<std::pair<int, int>, double> z;  // slope -> Z_{s,t}(G(n))
  double total = 0;                         // Z(G(n))
  double log_total = 0;
};

SlopePartition torus_partition_by_slope(const FundamentalDomain& fd, int n);

}  // namespace dimer
