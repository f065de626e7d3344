#include "dimerlab/kasteleyn.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

namespace dimer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<int> kasteleyn_signs(const Graph& g) {
  int V = (int)g.verts.size(), E = (int)g.edges.size();
  std::vector<int> sign(E, 1);
  if (E == 0) return sign;

  std::vector<std::vector<std::pair<int, int>>> adj(V);
  for (int e = 0; e < E; ++e) {
    adj[g.edges[e].w].push_back({g.edges[e].b, e});
    adj[g.edges[e].b].push_back({g.edges[e].w, e});
  }
  std::vector<char> in_tree(E, 0), seen(V, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (auto [u, e] : adj[v])
      if (!seen[u]) {
        seen[u] = 1;
        in_tree[e] = 1;
        stack.push_back(u);
      }
  }

  // Dual spanning tree over the non-tree edges. On a patch the faces without
  // a parity condition (outer face, boundary cells) collapse into one node.
  int F = (int)g.faces.size();
  const int OUT = F;
  auto node = [&](int f) {
    if (g.torus) return f;
    return (g.faces[f].outer || g.faces[f].boundary_cell) ? OUT : f;
  };
  std::vector<std::vector<std::pair<int, int>>> dadj(F + 1);
  for (int e = 0; e < E; ++e) {
    if (in_tree[e]) continue;
    int a = node(g.face_of[2 * e]), b = node(g.face_of[2 * e + 1]);
    dadj[a].push_back({b, e});
    dadj[b].push_back({a, e});
  }
  int root = g.torus ? 0 : OUT;
  std::vector<int> parent_edge(F + 1, -1), order;
  std::vector<char> dseen(F + 1, 0);
  dseen[root] = 1;
  std::vector<int> queue{root};
  for (size_t qi = 0; qi < queue.size(); ++qi)
    for (auto [nf, e] : dadj[queue[qi]])
      if (!dseen[nf]) {
        dseen[nf] = 1;
        parent_edge[nf] = e;
        order.push_back(nf);
        queue.push_back(nf);
      }

  auto needs = [&](int f) { return g.torus || node(f) != OUT; };
  for (int f = 0; f < F; ++f)
    if (needs(f) && f != root && !dseen[f])
      throw Error(Err::Internal, "sign gauge: dual tree does not reach every face");

  auto face_product = [&](int f) {
    int p = 1;
    for (int h : g.faces[f].walk) p *= sign[h >> 1];
    return p;
  };
  auto required = [&](int f) {
    int k = (int)g.faces[f].walk.size() / 2;
    return k % 2 == 0 ? -1 : 1;
  };
  // Leaves first: when a face is fixed, every boundary edge except its dual
  // parent already has its final sign. The torus root face is forced by the
  // others through the global parity count.
  for (int i = (int)order.size() - 1; i >= 0; --i) {
    int f = order[i];
    if (f == OUT || !needs(f)) continue;
    if (face_product(f) != required(f)) sign[parent_edge[f]] = -sign[parent_edge[f]];
  }
  for (int f = 0; f < F; ++f)
    if (needs(f) && face_product(f) != required(f))
      throw Error(Err::Internal, "sign gauge: face parity not satisfiable");
  return sign;
}

namespace {

struct ColorIndex {
  std::vector<int> whites, blacks;
  std::vector<int> idx;  // vertex -> row (white) or column (black)
};

ColorIndex color_index(const Graph& g) {
  ColorIndex ci;
  ci.idx.assign(g.verts.size(), -1);
  for (int v = 0; v < (int)g.verts.size(); ++v)
    if (g.verts[v].white) {
      ci.idx[v] = (int)ci.whites.size();
      ci.whites.push_back(v);
    } else {
      ci.idx[v] = (int)ci.blacks.size();
      ci.blacks.push_back(v);
    }
  return ci;
}

}  // namespace

double log_kasteleyn_count(const Graph& g, const WeightSystem& w) {
  w.validate(g);
  if (g.torus) throw Error(Err::MalformedInput, "determinant counting needs a planar patch");
  ColorIndex ci = color_index(g);
  if (ci.whites.size() != ci.blacks.size()) return -kInf;
  int m = (int)ci.whites.size();
  if (m == 0) return 0.0;
  std::vector<int> sign = kasteleyn_signs(g);

  if (m <= 200) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
    for (int e = 0; e < (int)g.edges.size(); ++e)
      k(ci.idx[g.edges[e].w], ci.idx[g.edges[e].b]) += sign[e] * w.w[e];
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);
    double s = 0;
    for (int i = 0; i < m; ++i) {
      double d = std::abs(lu.matrixLU()(i, i));
      if (d == 0 || !std::isfinite(d)) return -kInf;
      s += std::log(d);
    }
    return s;
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.edges.size());
  for (int e = 0; e < (int)g.edges.size(); ++e)
    trip.emplace_back(ci.idx[g.edges[e].w], ci.idx[g.edges[e].b], sign[e] * w.w[e]);
  Eigen::SparseMatrix<double> k(m, m);
  k.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(k);
  lu.factorize(k);
  if (lu.info() != Eigen::Success) return -kInf;  // zero pivot: no perfect cover
  return lu.logAbsDeterminant();
}

double kasteleyn_count(const Graph& g, const WeightSystem& w) {
  return std::exp(log_kasteleyn_count(g, w));
}

double LaurentPolynomial2::at(int i, int j) const {
  auto it = c.find({i, j});
  return it == c.end() ? 0.0 : it->second;
}

std::complex<double> LaurentPolynomial2::eval(std::complex<double> z,
                                              std::complex<double> w) const {
  std::complex<double> s = 0;
  for (auto& [ij, v] : c) s += v * std::pow(z, ij.first) * std::pow(w, ij.second);
  return s;
}

LaurentPolynomial2 LaurentPolynomial2::shifted(int di, int dj) const {
  LaurentPolynomial2 r;
  for (auto& [ij, v] : c) r.c[{ij.first + di, ij.second + dj}] = v;
  return r;
}

std::vector<IntPoint> LaurentPolynomial2::support() const {
  std::vector<IntPoint> s;
  for (auto& [ij, v] : c) s.push_back({ij.first, ij.second});
  return s;
}

std::vector<IntPoint> LaurentPolynomial2::newton_hull() const {
  return convex_hull(support());
}

namespace {

using LP = LaurentPolynomial2;

// Determinant of a matrix of Laurent polynomials by row expansion, memoized
// on the set of unused columns.
struct LaurentDet {
  int m = 0;
  std::vector<std::vector<LP>> k;
  std::unordered_map<uint32_t, LP> memo;

  LP det(uint32_t mask) {
    if (mask == 0) {
      LP one;
      one.c[{0, 0}] = 1.0;
      return one;
    }
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    int row = m - __builtin_popcount(mask);
    LP acc;
    int pos = 0;
    for (int j = 0; j < m; ++j) {
      if (!(mask & (1u << j))) continue;
      if (!k[row][j].c.empty()) {
        LP sub = det(mask & ~(1u << j));
        double sgn = pos % 2 == 0 ? 1.0 : -1.0;
        for (auto& [ka, va] : k[row][j].c)
          for (auto& [kb, vb] : sub.c)
            acc.c[{ka.first + kb.first, ka.second + kb.second}] += sgn * va * vb;
      }
      pos++;
    }
    memo[mask] = acc;
    return acc;
  }
};

}  // namespace

LaurentPolynomial2 characteristic_polynomial(const FundamentalDomain& fd,
                                             const std::vector<double>& weights) {
  if (weights.size() != fd.edges.size())
    throw Error(Err::MalformedInput, "weight count does not match the fundamental domain");
  FundamentalDomain copy = fd;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0)) throw Error(Err::MalformedInput, "weights must be positive");
    copy.edges[i].weight = weights[i];
  }
  return characteristic_polynomial(copy);
}

LaurentPolynomial2 characteristic_polynomial(const FundamentalDomain& fd) {
  Graph g = torus_quotient(fd, 1);
  ColorIndex ci = color_index(g);
  if (ci.whites.size() != ci.blacks.size())
    throw Error(Err::NoCover, "fundamental domain has unbalanced colors");
  int m = (int)ci.whites.size();
  if (m > 16) throw Error(Err::TooLarge, "fundamental domain too large for a symbolic determinant");
  std::vector<Cover> covers = enumerate_covers(g);
  if (covers.empty()) throw Error(Err::NoCover, "fundamental domain admits no cover");
  const Cover& ref = covers.front();

  std::vector<int> sign = kasteleyn_signs(g);
  LaurentDet ld;
  ld.m = m;
  ld.k.assign(m, std::vector<LP>(m));
  for (int e = 0; e < (int)g.edges.size(); ++e) {
    const GEdge& ed = g.edges[e];
    ld.k[ci.idx[ed.w]][ci.idx[ed.b]].c[{ed.wrap_x, ed.wrap_y}] += sign[e] * ed.weight;
  }
  LP p = ld.det((1u << m) - 1);  // m <= 16 checked above

  IntPoint shift;
  for (int e : ref) {
    shift.x += g.edges[e].wrap_x;
    shift.y += g.edges[e].wrap_y;
  }
  p = p.shifted((int)-shift.x, (int)-shift.y);

  double cmax = 0;
  for (auto& [ij, v] : p.c) cmax = std::max(cmax, std::abs(v));
  for (auto it = p.c.begin(); it != p.c.end();)
    it = std::abs(it->second) < 1e-12 * cmax ? p.c.erase(it) : std::next(it);

  // Every surviving monomial must be a cover slope and vice versa; per-slope
  // sign constancy of the gauge makes the match exact.
  std::set<std::pair<int, int>> slopes;
  for (const Cover& d : covers) slopes.insert(slope(g, d, ref));
  std::set<std::pair<int, int>> supp;
  for (auto& [ij, v] : p.c) supp.insert(ij);
  if (slopes != supp)
    throw Error(Err::Internal, "characteristic polynomial support disagrees with cover slopes");

  // Spend the gauge freedom: flip z -> -z, w -> -w and the overall sign so
  // that as many hull corners as possible carry positive coefficients, the
  // first corner always.
  std::vector<IntPoint> hull = p.newton_hull();
  int first = 0;
  for (int i = 1; i < (int)hull.size(); ++i)
    if (hull[i] < hull[first]) first = i;
  int best_score = -1, ba = 0, bb = 0, bs = 1;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int s : {1, -1}) {
        int score = 0;
        bool first_pos = false;
        for (int i = 0; i < (int)hull.size(); ++i) {
          long long par = a * hull[i].x + b * hull[i].y;
          double v = s * (par % 2 ? -1.0 : 1.0) * p.at((int)hull[i].x, (int)hull[i].y);
          if (v > 0) {
            score++;
            if (i == first) first_pos = true;
          }
        }
        if (first_pos && score > best_score) {
          best_score = score;
          ba = a;
          bb = b;
          bs = s;
        }
      }
  LP out;
  for (auto& [ij, v] : p.c) {
    long long par = (long long)ba * ij.first + (long long)bb * ij.second;
    out.c[ij] = bs * (par % 2 ? -1.0 : 1.0) * v;
  }
  return out;
}

namespace {

// P with the coefficients flattened for fast per-angle evaluation.
struct FlatPoly {
  std::vector<int> pi, pj;
  std::vector<double> pc;
  int ilo = 0, ihi = 0, jlo = 0, jhi = 0;
};

FlatPoly flatten(const LP& p) {
  if (p.c.empty()) throw Error(Err::MalformedInput, "empty polynomial");
  FlatPoly f;
  f.ilo = f.jlo = INT32_MAX;
  f.ihi = f.jhi = INT32_MIN;
  for (auto& [ij, v] : p.c) {
    f.pi.push_back(ij.first);
    f.pj.push_back(ij.second);
    f.pc.push_back(v);
    f.ilo = std::min(f.ilo, ij.first);
    f.ihi = std::max(f.ihi, ij.first);
    f.jlo = std::min(f.jlo, ij.second);
    f.jhi = std::max(f.jhi, ij.second);
  }
  return f;
}

// Log magnitudes of the roots of sum_j a_j w^j, smallest degree first;
// near-zero leading and trailing coefficients are deflated.
void root_logs(const std::vector<std::complex<double>>& a, int& bot, int& top,
               std::vector<double>& logs) {
  top = (int)a.size() - 1;
  bot = 0;
  logs.clear();
  double amax = 0;
  for (auto& v : a) amax = std::max(amax, std::abs(v));
  if (amax == 0) return;
  while (top > 0 && std::abs(a[top]) < 1e-13 * amax) top--;
  while (bot < top && std::abs(a[bot]) < 1e-13 * amax) bot++;
  int d = top - bot;
  if (d == 0) return;
  if (d == 1) {
    logs.push_back(std::log(std::abs(-a[bot] / a[top])));
    return;
  }
  if (d == 2) {
    std::complex<double> A = a[top], B = a[bot + 1], C = a[bot];
    std::complex<double> sq = std::sqrt(B * B - 4.0 * A * C);
    std::complex<double> q = std::abs(B - sq) > std::abs(B + sq) ? (B - sq) : (B + sq);
    std::complex<double> r1 = -q / (2.0 * A);  // larger root
    std::complex<double> r2 = C / (A * r1);    // product identity
    logs.push_back(std::log(std::abs(r1)));
    logs.push_back(std::log(std::abs(r2)));
    return;
  }
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -a[bot + i] / a[top];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  for (int i = 0; i < d; ++i) logs.push_back(std::log(std::abs(es.eigenvalues()[i])));
}

struct RingMean {
  double val = 0;  // (2pi)^-1 int log|Q| d phi by Jensen's formula
  double cnt = 0;  // its derivative in by: trailing exponent + roots inside
};

RingMean ring_mean(const FlatPoly& f, double bx, double theta, double by,
                   std::vector<std::complex<double>>& scratch) {
  std::complex<double> z = std::exp(std::complex<double>(bx, theta));
  int ni = f.ihi - f.ilo + 1, nj = f.jhi - f.jlo + 1;
  static thread_local std::vector<std::complex<double>> zp;
  static thread_local std::vector<double> logs;
  zp.assign(ni, 1.0);
  zp[0] = std::pow(z, f.ilo);
  for (int i = 1; i < ni; ++i) zp[i] = zp[i - 1] * z;
  scratch.assign(nj, 0.0);
  for (size_t k = 0; k < f.pc.size(); ++k)
    scratch[f.pj[k] - f.jlo] += f.pc[k] * zp[f.pi[k] - f.ilo];
  int bot, top;
  root_logs(scratch, bot, top, logs);
  double amax = 0;
  for (auto& v : scratch) amax = std::max(amax, std::abs(v));
  if (amax == 0) return {-750.0, 0.0};  // Q vanishes on the circle, integrable spike
  RingMean r{std::log(std::abs(scratch[top])) + (f.jlo + bot) * by, (double)(f.jlo + bot)};
  for (double L : logs) {
    r.val += std::max(by, L);
    if (L < by) r.cnt += 1;
  }
  return r;
}

constexpr double kG7x[4] = {0.0, 0.4058451513773972, 0.7415311855993945, 0.9491079123427585};
constexpr double kG7w[4] = {0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
                            0.1294849661688697};
constexpr double kG15x[8] = {0.0,
                             0.2011940939974345,
                             0.3941513470775634,
                             0.5709721726085388,
                             0.7244177313601701,
                             0.8482065834104272,
                             0.9372733924007060,
                             0.9879925180204854};
constexpr double kG15w[8] = {0.2025782419255613, 0.1984314853271116, 0.1861610000155622,
                             0.1662692058169939, 0.1395706779261543, 0.1071592204671719,
                             0.0703660474881081, 0.0307532419961173};

struct Segment {
  double a = 0, b = 0, val = 0, cnt = 0, err = 0;
};

struct MeanResult {
  double val = 0, err = 0;
  double cnt = 0, cnt_err = 0;
};

// Adaptive Gauss-Legendre with a 7/15 pair, refining the worst segment.
// Integrates the value and its derivative channel together; cnt_w sets how
// much the derivative channel drives refinement.
MeanResult adaptive_core(const std::function<RingMean(double)>& f, double lo, double hi,
                         double target, double cnt_w) {
  auto eval = [&](double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    RingMean mid = f(c);
    double i7 = kG7w[0] * mid.val * h, c7 = kG7w[0] * mid.cnt * h;
    double i15 = kG15w[0] * mid.val * h, c15 = kG15w[0] * mid.cnt * h;
    for (int k = 1; k < 4; ++k) {
      RingMean u = f(c - h * kG7x[k]), v = f(c + h * kG7x[k]);
      i7 += kG7w[k] * (u.val + v.val) * h;
      c7 += kG7w[k] * (u.cnt + v.cnt) * h;
    }
    for (int k = 1; k < 8; ++k) {
      RingMean u = f(c - h * kG15x[k]), v = f(c + h * kG15x[k]);
      i15 += kG15w[k] * (u.val + v.val) * h;
      c15 += kG15w[k] * (u.cnt + v.cnt) * h;
    }
    Segment s{a, b, i15, c15, std::abs(i15 - i7) + cnt_w * std::abs(c15 - c7)};
    return s;
  };
  auto cmp = [](const Segment& x, const Segment& y) { return x.err < y.err; };
  std::priority_queue<Segment, std::vector<Segment>, decltype(cmp)> pq(cmp);
  int n0 = 8;
  double span = hi - lo;
  double total = 0, ctotal = 0, errsum = 0;
  for (int i = 0; i < n0; ++i) {
    Segment s = eval(lo + span * i / n0, lo + span * (i + 1) / n0);
    total += s.val;
    ctotal += s.cnt;
    errsum += s.err;
    pq.push(s);
  }
  int evals = n0;
  while (errsum > 0.5 * target * span && evals < 12000) {
    Segment s = pq.top();
    pq.pop();
    if (s.err < 1e-18 * std::max(1.0, std::abs(total)) || s.b - s.a < 1e-13) {
      // refining this segment cannot help; put it back and stop
      pq.push(s);
      break;
    }
    total -= s.val;
    ctotal -= s.cnt;
    errsum -= s.err;
    Segment s1 = eval(s.a, 0.5 * (s.a + s.b)), s2 = eval(0.5 * (s.a + s.b), s.b);
    total += s1.val + s2.val;
    ctotal += s1.cnt + s2.cnt;
    errsum += s1.err + s2.err;
    pq.push(s1);
    pq.push(s2);
    evals += 2;
  }
  return {total / span, errsum / span, ctotal / span, 0};
}

}  // namespace

QuadValue ronkin(const LaurentPolynomial2& p, double bx, double by, double target) {
  if (!(target > 0)) throw Error(Err::MalformedInput, "quadrature target must be positive");
  FlatPoly f = flatten(p);
  std::vector<std::complex<double>> scratch;
  // real coefficients: the integrand is even in theta, one half circle is enough
  MeanResult r = adaptive_core([&](double th) { return ring_mean(f, bx, th, by, scratch); },
                               0.0, M_PI, target, 0.0);
  if (r.err > target)
    throw Error(Err::QuadratureFailure, "quadrature error " + std::to_string(r.err) +
                                            " exceeds target " + std::to_string(target));
  return {r.val, r.err};
}

QuadValue free_energy(const LaurentPolynomial2& p, double target) {
  return ronkin(p, 0.0, 0.0, target);
}

namespace {

std::vector<Vec2> hull_points(const LP& p) {
  std::vector<IntPoint> h = p.newton_hull();
  std::vector<Vec2> out;
  for (auto& q : h) out.push_back({(double)q.x, (double)q.y});
  return out;
}

constexpr double kCap = 30.0;

double clampd(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

namespace {

// On a hull edge the minimizing field runs to infinity along the outward
// normal and only the edge monomials survive. The reduced one-variable
// Ronkin function is piecewise linear in b with kinks at the root logs, so
// the transform is an exact minimum over kinks.
SigmaValue boundary_sigma(const LP& p, const std::vector<Vec2>& hull, Vec2 center, double s,
                          double t) {
  int ne = (int)hull.size();
  for (int i = 0; i < ne; ++i) {
    Vec2 a = hull[i], b = hull[(i + 1) % ne];
    if (!on_segment(a, b, {s, t}, 1e-9)) continue;
    long long wx = std::llround(b.x - a.x), wy = std::llround(b.y - a.y);
    long long g = std::gcd(std::abs(wx), std::abs(wy));
    double tx = (double)wx / g, ty = (double)wy / g;
    double lam = ((s - a.x) * tx + (t - a.y) * ty) / (tx * tx + ty * ty);
    std::vector<std::complex<double>> coef(g + 1);
    for (long long k = 0; k <= g; ++k)
      coef[k] = p.at((int)std::llround(a.x + k * tx), (int)std::llround(a.y + k * ty));
    int bot, top;
    std::vector<double> logs;
    root_logs(coef, bot, top, logs);
    double best = kInf;
    double ctop = std::log(std::abs(coef[top]));
    std::vector<double> kinks = logs;
    if (kinks.empty()) kinks.push_back(0);
    for (double b0 : kinks) {
      double v = ctop + (bot - lam) * b0;
      for (double L : logs) v += std::max(b0, L);
      best = std::min(best, v);
    }
    SigmaValue out;
    out.sigma = best;
    out.frozen_limit = true;
    Vec2 n = {(b - a).y, -(b - a).x};
    if (n.dot(Vec2{s, t} - center) < 0) n = n * -1.0;
    out.argmin = n * (kCap / std::max(n.norm(), 1e-12));
    return out;
  }
  throw Error(Err::Internal, "boundary point not on any hull edge");
}

struct PhiGrad {
  double f = 0, gx = 0, gy = 0;
};

}  // namespace

SigmaValue surface_tension(const LaurentPolynomial2& p, double s, double t, Vec2 warm) {
  std::vector<Vec2> hull = hull_points(p);
  if (hull.size() < 3)
    throw Error(Err::MalformedInput, "Newton polygon has empty interior");
  int side = point_in_polygon(hull, {s, t});
  if (side == 0) throw Error(Err::OutsidePolygon, "slope outside the Newton polygon");
  if (side == 2) return boundary_sigma(p, hull, polygon_centroid(hull), s, t);

  FlatPoly f = flatten(p);
  LaurentPolynomial2 ptr;
  for (auto& [ij, v] : p.c) ptr.c[{ij.second, ij.first}] = v;
  FlatPoly ft = flatten(ptr);
  std::vector<std::complex<double>> scratch;
  // One pass gives the value and dR/dby; the transposed pass (outer angle on
  // the other variable) gives dR/dbx through the same root-counting channel.
  auto val_pass = [&](double bx, double by) {
    MeanResult a = adaptive_core([&](double th) { return ring_mean(f, bx, th, by, scratch); },
                                 0.0, M_PI, 1e-10, 0.02);
    return PhiGrad{a.val - s * bx - t * by, 0, a.cnt - t};
  };
  auto grad_x = [&](double bx, double by) {
    MeanResult a = adaptive_core([&](double th) { return ring_mean(ft, by, th, bx, scratch); },
                                 0.0, M_PI, 1e-10, 0.02);
    return a.cnt - s;
  };

  double bx = clampd(warm.x, -kCap, kCap), by = clampd(warm.y, -kCap, kCap);
  PhiGrad cur = val_pass(bx, by);
  cur.gx = grad_x(bx, by);
  // inverse Hessian estimate, reset to the identity whenever curvature fails
  double h11 = 1, h12 = 0, h22 = 1;
  for (int iter = 0; iter < 80; ++iter) {
    double px = cur.gx, py = cur.gy;
    if ((bx >= kCap - 1e-9 && px < 0) || (bx <= -kCap + 1e-9 && px > 0)) px = 0;
    if ((by >= kCap - 1e-9 && py < 0) || (by <= -kCap + 1e-9 && py > 0)) py = 0;
    if (std::hypot(px, py) < 2e-6) break;
    double dx = -(h11 * cur.gx + h12 * cur.gy);
    double dy = -(h12 * cur.gx + h22 * cur.gy);
    if (dx * cur.gx + dy * cur.gy > -1e-14) {
      h11 = h22 = 1;
      h12 = 0;
      dx = -px;
      dy = -py;
    }
    double lam = 1.0;
    bool moved = false;
    double nx = bx, ny = by;
    PhiGrad nxt;
    for (int ls = 0; ls < 40; ++ls, lam *= 0.5) {
      nx = clampd(bx + lam * dx, -kCap, kCap);
      ny = clampd(by + lam * dy, -kCap, kCap);
      if (nx == bx && ny == by) continue;
      nxt = val_pass(nx, ny);
      double pred = 1e-4 * (cur.gx * (nx - bx) + cur.gy * (ny - by));
      if (nxt.f <= cur.f + std::min(pred, 0.0) + 1e-14) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    nxt.gx = grad_x(nx, ny);
    double sx = nx - bx, sy = ny - by;
    double yx = nxt.gx - cur.gx, yy = nxt.gy - cur.gy;
    double sy_dot = sx * yx + sy * yy;
    if (sy_dot > 1e-12 * std::hypot(sx, sy) * std::hypot(yx, yy)) {
      // BFGS update of the inverse Hessian
      double rho = 1.0 / sy_dot;
      double a11 = 1 - rho * sx * yx, a12 = -rho * sx * yy;
      double a21 = -rho * sy * yx, a22 = 1 - rho * sy * yy;
      double t11 = a11 * h11 + a12 * h12, t12 = a11 * h12 + a12 * h22;
      double t21 = a21 * h11 + a22 * h12, t22 = a21 * h12 + a22 * h22;
      double n11 = t11 * a11 + t12 * a12, n12 = t11 * a21 + t12 * a22;
      double n22 = t21 * a21 + t22 * a22;
      h11 = n11 + rho * sx * sx;
      h12 = n12 + rho * sx * sy;
      h22 = n22 + rho * sy * sy;
    } else {
      h11 = h22 = 1;
      h12 = 0;
    }
    bx = nx;
    by = ny;
    cur = nxt;
  }
  SigmaValue out;
  out.sigma = cur.f;
  out.argmin = {bx, by};
  out.frozen_limit = std::abs(bx) >= kCap - 1e-6 || std::abs(by) >= kCap - 1e-6;
  return out;
}

namespace {

// ring r point layout: for each hull edge i, fractions j/r, j = 0..r-1
int ring_size(int ne, int r) { return r == 0 ? 1 : ne * r; }

int ring_offset(int ne, int r) {
  // points before ring r: center plus full rings 1..r-1
  return r == 0 ? 0 : 1 + ne * (r - 1) * r / 2;
}

Vec2 ring_point(const std::vector<Vec2>& hull, Vec2 center, int res, int r, double u) {
  int ne = (int)hull.size();
  int i = (int)u % ne;
  double frac = u - std::floor(u);
  Vec2 b = hull[i] + (hull[(i + 1) % ne] - hull[i]) * frac;
  return center + (b - center) * ((double)r / res);
}

double tri_area2(Vec2 a, Vec2 b, Vec2 c) { return (b - a).cross(c - a); }

}  // namespace

SurfaceTensionTable tabulate_sigma(const LaurentPolynomial2& p, int res) {
  if (res < 8) throw Error(Err::MalformedInput, "table resolution must be >= 8");
  SurfaceTensionTable tab;
  tab.hull = hull_points(p);
  if (tab.hull.size() < 3)
    throw Error(Err::MalformedInput, "Newton polygon has empty interior");
  tab.center = polygon_centroid(tab.hull);
  tab.res = res;
  int ne = (int)tab.hull.size();

  tab.pts.push_back(tab.center);
  std::vector<double> params{0};
  for (int r = 1; r <= res; ++r)
    for (int i = 0; i < ne; ++i)
      for (int j = 0; j < r; ++j) {
        double u = i + (double)j / r;
        tab.pts.push_back(ring_point(tab.hull, tab.center, res, r, u));
        params.push_back(u);
      }

  // evaluate: center out, warm-starting each ring from the one inside it
  int np = (int)tab.pts.size();
  tab.sigma.assign(np, 0.0);
  tab.frozen.assign(np, 0);
  std::vector<Vec2> argmin(np);
  SigmaValue sv = surface_tension(p, tab.center.x, tab.center.y);
  tab.sigma[0] = sv.sigma;
  tab.frozen[0] = sv.frozen_limit;
  argmin[0] = sv.argmin;
  for (int r = 1; r <= res; ++r) {
    int off = ring_offset(ne, r), n = ring_size(ne, r);
    int poff = ring_offset(ne, r - 1), pn = ring_size(ne, r - 1);
    for (int k = 0; k < n; ++k) {
      int id = off + k;
      Vec2 pt = tab.pts[id];
      int near = r == 1 ? 0 : poff + (int)std::lround(params[id] / ne * pn) % pn;
      SigmaValue v = surface_tension(p, pt.x, pt.y, argmin[near]);
      tab.sigma[id] = v.sigma;
      tab.frozen[id] = v.frozen_limit;
      argmin[id] = v.argmin;
    }
  }

  // triangle strips between consecutive rings, zipped by boundary parameter
  for (int r = 1; r <= res; ++r) {
    int oi = ring_offset(ne, r), ni = ring_offset(ne, r - 1);
    int no = ring_size(ne, r), nn = ring_size(ne, r - 1);
    if (r == 1) {
      for (int k = 0; k < no; ++k) tab.tris.push_back({0, oi + k, oi + (k + 1) % no});
      continue;
    }
    int ki = 0, ko = 0;
    auto iparam = [&](int k) { return params[ni + k % nn] + (k / nn) * ne; };
    auto oparam = [&](int k) { return params[oi + k % no] + (k / no) * ne; };
    while (ki < nn || ko < no) {
      bool take_outer = ko < no && (ki == nn || oparam(ko + 1) <= iparam(ki + 1));
      if (take_outer) {
        tab.tris.push_back({ni + ki % nn, oi + ko % no, oi + (ko + 1) % no});
        ko++;
      } else {
        tab.tris.push_back({ni + ki % nn, oi + ko % no, ni + (ki + 1) % nn});
        ki++;
      }
    }
  }
  for (auto& tr : tab.tris)
    if (tri_area2(tab.pts[tr[0]], tab.pts[tr[1]], tab.pts[tr[2]]) < 0) std::swap(tr[1], tr[2]);

  // Flip diagonals toward the upper envelope of the lifted samples. Each flip
  // raises the interpolant, so the loop terminates; what remains is the
  // regular triangulation of the data, and any hinge still folding upward is
  // a genuine concavity violation of the values.
  auto ekey = [](int a, int b) {
    return ((uint64_t)std::min(a, b) << 32) | (uint32_t)std::max(a, b);
  };
  std::unordered_map<uint64_t, std::array<int, 2>> e2t;
  auto link = [&](int ti) {
    for (int k = 0; k < 3; ++k) {
      auto& s = e2t.try_emplace(ekey(tab.tris[ti][k], tab.tris[ti][(k + 1) % 3]),
                                std::array<int, 2>{-1, -1})
                    .first->second;
      (s[0] < 0 ? s[0] : s[1]) = ti;
    }
  };
  auto unlink = [&](int ti) {
    for (int k = 0; k < 3; ++k) {
      auto& s = e2t.at(ekey(tab.tris[ti][k], tab.tris[ti][(k + 1) % 3]));
      (s[0] == ti ? s[0] : s[1]) = -1;
    }
  };
  for (int ti = 0; ti < (int)tab.tris.size(); ++ti) link(ti);

  auto other_vertex = [&](int ti, int a, int b) {
    for (int v : tab.tris[ti])
      if (v != a && v != b) return v;
    return -1;
  };
  std::vector<uint64_t> queue;
  for (auto& [kk, s] : e2t) queue.push_back(kk);
  size_t flips = 0, flip_cap = 60 * tab.tris.size();
  while (!queue.empty() && flips < flip_cap) {
    uint64_t kk = queue.back();
    queue.pop_back();
    auto it = e2t.find(kk);
    if (it == e2t.end() || it->second[0] < 0 || it->second[1] < 0) continue;
    int a = (int)(kk >> 32), b = (int)(kk & 0xffffffffu);
    int t0 = it->second[0], t1 = it->second[1];
    int c0 = other_vertex(t0, a, b), c1 = other_vertex(t1, a, b);
    std::optional<double> hit =
        segment_crossing(tab.pts[c0], tab.pts[c1], tab.pts[a], tab.pts[b]);
    if (!hit) continue;  // reflex quad, not flippable
    Vec2 x = tab.pts[c0] + (tab.pts[c1] - tab.pts[c0]) * *hit;
    double vnew = tab.sigma[c0] + (tab.sigma[c1] - tab.sigma[c0]) * *hit;
    double s2 = (x - tab.pts[a]).norm() / std::max((tab.pts[b] - tab.pts[a]).norm(), 1e-300);
    double vold = tab.sigma[a] + (tab.sigma[b] - tab.sigma[a]) * s2;
    if (vnew <= vold + 1e-12 * std::max(1.0, std::abs(vold))) continue;
    unlink(t0);
    unlink(t1);
    tab.tris[t0] = {c0, b, c1};
    tab.tris[t1] = {c0, c1, a};
    for (int ti : {t0, t1}) {
      auto& tr = tab.tris[ti];
      if (tri_area2(tab.pts[tr[0]], tab.pts[tr[1]], tab.pts[tr[2]]) < 0)
        std::swap(tr[1], tr[2]);
      link(ti);
    }
    flips++;
    for (int v : {a, b})
      for (int c : {c0, c1}) queue.push_back(ekey(v, c));
  }

  // hinge concavity across every interior edge, reported only
  for (auto& [kk, s] : e2t) {
    if (s[0] < 0 || s[1] < 0) continue;
    int ea = (int)(kk >> 32), eb = (int)(kk & 0xffffffffu);
    Vec2 a = tab.pts[ea], b = tab.pts[eb];
    for (int side = 0; side < 2; ++side) {
      int apex0 = other_vertex(s[side], ea, eb), apex1 = other_vertex(s[1 - side], ea, eb);
      Vec2 c = tab.pts[apex0];
      double den = tri_area2(a, b, c);
      if (std::abs(den) < 1e-14) continue;
      Vec2 q = tab.pts[apex1];
      double wa = tri_area2(q, b, c) / den;
      double wb = tri_area2(a, q, c) / den;
      double wc = tri_area2(a, b, q) / den;
      double plane = wa * tab.sigma[ea] + wb * tab.sigma[eb] + wc * tab.sigma[apex0];
      double gap = tab.sigma[apex1] - plane;
      if (gap > 1e-9) {
        tab.violations.push_back({ea, eb, apex1, gap});
        break;
      }
    }
  }

  // bucket grid for point location
  Vec2 lo = tab.hull[0], hi = tab.hull[0];
  for (auto& h : tab.hull) {
    lo = {std::min(lo.x, h.x), std::min(lo.y, h.y)};
    hi = {std::max(hi.x, h.x), std::max(hi.y, h.y)};
  }
  tab.bb_lo = lo;
  tab.bb_span = {std::max(hi.x - lo.x, 1e-12), std::max(hi.y - lo.y, 1e-12)};
  tab.grid_n = std::min(128, 2 * res);
  int gn = tab.grid_n;
  std::vector<std::vector<int>> cells(gn * gn);
  for (int ti = 0; ti < (int)tab.tris.size(); ++ti) {
    Vec2 tl = tab.pts[tab.tris[ti][0]], th = tl;
    for (int k = 1; k < 3; ++k) {
      Vec2 p2 = tab.pts[tab.tris[ti][k]];
      tl = {std::min(tl.x, p2.x), std::min(tl.y, p2.y)};
      th = {std::max(th.x, p2.x), std::max(th.y, p2.y)};
    }
    int x0 = clampd(std::floor((tl.x - lo.x) / tab.bb_span.x * gn), 0, gn - 1);
    int x1 = clampd(std::floor((th.x - lo.x) / tab.bb_span.x * gn), 0, gn - 1);
    int y0 = clampd(std::floor((tl.y - lo.y) / tab.bb_span.y * gn), 0, gn - 1);
    int y1 = clampd(std::floor((th.y - lo.y) / tab.bb_span.y * gn), 0, gn - 1);
    for (int gy = y0; gy <= y1; ++gy)
      for (int gx = x0; gx <= x1; ++gx) cells[gy * gn + gx].push_back(ti);
  }
  tab.cell_start.assign(gn * gn + 1, 0);
  for (int i = 0; i < gn * gn; ++i) tab.cell_start[i + 1] = tab.cell_start[i] + (int)cells[i].size();
  tab.cell_tris.reserve(tab.cell_start.back());
  for (auto& c : cells) tab.cell_tris.insert(tab.cell_tris.end(), c.begin(), c.end());
  return tab;
}

int SurfaceTensionTable::locate(double s, double t) const {
  int ne = (int)hull.size();
  Vec2 d = Vec2{s, t} - center;
  double lam = 0;
  for (int i = 0; i < ne; ++i) {
    Vec2 a = hull[i], b = hull[(i + 1) % ne];
    Vec2 n = {(b - a).y, -(b - a).x};  // inward for a ccw polygon, sign cancels
    double den = n.dot(a - center);
    double r = n.dot(d) / den;
    lam = std::max(lam, r);
  }
  if (lam > 1 + 1e-9) return -1;
  auto bary_ok = [&](int ti, double tol) {
    Vec2 a = pts[tris[ti][0]], b = pts[tris[ti][1]], c = pts[tris[ti][2]];
    double den = tri_area2(a, b, c);
    if (std::abs(den) < 1e-16) return false;
    double wa = tri_area2({s, t}, b, c) / den;
    double wb = tri_area2(a, {s, t}, c) / den;
    double wc = tri_area2(a, b, {s, t}) / den;
    return wa >= -tol && wb >= -tol && wc >= -tol;
  };
  int gn = grid_n;
  int gx = (int)clampd(std::floor((s - bb_lo.x) / bb_span.x * gn), 0, gn - 1);
  int gy = (int)clampd(std::floor((t - bb_lo.y) / bb_span.y * gn), 0, gn - 1);
  for (int ring = 0; ring <= 1; ++ring)
    for (int dy = -ring; dy <= ring; ++dy)
      for (int dx = -ring; dx <= ring; ++dx) {
        if (ring && std::max(std::abs(dx), std::abs(dy)) != ring) continue;
        int cx = gx + dx, cy = gy + dy;
        if (cx < 0 || cy < 0 || cx >= gn || cy >= gn) continue;
        int cell = cy * gn + cx;
        for (int k = cell_start[cell]; k < cell_start[cell + 1]; ++k)
          if (bary_ok(cell_tris[k], 1e-9)) return cell_tris[k];
      }
  for (int ti = 0; ti < (int)tris.size(); ++ti)
    if (bary_ok(ti, 1e-7)) return ti;
  return -1;
}

double SurfaceTensionTable::interpolate(double s, double t) const {
  int ti = locate(s, t);
  if (ti < 0) {
    if (point_in_polygon(hull, {s, t}) == 0)
      throw Error(Err::OutsidePolygon, "slope outside the Newton polygon");
    throw Error(Err::Internal, "point location failed inside the Newton polygon");
  }
  Vec2 a = pts[tris[ti][0]], b = pts[tris[ti][1]], c = pts[tris[ti][2]];
  double den = tri_area2(a, b, c);
  double wa = tri_area2({s, t}, b, c) / den;
  double wb = tri_area2(a, {s, t}, c) / den;
  double wc = tri_area2(a, b, {s, t}) / den;
  return wa * sigma[tris[ti][0]] + wb * sigma[tris[ti][1]] + wc * sigma[tris[ti][2]];
}

SlopePartition torus_partition_by_slope(const FundamentalDomain& fd, int n) {
  if (n < 1) throw Error(Err::MalformedInput, "torus size must be >= 1");
  NewtonPolygon np = newton_polygon(fd);
  long long smin = INT64_MAX, smax = INT64_MIN, tmin = INT64_MAX, tmax = INT64_MIN;
  for (auto& q : np.hull) {
    smin = std::min(smin, q.x);
    smax = std::max(smax, q.x);
    tmin = std::min(tmin, q.y);
    tmax = std::max(tmax, q.y);
  }
  int ms = (int)(n * (smax - smin)) + 1, mt = (int)(n * (tmax - tmin)) + 1;

  Graph g = torus_quotient(fd, n);
  std::vector<int> sign = kasteleyn_signs(g);
  ColorIndex ci = color_index(g);
  int m = (int)ci.whites.size();
  if ((double)ms * mt * m * m * m > 4e10)
    throw Error(Err::TooLarge, "torus determinant sweep too large");

  using C = std::complex<double>;
  std::vector<C> ws(ms), wt(mt);
  for (int i = 0; i < ms; ++i) ws[i] = std::exp(C(0, 2 * M_PI * i / ms));
  for (int i = 0; i < mt; ++i) wt[i] = std::exp(C(0, 2 * M_PI * i / mt));
  auto root = [](const std::vector<C>& tab, long long k) {
    int mm = (int)tab.size();
    int r = (int)(((k % mm) + mm) % mm);
    return tab[r];
  };

  std::vector<C> dets((size_t)ms * mt);
  Eigen::MatrixXcd k(m, m);
  for (int ps = 0; ps < ms; ++ps)
    for (int q = 0; q < mt; ++q) {
      k.setZero();
      for (int e = 0; e < (int)g.edges.size(); ++e) {
        const GEdge& ed = g.edges[e];
        C tw = root(ws, (long long)ps * ed.wrap_x) * root(wt, (long long)q * ed.wrap_y);
        k(ci.idx[ed.w], ci.idx[ed.b]) += sign[e] * ed.weight * tw;
      }
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(k);
      C det = (double)lu.permutationP().determinant();
      double mag = 0;
      for (int i = 0; i < m; ++i) {
        det *= lu.matrixLU()(i, i);
        mag += std::log(std::max(std::abs(lu.matrixLU()(i, i)), 1e-300));
        if (mag > 600) throw Error(Err::TooLarge, "partition function exceeds double range");
      }
      dets[(size_t)ps * mt + q] = det;
    }

  // unalias: slopes relative to the lifted reference cover live in n * hull,
  // and the lift's raw exponent is n * shift
  SlopePartition sp;
  sp.n = n;
  double maxc = 0, maxim = 0;
  std::map<std::pair<int, int>, double> mags;
  for (long long a = n * smin; a <= n * smax; ++a)
    for (long long b = n * tmin; b <= n * tmax; ++b) {
      long long x = a + n * np.shift.x, y = b + n * np.shift.y;
      C acc = 0;
      for (int ps = 0; ps < ms; ++ps)
        for (int q = 0; q < mt; ++q)
          acc += dets[(size_t)ps * mt + q] * root(ws, -(long long)ps * x) *
                 root(wt, -(long long)q * y);
      acc /= (double)ms * mt;
      double mag = std::abs(acc);
      mags[{(int)a, (int)b}] = mag;
      maxc = std::max(maxc, mag);
      maxim = std::max(maxim, std::abs(acc.imag()));
    }
  // the inversion cancels values as large as the biggest determinant, so that
  // sets the roundoff floor for every coefficient
  if (maxim > 1e-6 * maxc)
    throw Error(Err::Internal, "slope coefficient came out complex");
  for (auto& [st, mag] : mags)
    if (mag > 1e-9 * maxc) {
      sp.z[st] = mag;
      sp.total += mag;
    }
  sp.log_total = std::log(sp.total);
  return sp;
}

}  // namespace dimer
