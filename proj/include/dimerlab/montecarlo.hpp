#pragma once
#include <map>
#include <string>
#include <vector>

#include "dimerlab/covers.hpp"
#include "dimerlab/gibbs.hpp"
#include "dimerlab/rng.hpp"

namespace dimer {

// Metropolis chain over covers via single-face rotations. Only internal faces
// are proposed, so boundary heights stay fixed and the chain explores the
// boundary class of its initial cover (everything, for graphs whose covers
// are perfect matchings). The graph must outlive the state.
struct ChainState {
  const Graph* g = nullptr;
  WeightSystem w;
  BoundaryCondition bc;
  Cover ref;                    // initial cover; heights are relative to it
  std::vector<char> mask;       // current cover, by edge
  std::vector<int> h;           // current heights, 0 at g->f0
  std::vector<int> candidates;  // proposable faces
  uint64_t seed = 0;
  uint64_t steps = 0, accepted = 0;
};

ChainState make_chain(const Graph& g, const WeightSystem& w, const BoundaryCondition& bc,
                      uint64_t seed);

// One proposal: uniform face, flip if its edges alternate, accept with
// min(1, weight ratio). Two RNG draws when a rotatable face comes up.
void glauber_step(ChainState& s, CounterRng& rng);

Cover chain_cover(const ChainState& s);

// Heights and cover agree with a from-scratch recomputation.
bool chain_consistent(const ChainState& s);

struct MeanHeightEstimate {
  std::vector<double> h;   // mean height per face, relative to ref
  std::vector<double> se;  // batch-means standard errors
  Cover ref;
  uint64_t steps = 0;
  double acceptance = 0;
  bool enumerated = false;  // exact fallback used instead of the chain
};

// Chain estimate of the expected height. Falls back to exact enumeration
// when the graph has admissible covers but no face to rotate.
MeanHeightEstimate estimate_mean_height(const Graph& g, const WeightSystem& w,
                                        const BoundaryCondition& bc, uint64_t steps,
                                        uint64_t burn_in, uint64_t seed);

struct ConcentrationReport {
  double tail = 0;   // P(|h(v) - hbar(v)| > a sqrt(m))
  double bound = 0;  // 2 exp(-a^2/2)
  double se = 0;     // binomial error when sampled; 0 when exact
  int m = 0;         // unoriented dual distance from v to the boundary
  bool exact = false;
  bool pass = false;
};

// Tail of the height deviation at one face against the Azuma bound. Uses the
// exact enumerated distribution when feasible, otherwise `trials` thinned
// chain draws.
ConcentrationReport concentration_check(const Graph& g, const WeightSystem& w,
                                        const BoundaryCondition& bc, int face, double a,
                                        uint64_t trials = 0, uint64_t seed = 1);

// Distinct boundary height functions over admissible covers, anchored to 0
// at the first boundary face (the rim face for stub-free graphs), sorted.
std::vector<std::map<int, int>> boundary_classes(const Graph& g, const EnumOptions& opt = {});

struct CouplingReport {
  int pairs = 0;
  bool monotone = true;
  std::string first_violation;
};

// Exact check that pointwise-ordered boundary data yields pointwise-ordered
// expected heights. Pairs must be anchored like boundary_classes output.
CouplingReport coupling_monotonicity_check(
    const Graph& g, const WeightSystem& w,
    const std::vector<std::pair<std::map<int, int>, std::map<int, int>>>& pairs,
    const EnumOptions& opt = {});

}  // namespace dimer
