#pragma once

#include <functional>
#include <vector>

#include "monokit/space.hpp"

// Small deterministic optimization kit used by the transform engines.
// Everything here is either provably global (support/KKT enumeration on
// convex problems, exact quadratic interpolation) or explicitly an estimate
// (grid refinement); callers propagate the distinction through the `exact`
// flag on their results.

namespace monokit {

struct NewtonResult {
  Vec x;
  double value = 0.0;
  int iters = 0;
  bool converged = false;
};

// Damped Newton with Armijo backtracking for smooth convex objectives.
// The Hessian is taken by central differences of the analytic gradient,
// with a Levenberg shift when the solve is poorly conditioned.
NewtonResult minimize_newton(const std::function<double(const Vec&)>& f,
                             const std::function<Vec(const Vec&)>& grad, Vec x0,
                             int max_iters = 200, double grad_tol = 1e-11);

struct GridResult {
  Vec x;
  double value = 0.0;
  bool evaluated = false;     // false when every grid node was +inf
  double oscillation = 0.0;   // max |f(best) - f(neighbor)| at the last level
};

// Coarse-to-fine product-grid minimization over [lo, hi].  f may return
// +inf to mark points outside its domain.  Never more than an upper
// estimate of the true infimum.
GridResult grid_refine_min(const std::function<double(const Vec&)>& f, Vec lo, Vec hi,
                           int pts_per_axis, int levels);

struct SimplexQpResult {
  Vec lambda;
  double value = 0.0;
  bool kkt_verified = false;
};

// min (1/2) l' H l + g' l  over the probability simplex, H PSD.
// Global by enumeration of KKT support sets (therefore k is capped).
SimplexQpResult simplex_qp_min(const Mat& H, const Vec& g);

struct SimplexSearchResult {
  Vec lambda;
  double value = 0.0;
  bool evaluated = false;
};

// Composition grid over the probability simplex followed by pairwise-transfer
// descent with a shrinking step.  For convex f the pairwise directions span
// every feasible direction, so the refinement stalls only near the optimum;
// still reported as an estimate.
SimplexSearchResult simplex_grid_min(int k, int grid,
                                     const std::function<double(const Vec&)>& f);

struct ProxResult {
  Vec x;
  double value = 0.0;
};

// min_x  max_j (<s_j, x> + t_j) + (1/2)||x - w||^2   (Euclidean).
// Exact: enumerates active sets and verifies the KKT system of each.
ProxResult prox_max_affine(const std::vector<Vec>& s, const std::vector<double>& t,
                           const Vec& w);

struct QuadMinResult {
  Vec x;
  double value = 0.0;
};

// Exact minimizer of a function known to be a convex quadratic on R^d.
// The quadratic is reconstructed by interpolation (exact for polynomials of
// degree two) and minimized through an eigen-decomposition pseudo-inverse.
QuadMinResult minimize_exact_quadratic(const std::function<double(const Vec&)>& f, int d);

// Deterministic uniform sampling helper.  std::uniform_real_distribution is
// implementation-defined; this is not, which keeps golden files stable.
struct Rng {
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next();
  double uniform(double lo, double hi);
  Vec uniform_vec(int n, double lo, double hi);
  // point of the probability simplex with k vertices
  Vec simplex(int k);

 private:
  uint64_t state;
};

}  // namespace monokit
