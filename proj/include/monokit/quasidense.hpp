#pragma once

#include <array>

#include "monokit/transforms.hpp"

// Quasidensity machinery: the sampled five-way equivalence certificate, the
// constructive iteration toward the graph, the eight-way dual membership
// report, and the surjectivity solver built on the resolvent.

namespace monokit {

// r-distance from b to the graph (0 for maximal operators at p = 2)
double quasidensity_gap(const Space& s, const OperatorRep& op, const PdPoint& b);

// ---- five-way certificate ----------------------------------------------

struct EquivCertificate {
  std::vector<PdPoint> samples_primal;
  std::vector<DualPoint> samples_dual;  // raw draws; dual conditions project
                                        // them onto the transform domains
  double cond_a_gap_max = 0.0;    // sup of quasidensity gaps        (want <= tol)
  double cond_b_min_g = 0.0;      // inf of G over dual samples      (want >= -tol)
  double cond_c_min_f = 0.0;      // inf of F over dual samples      (want >= -tol)
  double cond_d_max_pboxr = 0.0;  // sup of (P [] r)                 (want <= tol)
  double cond_e_min_fboxrt = 0.0; // inf of (F [] rt) o L            (want >= -tol)
  std::array<bool, 5> holds{};
  std::array<std::string, 5> methods{};
  bool consistent = false;        // all five hold, or all five fail
  double tol = 1e-5;
  std::optional<std::string> warning;
};

EquivCertificate equivalence_certificate(const Space& s, const OperatorRep& op,
                                         int n_samples, uint64_t seed,
                                         double box_halfwidth = 2.0, double tol = 1e-5);

// ---- constructive iteration ----------------------------------------------

enum class IterOracle {
  candidate_set,  // graph points and the resolvent point
  exact_convex,   // exact minimizer of P + r(c_prev - .), p = 2 graph/linear
};

struct IterationTrace {
  std::vector<PdPoint> c_sequence;
  double eta = 0.0;
  PdPoint limit_m;
  std::vector<double> p_values;    // P(c_n) along the sequence
  std::vector<double> step_norms;  // ||c_{n+1} - c_n||_B, one per accepted step
  std::vector<double> budgets;     // eta^(2n+2) target met by each step
  bool bound_ok = true;            // 4*eta + 2*sqrt(P(c1)) first step; 4*eta^n after
  bool limit_bound_ok = true;      // (1/4)||limit - c1||^2 <= P(c1) + 1e-6
  double limit_residual = 0.0;     // r-distance of the limit to the graph
  bool converged = false;
  std::optional<std::string> warning;
};

// Runs the budgeted descent: each accepted step satisfies
// P(c_{n+1}) + r(c_n - c_{n+1}) < eta^(2n+2).  Fails (SolverError, with the
// step index) when the oracle cannot meet a budget.
IterationTrace suffthm_iterate(const Space& s, const OperatorRep& op, const PdPoint& c1,
                               double eta, IterOracle oracle = IterOracle::candidate_set,
                               int max_steps = 25);

// ---- eight-way membership report -----------------------------------------

struct EqthmCondition {
  std::string name;       // "a" .. "h"
  std::string statement;
  bool evaluated = false;
  bool exact = false;
  bool holds = false;
  bool finite = true;
  double value = 0.0;
  std::string method;
};

struct EqthmReport {
  std::array<EqthmCondition, 8> conditions;
  bool member = false;        // verdict of the exact conditions
  bool hard_failure = false;  // the exact conditions disagree among themselves
  std::optional<std::string> warning;
};

// Conditions on b*: (a) G <= 0, (b) G = 0, (c) (G [] qt) = 0, (d) (G [] qt) >= 0,
// (e) F <= 0, (f) F = 0, (g) (F [] qt) = 0, (h) (F [] qt) >= 0.
// (a)(b)(e)(f) are exact; the convolution conditions are grid estimates and
// are never inferred from the exact ones.
EqthmReport eqthm_report(const Space& s, const OperatorRep& op, const DualPoint& bstar,
                         const GridOpts& opts = {});

// ---- surjectivity ---------------------------------------------------------

struct SurjectivityResult {
  PdPoint m;                    // graph point realizing the witness
  DualPoint bstar;              // L m
  double rt_residual = 0.0;     // rt(L(x,x*) - bstar)
  double incl_primal_residual = 0.0;  // || (x - y**) - Jdual(y* - x*) ||
  double incl_dual_residual = 0.0;    // || (x* - y*) - Jprimal(y** - x) ||
};

// Finds (y*, y**) in L(graph) with rt(L(x,x*) - (y*,y**)) = 0.  With x = 0
// this solves x* in S y + J y.  Requires p = 2 and a maximal-capable
// representation that passes the Minty check.
SurjectivityResult solve_surjectivity(const Space& s, const OperatorRep& op, const Vec& x,
                                      const Vec& xstar);

}  // namespace monokit
