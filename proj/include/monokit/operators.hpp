#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "monokit/space.hpp"

// Operator representations.  A monotone set M in B is given either as a
// finite list of graph points, as the graph {(x, Ax)} of a linear map with
// positive-semidefinite symmetric part, or as the subdifferential of a
// max-affine convex function f(x) = max_j (<a_j, x> + beta_j).  The latter
// two are "maximal-capable": maximality is decidable for them, while a
// finite sample can never certify it.

namespace monokit {

struct FiniteGraph {
  std::vector<PdPoint> points;
};

struct LinearOp {
  Mat matrix;
  Mat symmetric_part() const { return 0.5 * (matrix + matrix.transpose()); }
};

struct PwaPiece {
  Vec a;
  double beta = 0.0;
};

struct PwaSubdiff {
  std::vector<PwaPiece> pieces;
};

using OperatorRep = std::variant<FiniteGraph, LinearOp, PwaSubdiff>;

std::string rep_name(const OperatorRep& op);
int op_dim(const OperatorRep& op);
void check_operator(const Space& s, const OperatorRep& op);

struct MonotonicityReport {
  bool monotone = false;
  std::optional<std::pair<PdPoint, PdPoint>> violating_pair;
  std::optional<bool> maximal;  // set only when decidable for this rep / norm
  std::string method;
};

MonotonicityReport is_monotone(const Space& s, const OperatorRep& op);
void require_monotone(const Space& s, const OperatorRep& op, const char* who);

// Maximality via the surjectivity criterion for I + op; p = 2 and a
// maximal-capable representation required.
bool is_maximal_minty(const Space& s, const OperatorRep& op);

struct GridSpec {
  Vec lo;
  Vec hi;
  int points_per_axis = 5;
};

// Finite sample of the graph over a coordinate box.  For subdifferential
// operators, points where several pieces are active contribute the active
// vertices and convex mixtures between them (the normal-segment samples).
FiniteGraph sample_graph(const Space& s, const OperatorRep& op, const GridSpec& grid);

struct ResolveResult {
  PdPoint m;        // graph point minimizing r(m - b)
  double residual;  // r(m - b) at the minimizer
};

// Nearest graph point in the r sense.  Exact enumeration for finite graphs;
// a linear solve (p = 2) or damped Newton (p != 2) for linear ops; a prox
// computation for subdifferential ops (p = 2 only).
ResolveResult resolve(const Space& s, const OperatorRep& op, const PdPoint& b,
                      double tol = 1e-8);

// Membership residual of b in the graph (0 for exact members).
double graph_residual(const Space& s, const OperatorRep& op, const PdPoint& b);

// --- max-affine helpers shared with the transform engines ---

double pwa_value(const PwaSubdiff& f, const Vec& x);
std::vector<int> pwa_active(const PwaSubdiff& f, const Vec& x, double tol = 1e-9);
// H-representation { x : G x >= h } of the cell where piece j attains the max
void pwa_cell(const PwaSubdiff& f, int j, Mat& G, Vec& h);

// Eigen-decomposition of a PSD matrix with pseudo-inverse application and a
// range test; shared by the closed forms for linear operators.
struct PsdForm {
  explicit PsdForm(const Mat& Q);
  bool in_range(const Vec& w) const;
  Vec pinv_apply(const Vec& w) const;
  // (1/4) <w, Q^+ w>, valid when in_range(w)
  double quarter_quad(const Vec& w) const;

  Mat vectors;
  Vec values;
  double null_tol;
};

}  // namespace monokit
