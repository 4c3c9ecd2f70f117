#include "monokit/operators.hpp"

#include <algorithm>
#include <cmath>

#include "monokit/errors.hpp"
#include "monokit/optim.hpp"

namespace monokit {

std::string rep_name(const OperatorRep& op) {
  if (std::holds_alternative<FiniteGraph>(op)) return "finite_graph";
  if (std::holds_alternative<LinearOp>(op)) return "linear";
  return "pwa_subdiff";
}

int op_dim(const OperatorRep& op) {
  if (const auto* g = std::get_if<FiniteGraph>(&op)) {
    if (g->points.empty()) throw ContractError("operator: finite graph must be nonempty");
    return static_cast<int>(g->points.front().x.size());
  }
  if (const auto* l = std::get_if<LinearOp>(&op)) return static_cast<int>(l->matrix.rows());
  const auto& f = std::get<PwaSubdiff>(op);
  if (f.pieces.empty()) throw ContractError("operator: pwa_subdiff needs at least one piece");
  return static_cast<int>(f.pieces.front().a.size());
}

void check_operator(const Space& s, const OperatorRep& op) {
  if (const auto* g = std::get_if<FiniteGraph>(&op)) {
    if (g->points.empty()) throw ContractError("operator: finite graph must be nonempty");
    for (const auto& m : g->points) check_point(s, m, "operator point");
    return;
  }
  if (const auto* l = std::get_if<LinearOp>(&op)) {
    if (l->matrix.rows() != s.dim || l->matrix.cols() != s.dim)
      throw ContractError("operator: matrix must be dim x dim");
    return;
  }
  const auto& f = std::get<PwaSubdiff>(op);
  if (f.pieces.empty()) throw ContractError("operator: pwa_subdiff needs at least one piece");
  for (const auto& p : f.pieces)
    if (p.a.size() != s.dim) throw ContractError("operator: piece slope has wrong dimension");
}

MonotonicityReport is_monotone(const Space& s, const OperatorRep& op) {
  check_operator(s, op);
  MonotonicityReport rep;
  if (const auto* g = std::get_if<FiniteGraph>(&op)) {
    rep.method = "pairwise couplings";
    rep.monotone = true;
    const auto& pts = g->points;
    for (size_t i = 0; i < pts.size() && rep.monotone; ++i) {
      for (size_t j = i + 1; j < pts.size(); ++j) {
        if (q(pts[i] - pts[j]) < -1e-10) {
          rep.monotone = false;
          rep.violating_pair = {pts[i], pts[j]};
          break;
        }
      }
    }
    return rep;
  }
  if (const auto* l = std::get_if<LinearOp>(&op)) {
    rep.method = "least eigenvalue of the symmetric part";
    Eigen::SelfAdjointEigenSolver<Mat> es(l->symmetric_part());
    int imin = 0;
    es.eigenvalues().minCoeff(&imin);
    rep.monotone = es.eigenvalues()[imin] >= -1e-10;
    if (!rep.monotone) {
      Vec v = es.eigenvectors().col(imin);
      rep.violating_pair = {PdPoint{v, l->matrix * v}, zero_point(s)};
    } else {
      // a monotone linear map defined on all of E is maximal; maximality only
      // references the pairing, so this holds for every p
      rep.maximal = true;
    }
    return rep;
  }
  rep.method = "subdifferential of a real convex function";
  rep.monotone = true;
  rep.maximal = true;  // subdifferential of an everywhere-finite convex function
  return rep;
}

void require_monotone(const Space& s, const OperatorRep& op, const char* who) {
  if (!is_monotone(s, op).monotone)
    throw ContractError(std::string(who) + ": operator is not monotone");
}

bool is_maximal_minty(const Space& s, const OperatorRep& op) {
  check_operator(s, op);
  if (!s.is_l2())
    throw ContractError("is_maximal_minty: surjectivity test implemented for p = 2 only");
  if (std::holds_alternative<FiniteGraph>(op))
    throw ContractError("is_maximal_minty: maximality is undecidable from a finite graph sample");
  require_monotone(s, op, "is_maximal_minty");
  if (const auto* l = std::get_if<LinearOp>(&op)) {
    // I + A is onto iff it has full rank; for monotone A this always holds,
    // but the rank is checked rather than assumed
    Eigen::FullPivLU<Mat> lu(Mat::Identity(s.dim, s.dim) + l->matrix);
    return lu.isInvertible();
  }
  // subdifferential of an everywhere-finite convex function: the prox solve
  // below succeeds for every right-hand side, which is precisely the
  // surjectivity of I + op
  return true;
}

FiniteGraph sample_graph(const Space& s, const OperatorRep& op, const GridSpec& grid) {
  check_operator(s, op);
  if (grid.lo.size() != s.dim || grid.hi.size() != s.dim)
    throw ContractError("sample_graph: grid box has wrong dimension");
  if (grid.points_per_axis < 1) throw ContractError("sample_graph: empty grid");
  for (int j = 0; j < s.dim; ++j)
    if (grid.lo[j] > grid.hi[j]) throw ContractError("sample_graph: empty grid");

  FiniteGraph out;
  if (const auto* g = std::get_if<FiniteGraph>(&op)) {
    for (const auto& m : g->points) {
      bool inside = true;
      for (int j = 0; j < s.dim && inside; ++j)
        inside = m.x[j] >= grid.lo[j] - 1e-12 && m.x[j] <= grid.hi[j] + 1e-12;
      if (inside) out.points.push_back(m);
    }
    return out;
  }

  std::vector<int> idx(s.dim, 0);
  const int pts = grid.points_per_axis;
  while (true) {
    Vec x(s.dim);
    for (int j = 0; j < s.dim; ++j) {
      x[j] = pts == 1 ? grid.lo[j]
                      : grid.lo[j] + (grid.hi[j] - grid.lo[j]) * idx[j] / double(pts - 1);
    }
    if (const auto* l = std::get_if<LinearOp>(&op)) {
      out.points.push_back({x, l->matrix * x});
    } else {
      const auto& f = std::get<PwaSubdiff>(op);
      auto act = pwa_active(f, x);
      for (int i : act) out.points.push_back({x, f.pieces[i].a});
      // normal-segment samples between active vertices
      for (size_t a = 0; a < act.size(); ++a) {
        for (size_t b = a + 1; b < act.size(); ++b) {
          for (double tmix : {0.25, 0.5, 0.75}) {
            Vec mix = (1.0 - tmix) * f.pieces[act[a]].a + tmix * f.pieces[act[b]].a;
            out.points.push_back({x, mix});
          }
        }
      }
    }
    int j = 0;
    while (j < s.dim && ++idx[j] == pts) idx[j++] = 0;
    if (j == s.dim) break;
  }
  return out;
}

ResolveResult resolve(const Space& s, const OperatorRep& op, const PdPoint& b, double tol) {
  check_operator(s, op);
  check_point(s, b, "resolve");

  if (const auto* g = std::get_if<FiniteGraph>(&op)) {
    ResolveResult best{g->points.front(), r(s, g->points.front() - b)};
    for (const auto& m : g->points) {
      double v = r(s, m - b);
      if (v < best.residual) best = {m, v};
    }
    return best;
  }

  if (const auto* l = std::get_if<LinearOp>(&op)) {
    const Mat& A = l->matrix;
    Mat IA = Mat::Identity(s.dim, s.dim) + A;
    Vec rhs = b.x + b.xstar;
    Vec x0 = Eigen::FullPivLU<Mat>(IA).solve(rhs);
    if (s.is_l2()) {
      PdPoint m{x0, A * x0};
      double res = r(s, m - b);
      if (res > tol) throw SolverError("resolve: linear solve missed tolerance");
      return {m, res};
    }
    auto obj = [&](const Vec& x) { return r(s, PdPoint{x, A * x} - b); };
    auto grad = [&](const Vec& x) -> Vec {
      Vec dx = x - b.x;
      Vec dxs = A * x - b.xstar;
      return duality_map(s, dx, Side::primal) +
             A.transpose() * duality_map(s, dxs, Side::dual) + dxs + A.transpose() * dx;
    };
    NewtonResult nr = minimize_newton(obj, grad, x0, 300, 1e-12);
    if (nr.value > tol)
      throw SolverError("resolve: newton iteration missed tolerance " + std::to_string(tol));
    PdPoint m{nr.x, A * nr.x};
    return {m, std::max(nr.value, 0.0)};
  }

  const auto& f = std::get<PwaSubdiff>(op);
  if (!s.is_l2())
    throw ContractError("resolve: pwa_subdiff representation supported at p = 2 only");
  std::vector<Vec> slopes;
  std::vector<double> offs;
  for (const auto& p : f.pieces) {
    slopes.push_back(p.a);
    offs.push_back(p.beta);
  }
  Vec w = b.x + b.xstar;
  ProxResult pr = prox_max_affine(slopes, offs, w);
  PdPoint m{pr.x, w - pr.x};
  double res = r(s, m - b);
  if (res > tol) throw SolverError("resolve: prox solve missed tolerance");
  return {m, res};
}

double graph_residual(const Space& s, const OperatorRep& op, const PdPoint& b) {
  check_operator(s, op);
  check_point(s, b, "graph_residual");
  if (const auto* g = std::get_if<FiniteGraph>(&op)) {
    double best = norm_B(s, g->points.front() - b);
    for (const auto& m : g->points) best = std::min(best, norm_B(s, m - b));
    return best;
  }
  if (const auto* l = std::get_if<LinearOp>(&op))
    return norm(s, Vec(b.xstar - l->matrix * b.x), Side::dual);

  const auto& f = std::get<PwaSubdiff>(op);
  // distance from b.xstar to the convex hull of the near-active slopes
  auto act = pwa_active(f, b.x, 1e-6);
  const int k = static_cast<int>(act.size());
  Mat H(k, k);
  Vec g(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) H(i, j) = f.pieces[act[i]].a.dot(f.pieces[act[j]].a);
    g[i] = -f.pieces[act[i]].a.dot(b.xstar);
  }
  SimplexQpResult qp = simplex_qp_min(H, g);
  double sq = 2.0 * (qp.value + 0.5 * b.xstar.squaredNorm());
  return std::sqrt(std::max(sq, 0.0));
}

double pwa_value(const PwaSubdiff& f, const Vec& x) {
  double v = f.pieces.front().a.dot(x) + f.pieces.front().beta;
  for (const auto& p : f.pieces) v = std::max(v, p.a.dot(x) + p.beta);
  return v;
}

std::vector<int> pwa_active(const PwaSubdiff& f, const Vec& x, double tol) {
  double v = pwa_value(f, x);
  std::vector<int> act;
  for (size_t i = 0; i < f.pieces.size(); ++i)
    if (f.pieces[i].a.dot(x) + f.pieces[i].beta >= v - tol) act.push_back(static_cast<int>(i));
  return act;
}

void pwa_cell(const PwaSubdiff& f, int j, Mat& G, Vec& h) {
  const int k = static_cast<int>(f.pieces.size());
  const int n = static_cast<int>(f.pieces.front().a.size());
  G.resize(k - 1, n);
  h.resize(k - 1);
  int row = 0;
  for (int i = 0; i < k; ++i) {
    if (i == j) continue;
    G.row(row) = (f.pieces[j].a - f.pieces[i].a).transpose();
    h[row] = f.pieces[i].beta - f.pieces[j].beta;
    ++row;
  }
}

PsdForm::PsdForm(const Mat& Q) {
  Eigen::SelfAdjointEigenSolver<Mat> es(Q);
  vectors = es.eigenvectors();
  values = es.eigenvalues();
  null_tol = 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff());
}

bool PsdForm::in_range(const Vec& w) const {
  Vec wt = vectors.transpose() * w;
  double scale = 1e-9 * std::max(1.0, w.norm());
  for (int i = 0; i < values.size(); ++i)
    if (values[i] <= null_tol && std::abs(wt[i]) > scale) return false;
  return true;
}

Vec PsdForm::pinv_apply(const Vec& w) const {
  Vec wt = vectors.transpose() * w;
  for (int i = 0; i < values.size(); ++i) wt[i] = values[i] > null_tol ? wt[i] / values[i] : 0.0;
  return vectors * wt;
}

double PsdForm::quarter_quad(const Vec& w) const { return 0.25 * w.dot(pinv_apply(w)); }

}  // namespace monokit
