#include "monokit/adjoint.hpp"

#include <Eigen/Dense>

#include "monokit/errors.hpp"

namespace monokit {

namespace {

constexpr double kEigTol = -1e-10;
constexpr double kRankTol = 1e-9;

Mat stack_basis(const Space& s, const std::vector<PdPoint>& basis) {
  Mat b(2 * s.dim, static_cast<int>(basis.size()));
  for (int j = 0; j < b.cols(); ++j) {
    b.col(j).head(s.dim) = basis[j].x;
    b.col(j).tail(s.dim) = basis[j].xstar;
  }
  return b;
}

Mat stack_basis(const Space& s, const std::vector<DualPoint>& basis) {
  Mat b(2 * s.dim, static_cast<int>(basis.size()));
  for (int j = 0; j < b.cols(); ++j) {
    b.col(j).head(s.dim) = basis[j].ystar;
    b.col(j).tail(s.dim) = basis[j].ystarstar;
  }
  return b;
}

int mat_rank(const Mat& m) {
  if (m.cols() == 0 || m.rows() == 0) return 0;
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  qr.setThreshold(kRankTol);
  return static_cast<int>(qr.rank());
}

void check_stacked(const Space& s, const Mat& b, int dim_v, const char* who) {
  if (dim_v != b.cols()) throw ContractError(std::string(who) + ": dim_v disagrees with basis size");
  if (dim_v > 2 * s.dim) throw ContractError(std::string(who) + ": dim_v exceeds the ambient dimension");
  if (mat_rank(b) != dim_v) throw ContractError(std::string(who) + ": basis is linearly dependent");
}

// monotonicity = PSD of the pairing form (1/2) u' S u, S = [[0,I],[I,0]], on
// the span; columns are normalized so the -1e-10 cutoff is scale-free
bool span_form_psd(const Space& s, Mat b) {
  if (b.cols() == 0) return true;
  for (int j = 0; j < b.cols(); ++j) {
    double nj = b.col(j).norm();
    if (nj > 0) b.col(j) /= nj;
  }
  int n = s.dim;
  Mat form(b.cols(), b.cols());
  for (int i = 0; i < b.cols(); ++i)
    for (int j = 0; j < b.cols(); ++j)
      form(i, j) = 0.5 * (b.col(i).head(n).dot(b.col(j).tail(n)) +
                          b.col(i).tail(n).dot(b.col(j).head(n)));
  Eigen::SelfAdjointEigenSolver<Mat> es(form);
  return es.eigenvalues().minCoeff() >= kEigTol;
}

// rank of the summed-coordinate projection {head + tail}
bool summed_projection_full_rank(const Space& s, const Mat& b) {
  if (b.cols() == 0) return s.dim == 0;
  Mat summed(s.dim, b.cols());
  for (int j = 0; j < b.cols(); ++j)
    summed.col(j) = b.col(j).head(s.dim) + b.col(j).tail(s.dim);
  return mat_rank(summed) == s.dim;
}

// annihilator of the rows under u -> <row_head, u_head> - <row_tail, u_tail>
Mat bracket_kernel(const Space& s, const Mat& b) {
  int n = s.dim;
  if (b.cols() == 0) return Mat::Identity(2 * n, 2 * n);
  Mat rows(b.cols(), 2 * n);
  for (int i = 0; i < b.cols(); ++i) {
    rows.row(i).head(n) = b.col(i).head(n).transpose();
    rows.row(i).tail(n) = -b.col(i).tail(n).transpose();
  }
  Eigen::FullPivLU<Mat> lu(rows);
  lu.setThreshold(kRankTol);
  // kernel() encodes a trivial kernel as one zero column; normalize to width 0
  if (lu.dimensionOfKernel() == 0) return Mat(2 * n, 0);
  return lu.kernel();
}

}  // namespace

LinSubspace make_subspace(const Space& s, std::vector<PdPoint> basis) {
  LinSubspace v;
  v.basis = std::move(basis);
  v.dim_v = static_cast<int>(v.basis.size());
  check_subspace(s, v, "make_subspace");
  return v;
}

void check_subspace(const Space& s, const LinSubspace& v, const char* who) {
  for (const auto& a : v.basis) check_point(s, a, who);
  check_stacked(s, stack_basis(s, v.basis), v.dim_v, who);
}

void check_subspace(const Space& s, const DualSubspace& v, const char* who) {
  for (const auto& d : v.basis) check_dual_point(s, d, who);
  check_stacked(s, stack_basis(s, v.basis), v.dim_v, who);
}

double bracket(const PdPoint& a, const DualPoint& bstar) {
  if (a.x.size() != bstar.ystar.size() || a.xstar.size() != bstar.ystarstar.size())
    throw ContractError("bracket: dimension mismatch");
  return a.x.dot(bstar.ystar) - a.xstar.dot(bstar.ystarstar);
}

double bracket_dual(const DualPoint& bstar, const PdPoint& b) {
  if (bstar.ystar.size() != b.x.size() || bstar.ystarstar.size() != b.xstar.size())
    throw ContractError("bracket_dual: dimension mismatch");
  return bstar.ystar.dot(b.x) - bstar.ystarstar.dot(b.xstar);
}

DualSubspace adjoint_subspace(const Space& s, const LinSubspace& v) {
  check_subspace(s, v, "adjoint_subspace");
  Mat k = bracket_kernel(s, stack_basis(s, v.basis));
  DualSubspace out;
  for (int j = 0; j < k.cols(); ++j)
    out.basis.push_back(DualPoint{k.col(j).head(s.dim), k.col(j).tail(s.dim)});
  out.dim_v = static_cast<int>(out.basis.size());
  if (out.dim_v != 2 * s.dim - v.dim_v)
    throw SolverError("adjoint_subspace: kernel dimension disagrees with rank count");
  return out;
}

LinSubspace double_adjoint(const Space& s, const DualSubspace& w) {
  check_subspace(s, w, "double_adjoint");
  Mat k = bracket_kernel(s, stack_basis(s, w.basis));
  LinSubspace out;
  for (int j = 0; j < k.cols(); ++j)
    out.basis.push_back(PdPoint{k.col(j).head(s.dim), k.col(j).tail(s.dim)});
  out.dim_v = static_cast<int>(out.basis.size());
  if (out.dim_v != 2 * s.dim - w.dim_v)
    throw SolverError("double_adjoint: kernel dimension disagrees with rank count");
  return out;
}

bool subspace_monotone(const Space& s, const LinSubspace& v) {
  check_subspace(s, v, "subspace_monotone");
  return span_form_psd(s, stack_basis(s, v.basis));
}

bool subspace_monotone(const Space& s, const DualSubspace& w) {
  check_subspace(s, w, "subspace_monotone");
  return span_form_psd(s, stack_basis(s, w.basis));
}

bool subspace_maximal_minty(const Space& s, const LinSubspace& v) {
  if (!s.is_l2())
    throw ContractError("subspace_maximal_minty: range criterion needs p = 2");
  if (!subspace_monotone(s, v))
    throw ContractError("subspace_maximal_minty: subspace is not monotone");
  return summed_projection_full_rank(s, stack_basis(s, v.basis));
}

bool subspace_maximal_minty(const Space& s, const DualSubspace& w) {
  if (!s.is_l2())
    throw ContractError("subspace_maximal_minty: range criterion needs p = 2");
  if (!subspace_monotone(s, w))
    throw ContractError("subspace_maximal_minty: subspace is not monotone");
  return summed_projection_full_rank(s, stack_basis(s, w.basis));
}

AdjointReport brezis_browder_check(const Space& s, const LinSubspace& v) {
  if (!s.is_l2())
    throw ContractError("brezis_browder_check: the maximality criterion needs p = 2");
  check_subspace(s, v, "brezis_browder_check");

  AdjointReport rep;
  DualSubspace va = adjoint_subspace(s, v);
  rep.vA_basis = va.basis;
  rep.v_monotone = subspace_monotone(s, v);
  rep.v_maximal = rep.v_monotone && subspace_maximal_minty(s, v);
  rep.vA_monotone = subspace_monotone(s, va);
  rep.vA_maximal = rep.vA_monotone && subspace_maximal_minty(s, va);
  rep.consistent_qqthm = (rep.vA_monotone == (rep.v_monotone && rep.v_maximal));
  return rep;
}

}  // namespace monokit
