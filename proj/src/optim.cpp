#include "monokit/optim.hpp"

#include <cmath>
#include <limits>

#include "monokit/errors.hpp"

namespace monokit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

uint64_t Rng::next() {
  // splitmix64; fully specified, unlike std::uniform_real_distribution
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform(double lo, double hi) {
  double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

Vec Rng::uniform_vec(int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
  return v;
}

Vec Rng::simplex(int k) {
  Vec v(k);
  for (int i = 0; i < k; ++i) v[i] = -std::log(1.0 - uniform(0.0, 1.0));
  return v / v.sum();
}

NewtonResult minimize_newton(const std::function<double(const Vec&)>& f,
                             const std::function<Vec(const Vec&)>& grad, Vec x0,
                             int max_iters, double grad_tol) {
  const int d = static_cast<int>(x0.size());
  Vec x = x0;
  double fx = f(x);
  double lev = 1e-10;
  NewtonResult res;
  for (int iter = 0; iter < max_iters; ++iter) {
    res.iters = iter;
    Vec g = grad(x);
    if (g.norm() <= grad_tol) {
      res.converged = true;
      break;
    }
    Mat H(d, d);
    for (int j = 0; j < d; ++j) {
      double h = 1e-6 * (1.0 + std::abs(x[j]));
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      H.col(j) = (grad(xp) - grad(xm)) / (2.0 * h);
    }
    H = 0.5 * (H + H.transpose()).eval();

    Vec dir;
    bool descent = false;
    double shift = lev;
    for (int t = 0; t < 40 && !descent; ++t) {
      Eigen::LDLT<Mat> ldlt(H + shift * Mat::Identity(d, d));
      if (ldlt.info() == Eigen::Success) {
        dir = ldlt.solve(-g);
        if (g.dot(dir) < 0.0 && dir.allFinite()) descent = true;
      }
      if (!descent) shift = std::max(shift * 10.0, 1e-8);
    }
    if (!descent) dir = -g;

    double step = 1.0;
    double gd = g.dot(dir);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Vec xn = x + step * dir;
      double fn = f(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * gd) {
        double gain = fx - fn;
        x = xn;
        fx = fn;
        accepted = true;
        lev = std::max(1e-12, lev * 0.3);
        if (gain <= 1e-18 * (1.0 + std::abs(fx)) && g.norm() <= 1e-7) {
          res.converged = true;
          iter = max_iters;  // force exit
        }
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = g.norm() <= 1e-7;
      break;
    }
  }
  res.x = x;
  res.value = fx;
  if (!res.converged) {
    Vec g = grad(x);
    res.converged = g.norm() <= std::max(grad_tol, 1e-9 * (1.0 + std::abs(fx)));
  }
  return res;
}

GridResult grid_refine_min(const std::function<double(const Vec&)>& f, Vec lo, Vec hi,
                           int pts_per_axis, int levels) {
  const int d = static_cast<int>(lo.size());
  if (hi.size() != d || d < 1) throw ContractError("grid_refine_min: bad box");
  int pts = std::max(pts_per_axis, 2);
  GridResult res;
  Vec cur_lo = lo, cur_hi = hi;

  for (int level = 0; level < std::max(levels, 1); ++level) {
    std::vector<int> idx(d, 0);
    Vec cell = (cur_hi - cur_lo) / double(pts - 1);
    while (true) {
      Vec x(d);
      for (int j = 0; j < d; ++j) x[j] = cur_lo[j] + cell[j] * idx[j];
      double v = f(x);
      if (std::isfinite(v) && (!res.evaluated || v < res.value)) {
        res.evaluated = true;
        res.value = v;
        res.x = x;
      }
      int j = 0;
      while (j < d && ++idx[j] == pts) idx[j++] = 0;
      if (j == d) break;
    }
    if (!res.evaluated) return res;  // whole top-level grid outside the domain
    Vec half = 1.5 * cell;
    cur_lo = (res.x - half).cwiseMax(lo);
    cur_hi = (res.x + half).cwiseMin(hi);
  }

  // neighbor oscillation at the final resolution, for heuristic error margins
  Vec cell = (cur_hi - cur_lo) / double(pts - 1);
  for (int j = 0; j < d; ++j) {
    for (double sgn : {-1.0, 1.0}) {
      Vec x = res.x;
      x[j] += sgn * cell[j];
      double v = f(x);
      if (std::isfinite(v)) res.oscillation = std::max(res.oscillation, std::abs(v - res.value));
    }
  }
  return res;
}

SimplexQpResult simplex_qp_min(const Mat& H, const Vec& g) {
  const int k = static_cast<int>(H.rows());
  if (k < 1 || H.cols() != k || g.size() != k) throw ContractError("simplex_qp_min: bad sizes");
  if (k > 16) throw ContractError("simplex_qp_min: support enumeration capped at 16 vertices");
  const double scale = 1.0 + H.cwiseAbs().maxCoeff() + g.cwiseAbs().maxCoeff();

  SimplexQpResult best;
  bool have = false;
  SimplexQpResult fallback;
  bool have_fb = false;

  for (uint32_t mask = 1; mask < (1u << k); ++mask) {
    std::vector<int> S;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) S.push_back(i);
    const int sz = static_cast<int>(S.size());

    Mat K = Mat::Zero(sz + 1, sz + 1);
    Vec rhs(sz + 1);
    for (int a = 0; a < sz; ++a) {
      for (int b = 0; b < sz; ++b) K(a, b) = H(S[a], S[b]);
      K(a, sz) = 1.0;
      K(sz, a) = 1.0;
      rhs[a] = -g[S[a]];
    }
    rhs[sz] = 1.0;
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(K);
    Vec sol = cod.solve(rhs);
    if (!sol.allFinite()) continue;
    if ((K * sol - rhs).norm() > 1e-8 * scale) continue;

    Vec lam = Vec::Zero(k);
    for (int a = 0; a < sz; ++a) lam[S[a]] = sol[a];
    double nu = sol[sz];
    if (lam.minCoeff() < -1e-9) continue;
    lam = lam.cwiseMax(0.0);
    lam /= lam.sum();
    Vec grad_full = H * lam + g;
    bool dual_ok = true;
    for (int i = 0; i < k && dual_ok; ++i)
      if (!(mask & (1u << i)) && grad_full[i] + nu < -1e-8 * scale) dual_ok = false;

    double val = 0.5 * lam.dot(H * lam) + g.dot(lam);
    if (dual_ok) {
      if (!have || val < best.value) {
        best.lambda = lam;
        best.value = val;
        best.kkt_verified = true;
        have = true;
      }
    } else if (!have_fb || val < fallback.value) {
      fallback.lambda = lam;
      fallback.value = val;
      have_fb = true;
    }
  }
  if (have) return best;
  if (have_fb) return fallback;  // kkt_verified stays false
  throw SolverError("simplex_qp_min: no candidate survived verification");
}

SimplexSearchResult simplex_grid_min(int k, int grid,
                                     const std::function<double(const Vec&)>& f) {
  if (k < 1) throw ContractError("simplex_grid_min: k must be >= 1");
  SimplexSearchResult res;
  if (k == 1) {
    Vec one(1);
    one[0] = 1.0;
    double v = f(one);
    if (std::isfinite(v)) {
      res = {one, v, true};
    }
    return res;
  }
  grid = std::max(grid, 1);

  // composition enumeration, lexicographic
  std::vector<int> comp(k, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == k - 1) {
      comp[pos] = remaining;
      Vec lam(k);
      for (int i = 0; i < k; ++i) lam[i] = double(comp[i]) / double(grid);
      double v = f(lam);
      if (std::isfinite(v) && (!res.evaluated || v < res.value)) {
        res.evaluated = true;
        res.value = v;
        res.lambda = lam;
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      comp[pos] = c;
      rec(pos + 1, remaining - c);
    }
  };
  rec(0, grid);
  if (!res.evaluated) return res;

  // pairwise-transfer descent
  double step = 1.0 / double(grid);
  int evals = 0;
  while (step > 1e-7 && evals < 200000) {
    int bi = -1, bj = -1;
    double bv = res.value;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (i == j || res.lambda[j] < step) continue;
        Vec lam = res.lambda;
        lam[i] += step;
        lam[j] -= step;
        double v = f(lam);
        ++evals;
        if (std::isfinite(v) && v < bv) {
          bv = v;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi >= 0) {
      res.lambda[bi] += step;
      res.lambda[bj] -= step;
      res.value = bv;
    } else {
      step *= 0.5;
    }
  }
  return res;
}

ProxResult prox_max_affine(const std::vector<Vec>& s, const std::vector<double>& t,
                           const Vec& w) {
  const int k = static_cast<int>(s.size());
  if (k < 1 || t.size() != s.size()) throw ContractError("prox_max_affine: bad piece list");
  if (k > 16) throw ContractError("prox_max_affine: support enumeration capped at 16 pieces");
  double scale = 1.0 + w.norm();
  for (const Vec& si : s) scale = std::max(scale, 1.0 + si.squaredNorm());
  for (double ti : t) scale = std::max(scale, 1.0 + std::abs(ti));

  auto piece = [&](int i, const Vec& x) { return s[i].dot(x) + t[i]; };

  ProxResult best;
  bool have = false;
  for (uint32_t mask = 1; mask < (1u << k); ++mask) {
    std::vector<int> S;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) S.push_back(i);
    const int sz = static_cast<int>(S.size());

    // unknown weights mu on S: sum-to-one row plus equal-activity rows
    Mat K = Mat::Zero(sz, sz);
    Vec rhs = Vec::Zero(sz);
    for (int m = 0; m < sz; ++m) K(0, m) = 1.0;
    rhs[0] = 1.0;
    for (int l = 1; l < sz; ++l) {
      Vec dvec = s[S[0]] - s[S[l]];
      for (int m = 0; m < sz; ++m) K(l, m) = dvec.dot(s[S[m]]);
      rhs[l] = dvec.dot(w) + (t[S[0]] - t[S[l]]);
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(K);
    Vec mu = cod.solve(rhs);
    if (!mu.allFinite()) continue;
    if ((K * mu - rhs).norm() > 1e-8 * scale) continue;
    if (mu.minCoeff() < -1e-9) continue;

    Vec x = w;
    for (int m = 0; m < sz; ++m) x -= mu[m] * s[S[m]];
    double a0 = piece(S[0], x);
    bool ok = true;
    for (int l = 1; l < sz && ok; ++l)
      if (std::abs(piece(S[l], x) - a0) > 1e-7 * scale) ok = false;
    for (int i = 0; i < k && ok; ++i)
      if (!(mask & (1u << i)) && piece(i, x) > a0 + 1e-8 * scale) ok = false;
    if (!ok) continue;

    double maxv = piece(0, x);
    for (int i = 1; i < k; ++i) maxv = std::max(maxv, piece(i, x));
    double val = maxv + 0.5 * (x - w).squaredNorm();
    if (!have || val < best.value) {
      best.x = x;
      best.value = val;
      have = true;
    }
  }
  if (!have) throw SolverError("prox_max_affine: no KKT support verified");
  return best;
}

QuadMinResult minimize_exact_quadratic(const std::function<double(const Vec&)>& f, int d) {
  if (d < 1) throw ContractError("minimize_exact_quadratic: d must be >= 1");
  const double c = f(Vec::Zero(d));
  if (!std::isfinite(c)) throw ContractError("minimize_exact_quadratic: origin not in domain");
  Vec g(d);
  Mat H(d, d);
  Vec fp(d), fm(d);
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e[i] = 1.0;
    fp[i] = f(e);
    fm[i] = f(-e);
    g[i] = 0.5 * (fp[i] - fm[i]);
    H(i, i) = fp[i] + fm[i] - 2.0 * c;
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Vec e = Vec::Zero(d);
      e[i] = 1.0;
      e[j] = 1.0;
      double hij = f(e) - fp[i] - fp[j] + c;
      H(i, j) = hij;
      H(j, i) = hij;
    }
  }
  double scale = 1.0 + std::abs(c) + g.norm() + H.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const Vec& ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-7 * scale)
    throw SolverError("minimize_exact_quadratic: objective is not convex");
  Vec gt = es.eigenvectors().transpose() * g;
  Vec y(d);
  double null_tol = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (int i = 0; i < d; ++i) {
    if (ev[i] > null_tol) {
      y[i] = -gt[i] / ev[i];
    } else {
      if (std::abs(gt[i]) > 1e-7 * scale)
        throw SolverError("minimize_exact_quadratic: objective unbounded below");
      y[i] = 0.0;
    }
  }
  QuadMinResult res;
  res.x = es.eigenvectors() * y;
  res.value = f(res.x);
  return res;
}

}  // namespace monokit
