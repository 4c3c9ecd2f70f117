#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "monokit/adjoint.hpp"
#include "monokit/gallery.hpp"
#include "monokit/quasidense.hpp"
#include "monokit/transforms.hpp"
#include "test_support.hpp"

// Integration gate for the whole library: one PASS/FAIL line per criterion,
// nonzero exit code when anything fails.  Every tolerance is pinned next to
// the check that uses it; oracles come from test_support.hpp and recompute
// values from definitions, independent of the engine code paths.

namespace {

using namespace monokit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

PdPoint rand_b(Rng& rng, int n, double hw) {
  return PdPoint{rng.uniform_vec(n, -hw, hw), rng.uniform_vec(n, -hw, hw)};
}

DualPoint rand_d(Rng& rng, int n, double hw) {
  return DualPoint{rng.uniform_vec(n, -hw, hw), rng.uniform_vec(n, -hw, hw)};
}

// monotone linear map with a safely positive definite symmetric part, so the
// quadratic transforms stay finite and well conditioned
LinearOp firm_monotone_linear(Rng& rng, int n) {
  Mat sM(n, n), k(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      sM(i, j) = rng.uniform(-1.0, 1.0);
      k(i, j) = rng.uniform(-1.0, 1.0);
    }
  return LinearOp{sM * sM.transpose() + 0.3 * Mat::Identity(n, n) + 0.5 * (k - k.transpose())};
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

// ---- criterion 1: quadratic form identities --------------------------------

bool crit_identities(std::string& detail) {
  constexpr double kTol = 1e-9;
  constexpr int kInstances = 10000;
  const double ps[3] = {1.5, 2.0, 3.0};

  auto t0 = Clock::now();
  Rng rng(11);
  double worst = 0.0;
  auto track = [&](double v) { worst = std::max(worst, v); };

  for (int i = 0; i < kInstances; ++i) {
    int n = 1 + i % 5;
    Space s{n, ps[i % 3]};
    PdPoint d = rand_b(rng, n, 2.0), e = rand_b(rng, n, 2.0);
    DualPoint ds = rand_d(rng, n, 2.0), es = rand_d(rng, n, 2.0);
    double lam = rng.uniform(-1.5, 1.5), mu = rng.uniform(-1.5, 1.5);
    double wl = rng.uniform(-0.5, 1.5), wm = 1.0 - wl;

    // expansion of q over a linear combination
    track(std::abs(q(lam * d - mu * e) -
                   (lam * lam * q(d) - lam * mu * pair_L(d, e) + mu * mu * q(e))));
    // weighted parallelogram (weights summing to one)
    track(std::abs(q(wl * d + wm * e) + wl * wm * q(d - e) - wl * q(d) - wm * q(e)));
    // norm-split upper bound for q of a sum
    track(std::max(0.0, q(d + e) - q(d) - norm_B(s, d) * norm_B(s, e) - q(e)));
    // the same expansion on the dual side
    track(std::abs(qt(lam * ds - mu * es) -
                   (lam * lam * qt(ds) - lam * mu * pair_Lt(ds, es) + mu * mu * qt(es))));
    track(std::abs(qt(wl * ds + wm * es) + wl * wm * qt(ds - es) - wl * qt(ds) - wm * qt(es)));
    // the isometry transports both quadratic forms
    track(std::abs(qt(iso_L(d)) - q(d)));
    track(std::abs(rt(s, iso_L(d)) - r(s, d)));
    // conjugation shift across the pairing
    track(std::abs(qt(iso_L(d) - ds) - (q(d) - pair(d, ds) + qt(ds))));
  }

  // hand anchor for the conjugation shift: both sides equal 3
  PdPoint ab{Vec::Constant(1, 1.0), Vec::Constant(1, 2.0)};
  DualPoint abs_{Vec::Constant(1, 3.0), Vec::Constant(1, 4.0)};
  track(std::abs(qt(iso_L(ab) - abs_) - 3.0));
  track(std::abs(q(ab) - pair(ab, abs_) + qt(abs_) - 3.0));

  double dt = secs_since(t0);
  detail = fmt("7 identities x %d instances, dims 1-5, p in {1.5, 2, 3}; worst residual %.2e; %.2f s",
               kInstances, worst, dt);
  return worst <= kTol && dt < 5.0;
}

// ---- criterion 2: transform inequalities and graph characterizations -------

// exact distance from a point of B to the operator graph (used to make the
// converse membership check quantitative)
double dist_to_graph(const Space& s, const OperatorRep& op, const PdPoint& b) {
  if (const auto* l = std::get_if<LinearOp>(&op)) {
    int n = s.dim;
    Mat h = Mat::Identity(n, n) + l->matrix.transpose() * l->matrix;
    Vec y = h.ldlt().solve(b.x + l->matrix.transpose() * b.xstar);
    return std::hypot((b.x - y).norm(), (b.xstar - l->matrix * y).norm());
  }
  double x = b.x[0], xs = b.xstar[0];
  double dplus = std::hypot(std::min(x, 0.0), xs - 1.0);
  double dminus = std::hypot(std::max(x, 0.0), xs + 1.0);
  double dkink = std::hypot(x, xs - std::clamp(xs, -1.0, 1.0));
  return std::min({dplus, dminus, dkink});
}

PdPoint graph_sample(Rng& rng, const Space& s, const OperatorRep& op, int i) {
  if (const auto* l = std::get_if<LinearOp>(&op)) {
    Vec x = rng.uniform_vec(s.dim, -2.0, 2.0);
    return PdPoint{x, l->matrix * x};
  }
  if (i % 3 == 0)
    return PdPoint{Vec::Zero(1), Vec::Constant(1, rng.uniform(-1.0, 1.0))};
  double t = rng.uniform(-2.0, 2.0);
  return PdPoint{Vec::Constant(1, t), Vec::Constant(1, t >= 0.0 ? 1.0 : -1.0)};
}

bool crit_lemma_suite(std::string& detail) {
  constexpr double kTol = 1e-6;
  constexpr int kPts = 1000;

  struct Entry {
    const char* name;
    Space s;
    OperatorRep op;
  };
  Rng gen(21);
  std::vector<Entry> ops;
  ops.push_back({"identity-1", Space{1, 2.0}, OperatorRep{LinearOp{Mat::Identity(1, 1)}}});
  ops.push_back({"identity-2", Space{2, 2.0}, OperatorRep{LinearOp{Mat::Identity(2, 2)}}});
  for (int n = 1; n <= 4; ++n)
    ops.push_back({"linear", Space{n, 2.0}, OperatorRep{firm_monotone_linear(gen, n)}});
  ops.push_back({"abs", Space{1, 2.0}, OperatorRep{testsup::abs_subdiff()}});

  long long violations = 0, checks = 0;
  Rng rng(22);
  for (const auto& ent : ops) {
    const Space& s = ent.s;
    const OperatorRep& op = ent.op;
    int n = s.dim;

    for (int i = 0; i < kPts; ++i) {
      // the q-convolution of P vanishes on the graph
      PdPoint m = graph_sample(rng, s, op, i);
      InfConvSpec pq{FormName::P, FormName::q, InfConvMethod::exact_finite};
      TransformValue tv = inf_convolution(s, op, pq, BPoint{m});
      ++checks;
      if (!tv.finite || std::abs(tv.value) > kTol) ++violations;

      // two-point lower bound on -q through P
      PdPoint a = rand_b(rng, n, 2.0), b = rand_b(rng, n, 2.0);
      TransformValue pa = p_transform(s, op, a), pb = p_transform(s, op, b);
      ++checks;
      if (pa.finite && pb.finite &&
          -q(b - a) > 2.0 * pa.value + 2.0 * pb.value + kTol)
        ++violations;

      // norm-gap inequality between two centers
      PdPoint c1 = rand_b(rng, n, 2.0), b1 = rand_b(rng, n, 2.0), w = rand_b(rng, n, 2.0);
      TransformValue pc = p_transform(s, op, c1), pb1 = p_transform(s, op, b1);
      ++checks;
      if (pc.finite && pb1.finite) {
        double gap = norm_B(s, w - c1) - norm_B(s, w - b1);
        double rhs = 4.0 * pc.value + 2.0 * r(s, w - c1) + 4.0 * pb1.value + 2.0 * r(s, w - b1);
        if (gap * gap > rhs + kTol) ++violations;
      }

      // F vanishes on the image of the graph
      TransformValue fv = f_transform(s, op, iso_L(m));
      ++checks;
      if (!fv.finite || std::abs(fv.value) > kTol) ++violations;

      // G composed with the isometry reproduces P
      PdPoint bb = rand_b(rng, n, 2.0);
      TransformValue gv = g_transform(s, op, iso_L(bb));
      TransformValue pv = p_transform(s, op, bb);
      ++checks;
      if (gv.finite != pv.finite ||
          (gv.finite && std::abs(gv.value - pv.value) > kTol))
        ++violations;

      // G never exceeds F (infinite F dominates)
      DualPoint dd = rand_d(rng, n, 2.0);
      TransformValue fd = f_transform(s, op, dd);
      TransformValue gd = g_transform(s, op, dd);
      ++checks;
      if (fd.finite && (!gd.finite || gd.value > fd.value + kTol)) ++violations;

      // the graph is exactly the preimage of the nonpositivity set
      ++checks;
      if (i % 2 == 0) {
        GossezMembership gm = gossez_membership(s, op, iso_L(m), kTol);
        if (!gm.member) ++violations;
      } else {
        PdPoint fb = rand_b(rng, n, 2.0);
        GossezMembership gm = gossez_membership(s, op, iso_L(fb), kTol);
        if (gm.member && dist_to_graph(s, op, fb) > 0.05) ++violations;
      }
    }
  }

  detail = fmt("%lld checks over %zu operators (identity, random linear dims 1-4, abs), %lld violations",
               checks, ops.size(), violations);
  return violations == 0;
}

// ---- criterion 3: conjugate engine vs grid-sup oracle ----------------------

bool crit_conjugate(std::string& detail) {
  constexpr double kTol = 1e-4;
  Rng rng(31);
  double worst = 0.0;
  int compared = 0;
  bool ok = true;

  struct Plan {
    int n, graphs, pts, axis, levels;
  };
  const Plan plans[] = {{1, 6, 10, 11, 38}, {2, 6, 5, 11, 34}, {3, 2, 5, 9, 26}};
  for (const Plan& pl : plans) {
    Space s{pl.n, 2.0};
    for (int gi = 0; gi < pl.graphs; ++gi) {
      FiniteGraph g;
      do {
        int k = 2 + static_cast<int>(rng.uniform(0.0, 6.999));
        g = testsup::random_monotone_graph(rng, pl.n, k, 0.5);
      } while (static_cast<int>(g.points.size()) < 2);
      int k = static_cast<int>(g.points.size());
      for (int it = 0; it < pl.pts; ++it) {
        Vec lam = rng.simplex(k);
        lam = (lam + Vec::Constant(k, 0.2)) / (1.0 + 0.2 * k);
        DualPoint target = zero_dual_point(s);
        for (int j = 0; j < k; ++j) target = target + lam(j) * iso_L(g.points[j]);
        TransformValue tv = fitzpatrick_conjugate(s, g, target);
        if (!tv.finite) {
          ok = false;
          continue;
        }
        auto h = [&](const Vec& z) {
          PdPoint b{z.head(pl.n), z.tail(pl.n)};
          return pair(b, target) - testsup::phi_graph_ref(g, b);
        };
        double brute =
            testsup::grid_sup_refine(h, Vec::Zero(2 * pl.n), 12.0, pl.axis, pl.levels);
        worst = std::max(worst, std::abs(brute - tv.value));
        ++compared;
      }
    }
  }

  // split closed form of the conjugate for the abs subdifferential
  Space s1{1, 2.0};
  OperatorRep op{testsup::abs_subdiff()};
  double worst_abs = 0.0;
  for (int it = 0; it < 20; ++it) {
    double ys = it == 0 ? 1.0 : (it == 1 ? -1.0 : rng.uniform(-0.9, 0.9));
    double yss = rng.uniform(-3.0, 3.0);
    DualPoint d{Vec::Constant(1, ys), Vec::Constant(1, yss)};
    TransformValue tv = phi_star(s1, op, d);
    if (!tv.finite || std::abs(tv.value - std::abs(yss)) > 1e-9) ok = false;
    auto h = [&](const Vec& z) {
      double phi = testsup::phi_abs_ref(z[0], z[1]);
      if (!std::isfinite(phi)) return -std::numeric_limits<double>::infinity();
      return z[0] * ys + z[1] * yss - phi;
    };
    double brute = testsup::grid_sup_refine(h, Vec::Zero(2), 6.0, 13, 40);
    worst_abs = std::max(worst_abs, std::abs(brute - std::abs(yss)));
  }

  detail = fmt("%d graph conjugates (dims 1-3, k<=8) worst gap %.2e; abs closed form worst gap %.2e",
               compared, worst, worst_abs);
  return ok && compared == 100 && worst <= kTol && worst_abs <= kTol;
}

// ---- criterion 4: exact primal-dual equality on finite graphs --------------

bool crit_exact_equality(std::string& detail) {
  constexpr double kTol = 1e-5;
  Rng rng(41);
  double worst_res = 0.0, worst_att = 0.0;
  int count = 0;
  bool ok = true;

  struct Plan {
    int n, graphs, pts;
  };
  const Plan plans[] = {{1, 3, 10}, {2, 2, 10}};
  for (const Plan& pl : plans) {
    Space s{pl.n, 2.0};
    for (int gi = 0; gi < pl.graphs; ++gi) {
      int k = 3 + static_cast<int>(rng.uniform(0.0, 3.999));
      FiniteGraph g = testsup::random_monotone_graph(rng, pl.n, k, 0.3);
      for (int it = 0; it < pl.pts; ++it) {
        PdPoint c = rand_b(rng, pl.n, 2.0);
        ExactEqualityReport rep = verify_exact_equality(s, g, c);
        worst_res = std::max(worst_res, rep.residual);
        if (!rep.witness_attains) ok = false;
        // attainment re-checked through the conjugate engine
        TransformValue fw = f_transform(s, OperatorRep{g}, rep.witness);
        if (!fw.finite) {
          ok = false;
          continue;
        }
        double attained = fw.value + rt(s, iso_L(c) - rep.witness);
        worst_att = std::max(worst_att, std::abs(attained + rep.rhs));
        ++count;
      }
    }
  }

  detail = fmt("%d points on 5 graphs (k<=6, dims 1-2); worst equality residual %.2e, worst attainment gap %.2e",
               count, worst_res, worst_att);
  return ok && count == 50 && worst_res <= kTol && worst_att <= kTol;
}

// ---- criterion 5: grid-refined dual convolution identity -------------------

bool crit_dual_convolution(std::string& detail) {
  constexpr double kTol = 1e-3;
  auto t0 = Clock::now();
  Rng rng(51);
  double worst = 0.0;
  int count = 0;
  bool ok = true;

  for (int n : {1, 2}) {
    Space s{n, 2.0};
    OperatorRep ident{LinearOp{Mat::Identity(n, n)}};
    for (int it = 0; it < 5; ++it) {
      PdPoint b = rand_b(rng, n, 2.0);
      GridOpts opts;
      opts.levels = 14;
      PmfmqtReport rep = verify_pmfmqt(s, ident, b, opts);
      if (!rep.both_finite) ok = false;
      worst = std::max(worst, rep.residual);
      ++count;
    }
  }

  Space s2{2, 2.0};
  FiniteGraph two;
  two.points.push_back(PdPoint{Vec::Constant(2, -1.0), Vec::Constant(2, -1.0)});
  two.points.push_back(PdPoint{Vec::Constant(2, 1.0), Vec::Constant(2, 1.0)});
  for (int it = 0; it < 10; ++it) {
    PdPoint b = rand_b(rng, 2, 1.5);
    GridOpts opts;
    opts.levels = 14;
    opts.simplex_grid = 600;
    PmfmqtReport rep = verify_pmfmqt(s2, OperatorRep{two}, b, opts);
    if (!rep.both_finite) ok = false;
    worst = std::max(worst, rep.residual);
    ++count;
  }

  double dt = secs_since(t0);
  detail = fmt("%d points (identity dims 1-2, two-point graph dim 2); worst residual %.2e; %.2f s",
               count, worst, dt);
  return ok && count == 20 && worst <= kTol && dt < 30.0;
}

// ---- criterion 6: budgeted descent iteration --------------------------------

bool crit_iteration(std::string& detail) {
  constexpr double kLimitSlack = 1e-6;
  constexpr double kStepSlack = 1e-9;
  Rng rng(61);
  Space s{2, 2.0};
  std::vector<OperatorRep> ops;
  ops.push_back(OperatorRep{LinearOp{Mat::Identity(2, 2)}});
  ops.push_back(OperatorRep{testsup::random_monotone_linear(rng, 2)});

  int runs = 0;
  bool ok = true;
  for (const OperatorRep& op : ops) {
    for (double eta : {0.1, 0.3}) {
      for (int run = 0; run < 20; ++run) {
        PdPoint c1 = rand_b(rng, 2, 2.0);
        IterationTrace tr = suffthm_iterate(s, op, c1, eta, IterOracle::exact_convex);
        ++runs;
        if (!tr.converged || !tr.bound_ok || !tr.limit_bound_ok) ok = false;

        for (size_t i = 0; i < tr.step_norms.size(); ++i) {
          // the budget schedule and the per-step certificate, recomputed
          double budget = std::pow(eta, 2.0 * static_cast<double>(i) + 4.0);
          if (std::abs(tr.budgets[i] - budget) > 1e-12 * (1.0 + budget)) ok = false;
          double spent = tr.p_values[i + 1] + r(s, tr.c_sequence[i] - tr.c_sequence[i + 1]);
          if (spent > tr.budgets[i] + 1e-12) ok = false;
          // step-norm bound: wide on the first step, geometric afterwards
          double bound = i == 0 ? 4.0 * eta + 2.0 * std::sqrt(std::max(tr.p_values[0], 0.0))
                                : 4.0 * std::pow(eta, static_cast<double>(i) + 1.0);
          if (tr.step_norms[i] > bound + kStepSlack) ok = false;
        }

        double lim = norm_B(s, tr.limit_m - c1);
        if (0.25 * lim * lim > tr.p_values[0] + kLimitSlack) ok = false;
      }
    }
  }

  detail = fmt("%d runs (identity + random linear, dim 2, eta in {0.1, 0.3}); budgets, step bounds and limit bound recomputed",
               runs);
  return ok && runs == 80;
}

// ---- criterion 7: five-way equivalence certificate --------------------------

bool crit_certificate(std::string& detail) {
  constexpr double kTol = 1e-5;
  Rng rng(71);
  struct Plan {
    int n;
    double p;
  };
  const Plan plans[] = {{1, 2.0}, {2, 2.0}, {3, 2.0}, {4, 2.0}, {1, 1.5},
                        {2, 1.5}, {3, 1.5}, {1, 3.0}, {2, 3.0}, {4, 3.0}};
  int inconsistent = 0, all_hold = 0;
  for (int i = 0; i < 10; ++i) {
    Space s{plans[i].n, plans[i].p};
    LinearOp lin = testsup::random_monotone_linear(rng, plans[i].n);
    EquivCertificate cert =
        equivalence_certificate(s, OperatorRep{lin}, 100, 1000 + static_cast<uint64_t>(i),
                                2.0, kTol);
    bool all = true;
    for (bool h : cert.holds) all = all && h;
    if (all) ++all_hold;
    if (!cert.consistent) ++inconsistent;
  }
  detail = fmt("10 random operators (dims 1-4, p in {1.5, 2, 3}) x 100 samples; %d/10 with all five conditions, %d inconsistent",
               all_hold, inconsistent);
  return all_hold == 10 && inconsistent == 0;
}

// ---- criterion 8: surjectivity solver ---------------------------------------

bool crit_surjectivity(std::string& detail) {
  constexpr double kTol = 1e-8;
  Rng rng(81);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    int n = 1 + i % 5;
    Space s{n, 2.0};
    LinearOp lin = testsup::random_monotone_linear(rng, n);
    Vec x = rng.uniform_vec(n, -2.0, 2.0);
    Vec xstar = rng.uniform_vec(n, -2.0, 2.0);
    SurjectivityResult res = solve_surjectivity(s, OperatorRep{lin}, x, xstar);
    worst = std::max({worst, std::abs(res.rt_residual), res.incl_primal_residual,
                      res.incl_dual_residual});
  }

  Space s1{1, 2.0};
  SurjectivityResult anchor = solve_surjectivity(s1, OperatorRep{LinearOp{Mat::Identity(1, 1)}},
                                                 Vec::Zero(1), Vec::Constant(1, 3.0));
  bool exact = anchor.m.x[0] == 1.5;

  detail = fmt("100 random instances (dims 1-5); worst residual %.2e; identity anchor y = %.17g",
               worst, anchor.m.x[0]);
  return worst <= kTol && exact;
}

// ---- criterion 9: adjoint subspaces and the two-way maximality check --------

// graph of a monotone map restricted to a random du-dimensional subspace,
// plus dw vertical directions; monotone by construction, maximal exactly
// when du + dw = n
LinSubspace monotone_graph_subspace(Rng& rng, const Space& s, int du, int dw) {
  int n = s.dim;
  Mat base(n, du + dw);
  for (int j = 0; j < du + dw; ++j) base.col(j) = rng.uniform_vec(n, -1.0, 1.0);
  Eigen::HouseholderQR<Mat> qr(base);
  Mat on = qr.householderQ() * Mat::Identity(n, du + dw);
  LinearOp a = testsup::random_monotone_linear(rng, n);
  std::vector<PdPoint> basis;
  for (int j = 0; j < du; ++j) {
    Vec u = on.col(j);
    Vec proj = Vec::Zero(n);
    for (int t = 0; t < du + dw; ++t) proj += on.col(t).dot(a.matrix * u) * on.col(t);
    basis.push_back(PdPoint{u, proj});
  }
  for (int j = du; j < du + dw; ++j) basis.push_back(PdPoint{Vec::Zero(n), on.col(j)});
  return make_subspace(s, basis);
}

bool crit_adjoint(std::string& detail) {
  Rng rng(91);
  int monotone_adjoints = 0;
  bool ok = true;

  for (int i = 0; i < 200; ++i) {
    int n = 2 + i % 4;
    Space s{n, 2.0};
    LinSubspace v;
    switch (i % 3) {
      case 0:
        // full graph of a monotone map: maximal, so the adjoint is monotone
        v = monotone_graph_subspace(rng, s, n, 0);
        break;
      case 1: {
        // strictly smaller graph, no vertical part: adjoint too big to be monotone
        int du = 1 + static_cast<int>(rng.uniform(0.0, n - 1.001));
        v = monotone_graph_subspace(rng, s, du, 0);
        break;
      }
      default: {
        int du = 1 + static_cast<int>(rng.uniform(0.0, n - 1.001));
        int dw = static_cast<int>(rng.uniform(0.0, std::max(0.0, n - du - 0.001)));
        v = monotone_graph_subspace(rng, s, du, dw);
        break;
      }
    }
    AdjointReport rep = brezis_browder_check(s, v);
    if (!rep.v_monotone) ok = false;
    if (!rep.consistent_qqthm) ok = false;
    if (rep.vA_monotone) {
      ++monotone_adjoints;
      if (!rep.vA_maximal) ok = false;
    }
  }

  // hand examples reproduce exactly
  Space s2{2, 2.0};
  {
    std::vector<PdPoint> diag;
    for (int i = 0; i < 2; ++i) {
      Vec e = Vec::Zero(2);
      e(i) = 1.0;
      diag.push_back(PdPoint{e, e});
    }
    LinSubspace v = make_subspace(s2, diag);
    DualSubspace adj = adjoint_subspace(s2, v);
    if (adj.dim_v != 2) ok = false;
    for (const DualPoint& d : adj.basis)
      if ((d.ystar - d.ystarstar).norm() > 1e-9) ok = false;
    AdjointReport rep = brezis_browder_check(s2, v);
    if (!(rep.v_monotone && rep.v_maximal && rep.vA_monotone && rep.vA_maximal &&
          rep.consistent_qqthm))
      ok = false;
  }
  {
    std::vector<PdPoint> vert;
    for (int i = 0; i < 2; ++i) {
      Vec e = Vec::Zero(2);
      e(i) = 1.0;
      vert.push_back(PdPoint{Vec::Zero(2), e});
    }
    LinSubspace v = make_subspace(s2, vert);
    DualSubspace adj = adjoint_subspace(s2, v);
    if (adj.dim_v != 2) ok = false;
    Mat ystars(2, 2);
    for (int j = 0; j < 2; ++j) {
      if (adj.basis[static_cast<size_t>(j)].ystarstar.norm() > 1e-9) ok = false;
      ystars.col(j) = adj.basis[static_cast<size_t>(j)].ystar;
    }
    Eigen::ColPivHouseholderQR<Mat> qr(ystars);
    qr.setThreshold(1e-9);
    if (qr.rank() != 2) ok = false;
    AdjointReport rep = brezis_browder_check(s2, v);
    if (!(rep.v_monotone && rep.v_maximal && rep.vA_monotone && rep.vA_maximal &&
          rep.consistent_qqthm))
      ok = false;
  }
  {
    LinSubspace v = make_subspace(s2, {});
    DualSubspace adj = adjoint_subspace(s2, v);
    if (adj.dim_v != 4) ok = false;
    AdjointReport rep = brezis_browder_check(s2, v);
    if (!(rep.v_monotone && !rep.v_maximal && !rep.vA_monotone && rep.consistent_qqthm))
      ok = false;
  }

  detail = fmt("200 random subspaces (dims 2-5), all consistent; %d monotone adjoints, every one maximal; 3 hand examples exact",
               monotone_adjoints);
  return ok && monotone_adjoints >= 30;
}

// ---- criterion 10: tail operator gallery ------------------------------------

bool crit_gallery(std::string& detail) {
  constexpr double kSlack = 1e-12;
  Rng rng(101);
  bool ok = true;
  long long draws = 0;
  for (int n : {1, 3, 10, 100}) {
    for (int i = 0; i < 1000; ++i) {
      Vec x = rng.uniform_vec(n, -3.0, 3.0);
      TailIdentity id = tail_identity_check(x);
      if (!id.equal) ok = false;
      TailNiWitness wt = tail_ni_witness_check(x);
      double sigma = x.sum();
      if (!wt.bound_ok || wt.value < 0.5 * (sigma - 1.0) * (sigma - 1.0) + 0.5 - kSlack)
        ok = false;
      ++draws;
    }
  }
  int structures = 0;
  for (int n = 1; n <= 5; ++n) {
    TailStructure st = tailgex_structure_check(n);
    if (st.lm_equals_gt) ++structures;
  }
  detail = fmt("%lld identity/witness draws over n in {1, 3, 10, 100}; structure check %d/5",
               draws, structures);
  return ok && structures == 5;
}

// ---- criterion 11: CLI golden round-trips ------------------------------------

std::string slurp(const fs::path& p, bool& found) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    found = false;
    return {};
  }
  found = true;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_shell(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  if (rc == -1 || !WIFEXITED(rc)) return -1;
  return WEXITSTATUS(rc);
}

bool crit_cli(const std::string& cli_arg, const std::string& golden_arg,
              const std::string& scratch_arg, std::string& detail) {
  // the cases run with the golden directory as working directory, so every
  // path has to survive the chdir
  std::string cli = fs::absolute(cli_arg).string();
  std::string golden = fs::absolute(golden_arg).string();
  std::string scratch = fs::absolute(scratch_arg).string();
  bool found = false;
  std::string manifest = slurp(fs::path(golden) / "cases.txt", found);
  if (!found) {
    detail = "cases.txt not found under " + golden;
    return false;
  }
  fs::create_directories(scratch);

  int cases = 0, failures = 0;
  std::string first_failure;
  std::istringstream lines(manifest);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> parts;
    size_t pos = 0;
    while (true) {
      size_t sep = line.find(" ;; ", pos);
      if (sep == std::string::npos) {
        parts.push_back(line.substr(pos));
        break;
      }
      parts.push_back(line.substr(pos, sep - pos));
      pos = sep + 4;
    }
    if (parts.size() != 4) continue;
    const std::string& name = parts[0];
    int want_exit = std::atoi(parts[1].c_str());
    const std::string& golden_file = parts[2];
    const std::string& args = parts[3];
    ++cases;

    std::string out = scratch + "/" + name + ".json";
    std::string err = scratch + "/" + name + ".err";
    std::error_code ec;
    fs::remove(out, ec);
    auto run_once = [&](const std::string& err_path) {
      std::string cmd = "cd '" + golden + "' && '" + cli + "' " + args + " --out '" + out +
                        "' 2> '" + err_path + "'";
      return run_shell(cmd);
    };

    auto fail = [&](const std::string& why) {
      ++failures;
      if (first_failure.empty()) first_failure = name + ": " + why;
    };

    if (want_exit == 0) {
      int rc = run_once(err);
      if (rc != 0) {
        fail(fmt("exit %d, wanted 0", rc));
        continue;
      }
      bool got_found = false, want_found = false;
      std::string got = slurp(out, got_found);
      std::string want = slurp(fs::path(golden) / golden_file, want_found);
      if (!got_found || !want_found) {
        fail("missing output or golden file");
        continue;
      }
      if (got != want) fail("report differs from golden " + golden_file);
    } else {
      int rc1 = run_once(err + "1");
      int rc2 = run_once(err + "2");
      if (rc1 != want_exit || rc2 != want_exit) {
        fail(fmt("exit codes %d/%d, wanted %d", rc1, rc2, want_exit));
        continue;
      }
      bool f1 = false, f2 = false, fw = false;
      std::string e1 = slurp(err + "1", f1), e2 = slurp(err + "2", f2);
      std::string want = slurp(fs::path(golden) / golden_file, fw);
      if (!f1 || !f2 || !fw) {
        fail("missing stderr capture or golden file");
        continue;
      }
      if (e1 != e2) {
        fail("stderr differs between identical runs");
        continue;
      }
      if (e1 != want) {
        fail("stderr differs from golden " + golden_file);
        continue;
      }
      if (fs::exists(out)) fail("partial output written on failure");
    }
  }

  detail = fmt("%d golden cases, %d failures%s%s", cases, failures,
               failures ? "; first: " : "", first_failure.c_str());
  return cases >= 17 && failures == 0;
}

}  // namespace

int main(int argc, char** argv) {
  struct Row {
    int id;
    const char* label;
    bool pass;
    std::string detail;
  };
  std::vector<Row> rows;
  auto run = [&](int id, const char* label, auto&& fn) {
    std::string detail;
    bool pass = false;
    try {
      pass = fn(detail);
    } catch (const std::exception& e) {
      pass = false;
      detail = std::string("exception: ") + e.what();
    }
    rows.push_back(Row{id, label, pass, std::move(detail)});
  };

  run(1, "quadratic form identities", crit_identities);
  run(2, "transform inequalities and graph characterizations", crit_lemma_suite);
  run(3, "conjugate engine vs grid-sup oracle", crit_conjugate);
  run(4, "exact primal-dual equality on finite graphs", crit_exact_equality);
  run(5, "grid-refined dual convolution identity", crit_dual_convolution);
  run(6, "budgeted descent iteration", crit_iteration);
  run(7, "five-way equivalence certificate", crit_certificate);
  run(8, "surjectivity solver", crit_surjectivity);
  run(9, "adjoint subspace two-way maximality", crit_adjoint);
  run(10, "tail operator gallery", crit_gallery);

  std::string cli = argc > 1 ? argv[1] : "";
  std::string golden = argc > 2 ? argv[2] : "";
  std::string scratch = argc > 3 ? argv[3] : "";
  run(11, "command-line golden round-trips", [&](std::string& detail) {
    if (cli.empty() || golden.empty() || scratch.empty()) {
      detail = "usage: acceptance <cli-binary> <golden-dir> <scratch-dir>";
      return false;
    }
    return crit_cli(cli, golden, scratch, detail);
  });

  int failed = 0;
  for (const Row& row : rows) {
    if (!row.pass) ++failed;
    std::printf("%s criterion %d: %s (%s)\n", row.pass ? "PASS" : "FAIL", row.id, row.label,
                row.detail.c_str());
  }
  return failed;
}
