#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "monokit/quasidense.hpp"
#include "test_support.hpp"

using namespace monokit;

namespace {

PdPoint rand_b(Rng& rng, int n, double w = 3.0) {
  return PdPoint{rng.uniform_vec(n, -w, w), rng.uniform_vec(n, -w, w)};
}

}  // namespace

TEST_CASE("quasidensity gap vanishes for maximal operators at p = 2") {
  Rng rng(401);
  for (int n : {1, 2, 4}) {
    Space s{n, 2.0};
    auto lin = testsup::random_monotone_linear(rng, n);
    for (int it = 0; it < 30; ++it) {
      PdPoint b = rand_b(rng, n);
      CHECK(quasidensity_gap(s, OperatorRep{lin}, b) <= 1e-12);
    }
  }
  Space s1{1, 2.0};
  for (int it = 0; it < 20; ++it) {
    Rng rng2(402 + it);
    PdPoint b = rand_b(rng2, 1);
    CHECK(quasidensity_gap(s1, OperatorRep{testsup::abs_subdiff()}, b) <= 1e-12);
  }
  // a bounded graph leaves a strictly positive gap at distant points
  FiniteGraph g;
  g.points.push_back(PdPoint{Vec::Zero(1), Vec::Zero(1)});
  PdPoint far{Vec::Constant(1, 5.0), Vec::Constant(1, 5.0)};
  CHECK(quasidensity_gap(s1, OperatorRep{g}, far) > 1.0);
}

TEST_CASE("equivalence certificate is consistent on maximal linear operators") {
  Rng rng(403);
  for (int n : {1, 2, 3}) {
    Space s{n, 2.0};
    auto lin = testsup::random_monotone_linear(rng, n);
    auto cert = equivalence_certificate(s, OperatorRep{lin}, 40, 17);
    CHECK(cert.consistent);
    for (bool h : cert.holds) CHECK(h);
    CHECK(cert.cond_a_gap_max <= cert.tol);
    CHECK(cert.cond_b_min_g >= -cert.tol);
    CHECK(cert.cond_c_min_f >= -cert.tol);
    CHECK(cert.cond_d_max_pboxr <= cert.tol);
    CHECK(cert.cond_e_min_fboxrt >= -cert.tol);
    CHECK(static_cast<int>(cert.samples_primal.size()) == 40);
  }
}

TEST_CASE("equivalence certificate at p != 2 still agrees for linear operators") {
  Rng rng(404);
  for (double p : {1.5, 3.0}) {
    Space s{2, p};
    auto lin = testsup::random_monotone_linear(rng, 2);
    auto cert = equivalence_certificate(s, OperatorRep{lin}, 15, 29);
    CHECK(cert.consistent);
    for (bool h : cert.holds) CHECK(h);
  }
}

TEST_CASE("equivalence certificate is deterministic in the seed") {
  Space s{2, 2.0};
  Rng rng(405);
  auto lin = testsup::random_monotone_linear(rng, 2);
  auto c1 = equivalence_certificate(s, OperatorRep{lin}, 25, 99);
  auto c2 = equivalence_certificate(s, OperatorRep{lin}, 25, 99);
  CHECK(c1.cond_a_gap_max == c2.cond_a_gap_max);
  CHECK(c1.cond_b_min_g == c2.cond_b_min_g);
  CHECK(c1.cond_c_min_f == c2.cond_c_min_f);
  CHECK(c1.cond_d_max_pboxr == c2.cond_d_max_pboxr);
  CHECK(c1.cond_e_min_fboxrt == c2.cond_e_min_fboxrt);
}

TEST_CASE("equivalence certificate flags finite graphs as non-maximal data") {
  Space s{1, 2.0};
  FiniteGraph g;
  g.points.push_back(PdPoint{Vec::Zero(1), Vec::Zero(1)});
  g.points.push_back(PdPoint{Vec::Constant(1, 1.0), Vec::Constant(1, 1.0)});
  auto cert = equivalence_certificate(s, OperatorRep{g}, 10, 3);
  REQUIRE(cert.warning.has_value());
  // condition (a) must fail: far samples keep a positive resolvent distance
  CHECK_FALSE(cert.holds[0]);
}

TEST_CASE("certificate rejects non-monotone input") {
  Space s{2, 2.0};
  Mat neg = -Mat::Identity(2, 2);
  CHECK_THROWS_AS(equivalence_certificate(s, OperatorRep{LinearOp{neg}}, 5, 1), ContractError);
  Rng rng(406);
  auto lin = testsup::random_monotone_linear(rng, 2);
  CHECK_THROWS_AS(equivalence_certificate(s, OperatorRep{lin}, 0, 1), ContractError);
}

TEST_CASE("budgeted iteration on the identity converges with certified steps") {
  Space s{2, 2.0};
  OperatorRep ident{LinearOp{Mat::Identity(2, 2)}};
  Rng rng(407);
  for (double eta : {0.1, 0.3}) {
    for (int run = 0; run < 5; ++run) {
      PdPoint c1 = rand_b(rng, 2, 2.0);
      auto trace = suffthm_iterate(s, ident, c1, eta, IterOracle::exact_convex);
      CHECK(trace.converged);
      CHECK(trace.bound_ok);
      CHECK(trace.limit_bound_ok);
      CHECK(trace.limit_residual <= 1e-8);
      REQUIRE(trace.step_norms.size() == trace.budgets.size());
      double p1 = trace.p_values.front();
      for (size_t i = 0; i < trace.step_norms.size(); ++i) {
        double bound = (i == 0) ? 4.0 * eta + 2.0 * std::sqrt(std::max(p1, 0.0))
                                : 4.0 * std::pow(eta, static_cast<double>(i + 1));
        CHECK(trace.step_norms[i] <= bound + 1e-9);
      }
      // p decays under the budget sequence
      for (size_t i = 1; i < trace.p_values.size(); ++i)
        CHECK(trace.p_values[i] < std::pow(eta, 2.0 * static_cast<double>(i) + 2.0));
      double lim_gap = 0.25 * norm_B(s, trace.limit_m - c1) * norm_B(s, trace.limit_m - c1);
      CHECK(lim_gap <= p1 + 1e-6);
    }
  }
}

TEST_CASE("budgeted iteration with the candidate oracle on a graph") {
  // P(c1) = -(t - y)(t - y*) maxed over graph slots t; with t = 0.5 strictly
  // between the coordinates of c1 the step lands exactly on the graph
  Space s{1, 2.0};
  FiniteGraph g;
  for (double t : {-2.0, -1.0, 0.5, 1.0, 2.0})
    g.points.push_back(PdPoint{Vec::Constant(1, t), Vec::Constant(1, t)});
  PdPoint c1{Vec::Constant(1, 0.6), Vec::Constant(1, 0.4)};
  auto trace = suffthm_iterate(s, OperatorRep{g}, c1, 0.3, IterOracle::candidate_set);
  CHECK(trace.p_values.front() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(trace.converged);
  CHECK(trace.bound_ok);
  CHECK(trace.limit_bound_ok);
  REQUIRE(!trace.step_norms.empty());
  CHECK(trace.limit_residual <= 1e-12);
  CHECK(trace.limit_m.x(0) == doctest::Approx(0.5));
  REQUIRE(trace.warning.has_value());
}

TEST_CASE("budgeted iteration flags negative P immediately on a sparse sample") {
  // between graph slots P goes negative; the trace stops at once and the
  // residual field shows the limit is NOT a graph point
  Space s{1, 2.0};
  FiniteGraph g;
  for (double t : {-2.0, -1.0, 0.0, 1.0, 2.0})
    g.points.push_back(PdPoint{Vec::Constant(1, t), Vec::Constant(1, t)});
  PdPoint c1{Vec::Constant(1, 0.4), Vec::Constant(1, 0.6)};
  auto trace = suffthm_iterate(s, OperatorRep{g}, c1, 0.3, IterOracle::candidate_set);
  CHECK(trace.p_values.front() < 0.0);
  CHECK(trace.converged);
  CHECK(trace.step_norms.empty());
  CHECK(trace.limit_residual > 0.1);
}

TEST_CASE("budgeted iteration fails honestly when the graph cannot meet a budget") {
  // P(c1) = 3 but every candidate keeps P + r above the first budget
  Space s{1, 2.0};
  FiniteGraph g;
  g.points.push_back(PdPoint{Vec::Constant(1, 3.0), Vec::Constant(1, 3.0)});
  PdPoint c1{Vec::Constant(1, 4.0), Vec::Constant(1, 0.0)};
  CHECK_THROWS_AS(suffthm_iterate(s, OperatorRep{g}, c1, 0.1, IterOracle::candidate_set),
                  SolverError);
}

TEST_CASE("iteration input contracts") {
  Space s{1, 2.0};
  OperatorRep ident{LinearOp{Mat::Identity(1, 1)}};
  PdPoint c1 = zero_point(s);
  CHECK_THROWS_AS(suffthm_iterate(s, ident, c1, 0.0), ContractError);
  CHECK_THROWS_AS(suffthm_iterate(s, ident, c1, 1.0), ContractError);
  CHECK_THROWS_AS(suffthm_iterate(s, ident, c1, 0.5, IterOracle::exact_convex, 0), ContractError);
  Space s3{1, 3.0};
  CHECK_THROWS_AS(suffthm_iterate(s3, ident, c1, 0.5, IterOracle::exact_convex), ContractError);
}

TEST_CASE("eight-way report at a member point") {
  Space s{1, 2.0};
  OperatorRep ident{LinearOp{Mat::Identity(1, 1)}};
  DualPoint on{Vec::Constant(1, 1.0), Vec::Constant(1, 1.0)};
  GridOpts opts;
  opts.levels = 12;
  auto rep = eqthm_report(s, ident, on, opts);
  CHECK(rep.member);
  CHECK_FALSE(rep.hard_failure);
  for (const auto& c : rep.conditions) {
    if (c.evaluated) CHECK(c.holds);
    if (c.name == "a" || c.name == "b" || c.name == "e" || c.name == "f") {
      CHECK(c.evaluated);
      CHECK(c.exact);
    } else {
      CHECK_FALSE(c.exact);
    }
  }
}

TEST_CASE("eight-way report at a non-member point") {
  Space s{1, 2.0};
  OperatorRep ident{LinearOp{Mat::Identity(1, 1)}};
  DualPoint off{Vec::Constant(1, 2.0), Vec::Constant(1, 0.0)};
  GridOpts opts;
  opts.levels = 12;
  auto rep = eqthm_report(s, ident, off, opts);
  CHECK_FALSE(rep.member);
  CHECK_FALSE(rep.hard_failure);
  for (const auto& c : rep.conditions)
    if (c.evaluated && c.exact) CHECK_FALSE(c.holds);
  // G((2,0)) = sup_x [-(x-2)x] = 1 exactly
  for (const auto& c : rep.conditions)
    if (c.name == "b") CHECK(c.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("eight-way report on a graph point of a dense subdifferential") {
  Space s{1, 2.0};
  OperatorRep op{testsup::abs_subdiff()};
  DualPoint on{Vec::Constant(1, 1.0), Vec::Constant(1, 2.0)};  // L(2, 1)
  auto rep = eqthm_report(s, op, on);
  CHECK(rep.member);
  CHECK_FALSE(rep.hard_failure);
}

TEST_CASE("surjectivity solver matches the closed-form identity case") {
  Space s{1, 2.0};
  OperatorRep ident{LinearOp{Mat::Identity(1, 1)}};
  auto res = solve_surjectivity(s, ident, Vec::Zero(1), Vec::Constant(1, 3.0));
  CHECK(res.m.x(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(res.rt_residual <= 1e-12);
  CHECK(res.incl_primal_residual <= 1e-9);
  CHECK(res.incl_dual_residual <= 1e-9);
}

TEST_CASE("surjectivity solver on random monotone linear operators") {
  Rng rng(408);
  for (int n : {1, 2, 3, 5}) {
    Space s{n, 2.0};
    auto lin = testsup::random_monotone_linear(rng, n);
    for (int it = 0; it < 10; ++it) {
      Vec x = rng.uniform_vec(n, -3.0, 3.0);
      Vec xs = rng.uniform_vec(n, -3.0, 3.0);
      auto res = solve_surjectivity(s, OperatorRep{lin}, x, xs);
      CHECK(res.rt_residual <= 1e-10);
      CHECK(res.incl_primal_residual <= 1e-8);
      CHECK(res.incl_dual_residual <= 1e-8);
      // the witness really lies on the operator graph
      CHECK((lin.matrix * res.m.x - res.m.xstar).norm() <= 1e-8);
      // and solves x* in S y + J(y - x) shifted form: x + x* = y + S y
      CHECK((res.m.x + res.m.xstar - x - xs).norm() <= 1e-8);
    }
  }
}

TEST_CASE("surjectivity solver contracts") {
  Space s{1, 2.0};
  FiniteGraph g;
  g.points.push_back(PdPoint{Vec::Zero(1), Vec::Zero(1)});
  CHECK_THROWS_AS(solve_surjectivity(s, OperatorRep{g}, Vec::Zero(1), Vec::Zero(1)),
                  ContractError);
  Space s3{1, 3.0};
  OperatorRep ident{LinearOp{Mat::Identity(1, 1)}};
  CHECK_THROWS_AS(solve_surjectivity(s3, ident, Vec::Zero(1), Vec::Zero(1)), ContractError);
  Mat neg = -Mat::Identity(1, 1);
  CHECK_THROWS_AS(solve_surjectivity(s, OperatorRep{LinearOp{neg}}, Vec::Zero(1), Vec::Zero(1)),
                  ContractError);
}
