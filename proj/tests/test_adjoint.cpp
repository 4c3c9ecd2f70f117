#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "monokit/adjoint.hpp"
#include "test_support.hpp"

using namespace monokit;

namespace {

Mat stack_pd(const std::vector<PdPoint>& pts, int n) {
  Mat m(2 * n, static_cast<Eigen::Index>(pts.size()));
  for (size_t j = 0; j < pts.size(); ++j) {
    m.col(static_cast<Eigen::Index>(j)).head(n) = pts[j].x;
    m.col(static_cast<Eigen::Index>(j)).tail(n) = pts[j].xstar;
  }
  return m;
}

int rank_of(const Mat& m) {
  if (m.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  qr.setThreshold(1e-9);
  return static_cast<int>(qr.rank());
}

bool same_span(const Mat& a, const Mat& b) {
  if (rank_of(a) != rank_of(b)) return false;
  Mat joint(a.rows(), a.cols() + b.cols());
  joint << a, b;
  return rank_of(joint) == rank_of(a);
}

// graph-with-vertical-part construction: x in span(U), x* = A x + w with
// w orthogonal to span(U); monotone by construction
LinSubspace random_monotone_subspace(Rng& rng, const Space& s, int du, int dw) {
  int n = s.dim;
  Mat base(n, du + dw);
  for (int j = 0; j < du + dw; ++j) base.col(j) = rng.uniform_vec(n, -1.0, 1.0);
  Eigen::HouseholderQR<Mat> qr(base);
  Mat on = qr.householderQ() * Mat::Identity(n, du + dw);
  auto a = testsup::random_monotone_linear(rng, n);
  std::vector<PdPoint> basis;
  for (int j = 0; j < du; ++j) {
    Vec u = on.col(j);
    // keep x* inside span(U) + W so that the vertical part stays orthogonal
    Vec proj = Vec::Zero(n);
    for (int t = 0; t < du + dw; ++t) proj += on.col(t).dot(a.matrix * u) * on.col(t);
    basis.push_back(PdPoint{u, proj});
  }
  for (int j = du; j < du + dw; ++j) basis.push_back(PdPoint{Vec::Zero(n), on.col(j)});
  return make_subspace(s, basis);
}

}  // namespace

TEST_CASE("bracket anchors and bilinearity") {
  PdPoint a{Vec::Constant(1, 1.0), Vec::Constant(1, 2.0)};
  DualPoint d{Vec::Constant(1, 3.0), Vec::Constant(1, 4.0)};
  CHECK(bracket(a, d) == doctest::Approx(-5.0));
  CHECK(bracket_dual(d, a) == doctest::Approx(-5.0));

  Rng rng(501);
  int n = 3;
  for (int it = 0; it < 100; ++it) {
    PdPoint u{rng.uniform_vec(n, -2.0, 2.0), rng.uniform_vec(n, -2.0, 2.0)};
    PdPoint v{rng.uniform_vec(n, -2.0, 2.0), rng.uniform_vec(n, -2.0, 2.0)};
    DualPoint w{rng.uniform_vec(n, -2.0, 2.0), rng.uniform_vec(n, -2.0, 2.0)};
    double al = rng.uniform(-2.0, 2.0), be = rng.uniform(-2.0, 2.0);
    CHECK(bracket(al * u + be * v, w) ==
          doctest::Approx(al * bracket(u, w) + be * bracket(v, w)).epsilon(1e-10));
    CHECK(bracket_dual(w, u) == doctest::Approx(bracket(u, w)).epsilon(1e-12));
  }
}

TEST_CASE("subspace construction validates the basis") {
  Space s{2, 2.0};
  std::vector<PdPoint> dep;
  dep.push_back(PdPoint{(Vec(2) << 1, 0).finished(), Vec::Zero(2)});
  dep.push_back(PdPoint{(Vec(2) << 2, 0).finished(), Vec::Zero(2)});
  CHECK_THROWS_AS(make_subspace(s, dep), ContractError);
  std::vector<PdPoint> ok;
  ok.push_back(PdPoint{(Vec(2) << 1, 0).finished(), Vec::Zero(2)});
  ok.push_back(PdPoint{(Vec(2) << 0, 1).finished(), Vec::Zero(2)});
  auto v = make_subspace(s, ok);
  CHECK(v.dim_v == 2);
}

TEST_CASE("adjoint of the diagonal is the dual diagonal") {
  for (int n : {1, 2, 3}) {
    Space s{n, 2.0};
    std::vector<PdPoint> basis;
    for (int i = 0; i < n; ++i) {
      Vec e = Vec::Zero(n);
      e(i) = 1.0;
      basis.push_back(PdPoint{e, e});
    }
    auto v = make_subspace(s, basis);
    auto w = adjoint_subspace(s, v);
    CHECK(w.dim_v == n);
    // every adjoint basis vector satisfies y* = y**
    for (const auto& d : w.basis) CHECK((d.ystar - d.ystarstar).norm() <= 1e-9);
    auto rep = brezis_browder_check(s, v);
    CHECK(rep.v_monotone);
    CHECK(rep.v_maximal);
    CHECK(rep.vA_monotone);
    CHECK(rep.vA_maximal);
    CHECK(rep.consistent_qqthm);
  }
}

TEST_CASE("adjoint of the vertical subspace is the horizontal one") {
  for (int n : {1, 2, 3}) {
    Space s{n, 2.0};
    std::vector<PdPoint> basis;
    for (int i = 0; i < n; ++i) {
      Vec e = Vec::Zero(n);
      e(i) = 1.0;
      basis.push_back(PdPoint{Vec::Zero(n), e});
    }
    auto v = make_subspace(s, basis);
    auto w = adjoint_subspace(s, v);
    CHECK(w.dim_v == n);
    for (const auto& d : w.basis) CHECK(d.ystarstar.norm() <= 1e-9);
    auto rep = brezis_browder_check(s, v);
    CHECK(rep.v_monotone);
    CHECK(rep.v_maximal);
    CHECK(rep.vA_monotone);
    CHECK(rep.vA_maximal);
    CHECK(rep.consistent_qqthm);
  }
}

TEST_CASE("adjoint of the zero subspace is everything, and is not monotone") {
  Space s{2, 2.0};
  auto v = make_subspace(s, {});
  CHECK(v.dim_v == 0);
  auto w = adjoint_subspace(s, v);
  CHECK(w.dim_v == 4);
  CHECK(subspace_monotone(s, v));
  CHECK_FALSE(subspace_maximal_minty(s, v));
  CHECK_FALSE(subspace_monotone(s, w));
  auto rep = brezis_browder_check(s, v);
  CHECK(rep.v_monotone);
  CHECK_FALSE(rep.v_maximal);
  CHECK_FALSE(rep.vA_monotone);
  CHECK(rep.consistent_qqthm);
}

TEST_CASE("double adjoint recovers the original span") {
  Rng rng(502);
  for (int n : {2, 3, 4}) {
    Space s{n, 2.0};
    for (int trial = 0; trial < 15; ++trial) {
      int k = 1 + static_cast<int>(rng.uniform(0.0, 2.0 * n - 0.001));
      std::vector<PdPoint> basis;
      Mat m(2 * n, k);
      for (int j = 0; j < k; ++j)
        m.col(j) = rng.uniform_vec(2 * n, -2.0, 2.0);
      // demand well-separated directions so both rank judgements agree
      Eigen::JacobiSVD<Mat> svd(m);
      if (svd.singularValues()(k - 1) < 1e-2) continue;
      for (int j = 0; j < k; ++j) basis.push_back(PdPoint{m.col(j).head(n), m.col(j).tail(n)});
      auto v = make_subspace(s, basis);
      auto w = adjoint_subspace(s, v);
      CHECK(w.dim_v == 2 * n - k);
      auto v2 = double_adjoint(s, w);
      CHECK(v2.dim_v == v.dim_v);
      CHECK(same_span(stack_pd(v.basis, n), stack_pd(v2.basis, n)));
      // the defining identity: the bracket vanishes across the pair
      for (const auto& bp : v.basis)
        for (const auto& d : w.basis) CHECK(std::abs(bracket(bp, d)) <= 1e-9);
    }
  }
}

TEST_CASE("graph subspaces of monotone matrices pass both directions") {
  Rng rng(503);
  for (int n : {2, 3, 5}) {
    Space s{n, 2.0};
    for (int trial = 0; trial < 10; ++trial) {
      auto a = testsup::random_monotone_linear(rng, n);
      std::vector<PdPoint> basis;
      for (int i = 0; i < n; ++i) {
        Vec e = Vec::Zero(n);
        e(i) = 1.0;
        basis.push_back(PdPoint{e, a.matrix * e});
      }
      auto v = make_subspace(s, basis);
      auto rep = brezis_browder_check(s, v);
      CHECK(rep.v_monotone);
      CHECK(rep.v_maximal);
      CHECK(rep.vA_monotone);
      CHECK(rep.vA_maximal);
      CHECK(rep.consistent_qqthm);
    }
  }
}

TEST_CASE("strict subspaces of maximal graphs break monotonicity of the adjoint") {
  Rng rng(504);
  for (int n : {2, 3, 4}) {
    Space s{n, 2.0};
    for (int trial = 0; trial < 12; ++trial) {
      int du = 1 + static_cast<int>(rng.uniform(0.0, n - 1.001));
      int dw = static_cast<int>(rng.uniform(0.0, n - du - 0.001));
      auto v = random_monotone_subspace(rng, s, du, dw);
      REQUIRE(subspace_monotone(s, v));
      bool maximal = subspace_maximal_minty(s, v);
      CHECK(maximal == (du + dw == n));
      auto rep = brezis_browder_check(s, v);
      CHECK(rep.consistent_qqthm);
      CHECK(rep.vA_monotone == maximal);
      if (rep.vA_monotone) CHECK(rep.vA_maximal);
    }
  }
}

TEST_CASE("non-monotone subspaces are consistent in the report") {
  Space s{2, 2.0};
  std::vector<PdPoint> basis;
  for (int i = 0; i < 2; ++i) {
    Vec e = Vec::Zero(2);
    e(i) = 1.0;
    basis.push_back(PdPoint{e, -e});  // graph of -I
  }
  auto v = make_subspace(s, basis);
  CHECK_FALSE(subspace_monotone(s, v));
  auto rep = brezis_browder_check(s, v);
  CHECK_FALSE(rep.v_monotone);
  CHECK_FALSE(rep.vA_monotone);
  CHECK(rep.consistent_qqthm);
  CHECK_THROWS_AS(subspace_maximal_minty(s, v), ContractError);
}

TEST_CASE("maximality criterion rejects p != 2") {
  Space s3{2, 3.0};
  std::vector<PdPoint> basis;
  for (int i = 0; i < 2; ++i) {
    Vec e = Vec::Zero(2);
    e(i) = 1.0;
    basis.push_back(PdPoint{e, e});
  }
  auto v = make_subspace(s3, basis);
  CHECK(subspace_monotone(s3, v));
  CHECK_THROWS_AS(subspace_maximal_minty(s3, v), ContractError);
  CHECK_THROWS_AS(brezis_browder_check(s3, v), ContractError);
}
