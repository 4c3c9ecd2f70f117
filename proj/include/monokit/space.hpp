#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

// Core geometry: a finite-dimensional space E = R^n carrying an lp norm
// (1 < p < inf), its dual E* with the conjugate exponent, and the product
// B = E x E* with norm ||(x,x*)|| = sqrt(||x||^2 + ||x*||^2).  Points of the
// dual product B* = E* x E** are kept as their own type even though E** is
// identified with E here; the identification is a deliberate design choice
// for the finite-dimensional setting (see the project ledger).

namespace monokit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Side { primal, dual };

struct Space {
  int dim = 0;
  double p = 2.0;

  Space() = default;
  Space(int dim_, double p_) : dim(dim_), p(p_) {
    if (dim < 1) throw std::invalid_argument("Space: dim must be >= 1");
    if (!(p > 1.0) || !std::isfinite(p))
      throw std::invalid_argument("Space: p must lie in (1, inf)");
  }

  static Space l2(int dim_) { return Space(dim_, 2.0); }

  // conjugate exponent, 1/p + 1/p' = 1
  double dual_p() const { return p / (p - 1.0); }
  bool is_l2() const { return p == 2.0; }
};

// point of B = E x E*
struct PdPoint {
  Vec x;
  Vec xstar;
};

// point of B* = E* x E**
struct DualPoint {
  Vec ystar;
  Vec ystarstar;
};

PdPoint operator+(const PdPoint& a, const PdPoint& b);
PdPoint operator-(const PdPoint& a, const PdPoint& b);
PdPoint operator*(double s, const PdPoint& a);
DualPoint operator+(const DualPoint& a, const DualPoint& b);
DualPoint operator-(const DualPoint& a, const DualPoint& b);
DualPoint operator*(double s, const DualPoint& a);

PdPoint zero_point(const Space& s);
DualPoint zero_dual_point(const Space& s);

void check_point(const Space& s, const PdPoint& b, const char* who);
void check_dual_point(const Space& s, const DualPoint& d, const char* who);

// ||v||_p
double lp_norm(const Vec& v, double p);

// norm of a vector living on the stated side (primal: exponent p, dual: p')
double norm(const Space& s, const Vec& v, Side side);

// Duality map of the lp norm, single-valued for p in (1, inf):
//   w_i = ||z||_p^{2-p} |z_i|^{p-1} sign(z_i),  w = 0 when z = 0.
// Satisfies <z, w> = ||z||_p^2 and ||w||_{p'} = ||z||_p.  The dual-side map
// uses p' and lands back in E.
Vec duality_map(const Space& s, const Vec& z, Side side);

// coupling q(b) = <x, x*>
double q(const PdPoint& b);

// L : B -> B*, (x, x*) |-> (x*, x)
DualPoint iso_L(const PdPoint& b);

// Lt : B* -> B** = B, (y*, y**) |-> (y**, y*)
PdPoint iso_Lt(const DualPoint& d);

// reflection rho(y*, y**) = (y*, -y**)
DualPoint reflect(const DualPoint& d);

// canonical pairing <b, bstar> = <x, y*> + <x*, y**>
double pair(const PdPoint& b, const DualPoint& bstar);

// <b, L c>, bilinear and symmetric in b, c
double pair_L(const PdPoint& b, const PdPoint& c);

// <d, Lt e> on the dual side, symmetric as well
double pair_Lt(const DualPoint& d, const DualPoint& e);

double qt(const DualPoint& d);

double norm_B(const Space& s, const PdPoint& b);
double norm_Bstar(const Space& s, const DualPoint& d);

// r = (1/2)||.||^2 + q on B; nonnegative, and r(b) <= ||b||^2
double r(const Space& s, const PdPoint& b);

// rt = (1/2)||.||^2 + qt on B*
double rt(const Space& s, const DualPoint& d);

// conjugate of j_c = (1/2)||. - c||^2 on B:
//   j_c*(a*) = (1/2)||a*||^2 + <c, a*>
double jc_conjugate(const Space& s, const PdPoint& c, const DualPoint& astar);

}  // namespace monokit
