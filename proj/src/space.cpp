#include "monokit/space.hpp"

#include <cmath>

namespace monokit {

PdPoint operator+(const PdPoint& a, const PdPoint& b) { return {a.x + b.x, a.xstar + b.xstar}; }
PdPoint operator-(const PdPoint& a, const PdPoint& b) { return {a.x - b.x, a.xstar - b.xstar}; }
PdPoint operator*(double s, const PdPoint& a) { return {s * a.x, s * a.xstar}; }
DualPoint operator+(const DualPoint& a, const DualPoint& b) {
  return {a.ystar + b.ystar, a.ystarstar + b.ystarstar};
}
DualPoint operator-(const DualPoint& a, const DualPoint& b) {
  return {a.ystar - b.ystar, a.ystarstar - b.ystarstar};
}
DualPoint operator*(double s, const DualPoint& a) { return {s * a.ystar, s * a.ystarstar}; }

PdPoint zero_point(const Space& s) { return {Vec::Zero(s.dim), Vec::Zero(s.dim)}; }
DualPoint zero_dual_point(const Space& s) { return {Vec::Zero(s.dim), Vec::Zero(s.dim)}; }

void check_point(const Space& s, const PdPoint& b, const char* who) {
  if (b.x.size() != s.dim || b.xstar.size() != s.dim)
    throw std::invalid_argument(std::string(who) + ": point dimension does not match space");
}

void check_dual_point(const Space& s, const DualPoint& d, const char* who) {
  if (d.ystar.size() != s.dim || d.ystarstar.size() != s.dim)
    throw std::invalid_argument(std::string(who) + ": dual point dimension does not match space");
}

double lp_norm(const Vec& v, double p) {
  if (v.size() == 0) return 0.0;
  if (p == 2.0) return v.norm();
  // scale out the max to dodge overflow/underflow in pow
  double m = v.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]) / m, p);
  return m * std::pow(acc, 1.0 / p);
}

double norm(const Space& s, const Vec& v, Side side) {
  return lp_norm(v, side == Side::primal ? s.p : s.dual_p());
}

Vec duality_map(const Space& s, const Vec& z, Side side) {
  double p = side == Side::primal ? s.p : s.dual_p();
  if (p == 2.0) return z;
  double nz = lp_norm(z, p);
  Vec w = Vec::Zero(z.size());
  if (nz == 0.0) return w;
  double scale = std::pow(nz, 2.0 - p);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double a = std::abs(z[i]);
    if (a > 0.0) w[i] = scale * std::pow(a, p - 1.0) * (z[i] > 0 ? 1.0 : -1.0);
  }
  return w;
}

double q(const PdPoint& b) { return b.x.dot(b.xstar); }

DualPoint iso_L(const PdPoint& b) { return {b.xstar, b.x}; }

PdPoint iso_Lt(const DualPoint& d) { return {d.ystarstar, d.ystar}; }

DualPoint reflect(const DualPoint& d) { return {d.ystar, -d.ystarstar}; }

double pair(const PdPoint& b, const DualPoint& bstar) {
  return b.x.dot(bstar.ystar) + b.xstar.dot(bstar.ystarstar);
}

double pair_L(const PdPoint& b, const PdPoint& c) {
  return b.x.dot(c.xstar) + b.xstar.dot(c.x);
}

double pair_Lt(const DualPoint& d, const DualPoint& e) {
  return d.ystar.dot(e.ystarstar) + d.ystarstar.dot(e.ystar);
}

double qt(const DualPoint& d) { return d.ystar.dot(d.ystarstar); }

double norm_B(const Space& s, const PdPoint& b) {
  return std::hypot(lp_norm(b.x, s.p), lp_norm(b.xstar, s.dual_p()));
}

double norm_Bstar(const Space& s, const DualPoint& d) {
  // E** carries the norm of E under the identification
  return std::hypot(lp_norm(d.ystar, s.dual_p()), lp_norm(d.ystarstar, s.p));
}

double r(const Space& s, const PdPoint& b) {
  double n = norm_B(s, b);
  return 0.5 * n * n + q(b);
}

double rt(const Space& s, const DualPoint& d) {
  double n = norm_Bstar(s, d);
  return 0.5 * n * n + qt(d);
}

double jc_conjugate(const Space& s, const PdPoint& c, const DualPoint& astar) {
  double n = norm_Bstar(s, astar);
  return 0.5 * n * n + pair(c, astar);
}

}  // namespace monokit
