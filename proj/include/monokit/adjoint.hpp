#pragma once

#include <vector>

#include "monokit/space.hpp"

// Monotone linear subspaces of B = E x E* and their adjoints inside
// B* = E* x E**, through the bracket [[(x,x*),(y*,y**)]] = <x,y*> - <x*,y**>.

namespace monokit {

struct LinSubspace {
  std::vector<PdPoint> basis;  // linearly independent; empty means {0}
  int dim_v = 0;
};

struct DualSubspace {
  std::vector<DualPoint> basis;
  int dim_v = 0;
};

LinSubspace make_subspace(const Space& s, std::vector<PdPoint> basis);
void check_subspace(const Space& s, const LinSubspace& v, const char* who);
void check_subspace(const Space& s, const DualSubspace& v, const char* who);

double bracket(const PdPoint& a, const DualPoint& bstar);
// bracket used when adjoining a second time, on B* x B
double bracket_dual(const DualPoint& bstar, const PdPoint& b);

// annihilator of V under the bracket; dimension 2 dim - dim_v
DualSubspace adjoint_subspace(const Space& s, const LinSubspace& v);
// adjoint of a dual-side subspace back in B (identifying E** with E)
LinSubspace double_adjoint(const Space& s, const DualSubspace& w);

// positive semidefiniteness of the pairing form on the span (eigenvalue
// tolerance -1e-10)
bool subspace_monotone(const Space& s, const LinSubspace& v);
bool subspace_monotone(const Space& s, const DualSubspace& w);

// range criterion at p = 2: the summed coordinates of the basis span E.
// Requires a monotone subspace.
bool subspace_maximal_minty(const Space& s, const LinSubspace& v);
bool subspace_maximal_minty(const Space& s, const DualSubspace& w);

struct AdjointReport {
  std::vector<DualPoint> vA_basis;
  bool v_monotone = false;
  bool vA_monotone = false;
  bool v_maximal = false;
  bool vA_maximal = false;  // evaluated only when vA_monotone
  bool consistent_qqthm = false;
};

// The two-directional check: V^A monotone iff V is maximally monotone, and
// whenever V^A is monotone it is itself maximal on the dual side.
AdjointReport brezis_browder_check(const Space& s, const LinSubspace& v);

}  // namespace monokit
