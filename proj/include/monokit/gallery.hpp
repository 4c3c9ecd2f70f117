#pragma once

#include "monokit/operators.hpp"

// Truncated tail operator (Tx)_i = sum_{k >= i} x_k and the algebraic checks
// around it.  The identity and witness checks work directly from suffix sums
// so they stay cheap and bit-stable at large truncation levels.

namespace monokit {

struct TailInstance {
  int n = 0;
  Mat T_matrix;
  Mat U_matrix;  // the same matrix read as the l1 -> c0 map
};

// dense matrices; refuse absurd truncation levels (the checks below never
// need the matrix)
TailInstance make_tail(int n);

Vec tail_apply(const Vec& x);  // T x via suffix sums

struct TailIdentity {
  double lhs = 0.0;  // <x, T x>
  double rhs = 0.0;  // (1/2)||x||^2 + (1/2)(sum x)^2
  bool equal = false;
};

TailIdentity tail_identity_check(const Vec& x);

struct TailNiWitness {
  double value = 0.0;  // <x, Tx> - sum(x) + 1, the formally substituted pairing
  bool bound_ok = false;  // value >= 1/2
};

// The Banach-limit terms of the original construction are replaced by their
// stated constants (0 and 1); only the resulting inequality is checked here.
// Finite truncations cannot reproduce the non-reflexive behavior itself.
TailNiWitness tail_ni_witness_check(const Vec& x);

struct TailStructure {
  bool lm_equals_gt = false;
  int points_checked = 0;
};

// Builds M = {(Ux, x)} over a small integer grid, flips it through L, and
// compares with {(y, Ty)} as exact point sets.
TailStructure tailgex_structure_check(int n);

}  // namespace monokit
