#pragma once

#include "monokit/space.hpp"

// Dense two-phase primal simplex with Bland's rule.  The instances in this
// library are tiny (at most a few dozen rows), so a dense tableau with an
// anti-cycling pivot rule is the simplest thing that is provably finite.

namespace monokit {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Vec x;              // primal solution in the formulation's variables
  double objective = 0.0;
};

// min c'x  subject to  A x = b, x >= 0
LpResult solve_lp(const Mat& A, const Vec& b, const Vec& c);

// min c'x  over free x subject to  G x >= h  (x split internally)
LpResult solve_lp_inequality(const Mat& G, const Vec& h, const Vec& c);

}  // namespace monokit
