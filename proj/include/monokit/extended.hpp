#pragma once

#include <optional>
#include <string>

#include "monokit/space.hpp"

// Extended-real results for the transform engines.  +inf is a sentinel flag,
// never a stored double: it absorbs addition and is never multiplied by zero.

namespace monokit {

struct TransformValue {
  double value = 0.0;  // meaningless when finite == false
  bool finite = true;
  bool exact = true;  // false for grid/refinement estimates
  std::optional<PdPoint> witness_b;          // attaining point in B, when known
  std::optional<DualPoint> witness_bstar;    // attaining point in B*, when known
  std::optional<Vec> witness_weights;        // simplex weights, when the solve is weight-based
  std::optional<std::string> warning;

  static TransformValue infinity() {
    TransformValue t;
    t.finite = false;
    return t;
  }
  static TransformValue of(double v, bool exact_ = true) {
    TransformValue t;
    t.value = v;
    t.exact = exact_;
    return t;
  }
};

// a + b with +inf absorbing
inline TransformValue add_ext(const TransformValue& a, double b) {
  if (!a.finite) return a;
  TransformValue t = a;
  t.value += b;
  return t;
}

// min with +inf as neutral element; ties keep the earlier argument
inline const TransformValue& min_ext(const TransformValue& a, const TransformValue& b) {
  if (!a.finite) return b;
  if (!b.finite) return a;
  return b.value < a.value ? b : a;
}

}  // namespace monokit
