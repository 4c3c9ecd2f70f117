#include "monokit/gallery.hpp"

#include <algorithm>
#include <cmath>

#include "monokit/errors.hpp"

namespace monokit {

namespace {

// compensated left-to-right sum in extended precision
long double kahan_sum(const std::vector<long double>& terms) {
  long double sum = 0.0L, carry = 0.0L;
  for (long double t : terms) {
    long double y = t - carry;
    long double s = sum + y;
    carry = (s - sum) - y;
    sum = s;
  }
  return sum;
}

std::vector<long double> suffix_sums(const Vec& x) {
  int n = static_cast<int>(x.size());
  std::vector<long double> s(n);
  long double acc = 0.0L, carry = 0.0L;
  for (int i = n - 1; i >= 0; --i) {
    long double y = static_cast<long double>(x[i]) - carry;
    long double t = acc + y;
    carry = (t - acc) - y;
    acc = t;
    s[i] = acc;
  }
  return s;
}

}  // namespace

TailInstance make_tail(int n) {
  if (n < 1) throw ContractError("make_tail: n must be >= 1");
  if (n > 2000)
    throw ContractError(
        "make_tail: dense matrix refused above n = 2000; the tail checks work from "
        "suffix sums and do not need it");
  TailInstance t;
  t.n = n;
  t.T_matrix = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) t.T_matrix(i, k) = 1.0;
  t.U_matrix = t.T_matrix;
  return t;
}

Vec tail_apply(const Vec& x) {
  auto s = suffix_sums(x);
  Vec out(x.size());
  for (int i = 0; i < x.size(); ++i) out[i] = static_cast<double>(s[i]);
  return out;
}

TailIdentity tail_identity_check(const Vec& x) {
  int n = static_cast<int>(x.size());
  auto s = suffix_sums(x);

  std::vector<long double> lhs_terms(n), sq_terms(n);
  for (int i = 0; i < n; ++i) {
    lhs_terms[i] = static_cast<long double>(x[i]) * s[i];
    sq_terms[i] = static_cast<long double>(x[i]) * static_cast<long double>(x[i]);
  }
  long double lhs = kahan_sum(lhs_terms);
  long double sigma = n > 0 ? s[0] : 0.0L;
  long double rhs = 0.5L * kahan_sum(sq_terms) + 0.5L * sigma * sigma;

  TailIdentity out;
  out.lhs = static_cast<double>(lhs);
  out.rhs = static_cast<double>(rhs);
  double scale = std::max({1.0, std::abs(out.lhs), std::abs(out.rhs)});
  out.equal = std::abs(out.lhs - out.rhs) <= 1e-12 * scale;
  return out;
}

TailNiWitness tail_ni_witness_check(const Vec& x) {
  auto id = tail_identity_check(x);
  auto s = suffix_sums(x);
  double sigma = x.size() > 0 ? static_cast<double>(s[0]) : 0.0;

  TailNiWitness out;
  out.value = id.lhs - sigma + 1.0;
  out.bound_ok = out.value >= 0.5 - 1e-12;
  return out;
}

TailStructure tailgex_structure_check(int n) {
  if (n < 1) throw ContractError("tailgex_structure_check: n must be >= 1");

  int pts = 3;
  double reach = 1.0;
  double count = std::pow(3.0, n);
  if (count > 60000.0) {
    pts = 2;
    count = std::pow(2.0, n);
    if (count > 60000.0)
      throw ContractError("tailgex_structure_check: grid too large at this truncation level");
  }

  TailInstance inst = make_tail(n);
  std::vector<Vec> grid;
  int total = static_cast<int>(count);
  for (int c = 0; c < total; ++c) {
    Vec x(n);
    int rem = c;
    for (int i = 0; i < n; ++i) {
      int digit = rem % pts;
      rem /= pts;
      x[i] = -reach + digit * (2.0 * reach / (pts - 1));
    }
    grid.push_back(x);
  }

  auto stack = [n](const Vec& a, const Vec& b) {
    Vec u(2 * n);
    u.head(n) = a;
    u.tail(n) = b;
    return u;
  };
  std::vector<Vec> lm, gt;
  for (const auto& x : grid) {
    Vec ux = inst.U_matrix * x;
    // m = (Ux, x); L m = (x, Ux) stacked dual-side
    lm.push_back(stack(x, ux));
    gt.push_back(stack(x, inst.T_matrix * x));
  }
  auto lex = [](const Vec& a, const Vec& b) {
    for (int i = 0; i < a.size(); ++i) {
      if (a[i] < b[i]) return true;
      if (a[i] > b[i]) return false;
    }
    return false;
  };
  std::sort(lm.begin(), lm.end(), lex);
  std::sort(gt.begin(), gt.end(), lex);

  TailStructure out;
  out.points_checked = total;
  out.lm_equals_gt = true;
  for (size_t i = 0; i < lm.size(); ++i)
    if ((lm[i] - gt[i]).cwiseAbs().maxCoeff() != 0.0) out.lm_equals_gt = false;
  return out;
}

}  // namespace monokit
