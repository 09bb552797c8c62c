#pragma once

#include <cmath>
#include <string>

#include "fdrate/error.hpp"

namespace fdrate::detail {

/// Solves f(x) = target for nondecreasing f on [lo, hi] by bisection until the
/// bracket is narrower than tol. Throws NumericError if target is not
/// bracketed by f(lo) and f(hi).
template <typename F>
double bisect_increasing(F&& f, double lo, double hi, double target,
                         double tol) {
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (!(f_lo <= target && target <= f_hi)) {
    throw NumericError("bisection target " + std::to_string(target) +
                       " not bracketed by [" + std::to_string(f_lo) + ", " +
                       std::to_string(f_hi) + "]");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace fdrate::detail
