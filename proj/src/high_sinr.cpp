#include "fdrate/high_sinr.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "fdrate/error.hpp"

namespace fdrate {

double hsinr_rate(const LinkInstance& link, const Allocation& a) {
  validate(link);
  validate(link, a);
  const double g_b = flat_fraction(link.bs);
  double total = 0.0;
  for (int i = 0; i < link.k_channels; ++i) {
    const double snr_ul = link.h_mb(i) * a.p_m(i) / link.bs.noise;
    const double snr_dl = link.h_bm(i) * a.p_b(i) / link.ms.noise;
    if (snr_ul <= 0.0 || snr_dl <= 0.0) {
      return -std::numeric_limits<double>::infinity();
    }
    const double xinr_bs = g_b * a.p_b(i) / link.bs.noise;
    const double xinr_m = xinr_ms(link.ms, a.p_m(i), i + 1, a.c);
    total += std::log(snr_ul / (1.0 + xinr_bs)) + std::log(snr_dl / (1.0 + xinr_m));
  }
  return total / std::numbers::ln2;
}

HsinrResult hsinr_allocation_at(const LinkInstance& link, double c,
                                double epsilon) {
  validate(link);
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!std::isfinite(c)) throw std::invalid_argument("c must be finite");
  const int k = link.k_channels;
  const double noise = link.ms.noise;

  Vector r(k);
  for (int i = 0; i < k; ++i) {
    r(i) = link.ms.p_max * residual_per_unit_power(link.ms.sic, (i + 1) - c);
  }
  // Reference share: the channel farthest from c (the last one on ties).
  int ref = 0;
  for (int i = 1; i < k; ++i) {
    if (r(i) >= r(ref)) ref = i;
  }

  HsinrResult out;
  out.allocation.c = c;
  out.allocation.p_b = Vector::Constant(k, link.bs.p_max / k);

  if (r(ref) <= 0.0) {
    out.alpha = Vector::Constant(k, 1.0 / k);
    out.allocation.p_m = out.alpha * link.ms.p_max;
    return out;
  }

  const double r_ref = r(ref);
  Vector alpha(k);
  auto shares = [&](double alpha_ref) {
    const double level = alpha_ref * (noise + r_ref * alpha_ref);
    for (int i = 0; i < k; ++i) {
      if (i == ref) {
        alpha(i) = alpha_ref;
      } else if (r(i) == 0.0) {
        alpha(i) = 1.0 / (1.0 / alpha_ref - 1.0 / (noise / r_ref + alpha_ref));
      } else {
        // Positive root of R x^2 + N x - level = 0, rationalized to avoid
        // cancellation when 4 R level << N^2.
        alpha(i) = 2.0 * level /
                   (noise + std::sqrt(noise * noise + 4.0 * level * r(i)));
      }
    }
    return alpha.sum();
  };

  const double window = epsilon / (k + epsilon);
  double lo = 0.0;
  double hi = 1.0 / k;
  double sum_lo = 0.0;
  double sum_hi = shares(hi);
  if (sum_hi < 1.0 - window) {
    throw NumericError("share bracket [0, 1/K] does not reach a unit sum");
  }
  double found = -1.0;
  if (sum_hi <= 1.0) found = hi;

  int it = 0;
  for (; found < 0.0 && it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double sum_mid = shares(mid);
    if (!(sum_lo <= sum_mid && sum_mid <= sum_hi)) {
      throw NumericError("share sum is not monotone in the reference share");
    }
    if (sum_mid > 1.0) {
      hi = mid;
      sum_hi = sum_mid;
    } else if (sum_mid < 1.0 - window) {
      lo = mid;
      sum_lo = sum_mid;
    } else {
      found = mid;
    }
  }
  if (found < 0.0) throw NumericError("share bisection did not converge");
  shares(found);

  out.alpha = alpha;
  out.iterations = it;
  out.allocation.p_m = alpha * link.ms.p_max;
  return out;
}

HsinrResult hsinr_maximum_rate(const LinkInstance& link, double epsilon) {
  return hsinr_allocation_at(link, 0.5 * (link.k_channels + 1), epsilon);
}

}  // namespace fdrate
