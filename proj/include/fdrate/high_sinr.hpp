#pragma once

#include "fdrate/core_model.hpp"

namespace fdrate {

/// High-SINR sum rate: sum_k log2(snr_ul/(1+xinr_bs)) + log2(snr_dl/(1+xinr_ms)).
/// Returns -infinity when any channel carries zero power in either direction.
double hsinr_rate(const LinkInstance& link, const Allocation& a);

struct HsinrResult {
  Allocation allocation;
  Vector alpha;        // MS power shares, P_m,k = alpha_k * p_max_m
  int iterations = 0;  // bisection steps on the reference share
};

/// Optimal high-SINR allocation for a given canceller position c. The BS
/// splits equally; the MS shares satisfy
///   alpha_k (N_m + R_k alpha_k) = alpha_ref (N_m + R_ref alpha_ref),
/// with R_k = p_max_m * RSI(k - c) and ref the channel farthest from c, and
/// alpha_ref is found by bisection on [0, 1/K] until
/// sum_k alpha_k lies in [1 - epsilon/(K + epsilon), 1].
HsinrResult hsinr_allocation_at(const LinkInstance& link, double c,
                                double epsilon = 1e-6);

/// High-SINR optimum: the canceller sits at (K + 1)/2.
HsinrResult hsinr_maximum_rate(const LinkInstance& link, double epsilon = 1e-6);

}  // namespace fdrate
