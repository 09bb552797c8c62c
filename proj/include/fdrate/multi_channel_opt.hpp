#pragma once

#include <limits>
#include <vector>

#include "fdrate/core_model.hpp"

namespace fdrate {

/// Per-channel restrictions that keep the sum rate biconcave at a fixed
/// canceller position. Forced-zero channels run half duplex.
struct ChannelConstraint {
  bool ms_forced_zero = false;
  bool bs_forced_zero = false;
  double p_b_upper = std::numeric_limits<double>::infinity();
  double p_m_upper = std::numeric_limits<double>::infinity();

  double bs_cap() const { return bs_forced_zero ? 0.0 : p_b_upper; }
  double ms_cap() const { return ms_forced_zero ? 0.0 : p_m_upper; }
};

struct SolveOptions {
  double epsilon = 0.2;          // target absolute sum-rate error of the c-grid
  double delta_c = 0.0;          // explicit c-grid step; 0 derives it from epsilon
  double inner_tol = 1e-9;       // stop alternating below this improvement
  int max_outer_iters = 200;
  double bisection_tol = 1e-10;  // relative width of the multiplier bracket
  int multi_start = 1;           // starts of the alternating ascent per c
  int threads = 1;               // c-grid workers; 0 = hardware concurrency
};

struct Solution {
  Allocation allocation;
  double sum_rate = 0.0;
  int outer_iterations = 0;
  /// Sum rate after the initial point and after every half-step of the
  /// winning start (solve_fixed_c only).
  std::vector<double> ascent;
};

/// XINR per unit MS power at a unit channel offset from the canceller: g_m/N_m
/// for the quadratic model, the larger one-channel-offset value for measured
/// profiles, g/N for flat ones.
double unit_offset_xinr(const StationParams& ms);

/// Biconcavity constraints for canceller position c. For every channel:
/// (a) keeps the rate concave in P_m,k by bounding P_b,k, or forces P_m,k = 0;
/// (b) keeps it concave in P_b,k by bounding P_m,k, or forces P_b,k = 0 when
///     (a) left the MS on; and the bounded-derivative condition adds a second
///     bound on P_b,k (or forces P_m,k = 0).
std::vector<ChannelConstraint> build_constraints(const LinkInstance& link,
                                                 double c);

/// Maximizes the sum rate at fixed c by alternating exact maximization over
/// the MS powers and the BS powers. Each block is a separable concave program
/// under one budget, solved by bisection on the budget multiplier.
Solution solve_fixed_c(const LinkInstance& link, double c,
                       const std::vector<ChannelConstraint>& constraints,
                       const SolveOptions& opts = {});

/// Canceller grid step that keeps the c-discretization error below epsilon.
double c_grid_step(int k_channels, double epsilon);

/// Joint canceller placement and power allocation: solves every c on the
/// grid 1, 1 + dc, ... < K and keeps the first best. Requires K >= 2.
Solution maximum_rate(const LinkInstance& link, const SolveOptions& opts = {});

/// Closed-form d(sum rate)/dc for the quadratic MS profile.
double dr_dc(const LinkInstance& link, const Allocation& a);

/// Upper bound on |d(sum rate)/dc| over c in (1, K): (2/ln2)(ln K + 1 + 2 sqrt 3).
double derivative_bound(int k_channels);

}  // namespace fdrate
