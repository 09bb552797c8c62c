#pragma once

#include <vector>

#include <Eigen/Core>

#include "fdrate/core_model.hpp"

namespace fdrate {

enum class Winner { FullDuplex, TddUplink, TddDownlink };

const char* to_string(Winner w);

/// Best operating point of a single bidirectional channel. Only three
/// candidates can maximize the sum rate: both stations at full power, or one
/// of the two TDD corners.
struct SingleChannelOptimum {
  double p_b = 0.0;
  double p_m = 0.0;
  double rate = 0.0;
  Winner winner = Winner::FullDuplex;
  double fd_rate = 0.0;
  double tdd_ul_rate = 0.0;
  double tdd_dl_rate = 0.0;
};

SingleChannelOptimum single_channel_optimum(const StationParams& bs,
                                            const StationParams& ms,
                                            double h_mb, double h_bm);

/// Capacity-region extension p from the maximum SNRs and XINRs:
///   log(1 + g_bm/(1+g_mm))/log(1+g_bm) + log(1 + g_mb/(1+g_bb))/log(1+g_mb) - 1,
/// clamped at 0. Throws std::invalid_argument if either SNR is not positive.
double capacity_extension_p(double gamma_bm_max, double gamma_mb_max,
                            double gamma_mm_max, double gamma_bb_max);

/// Same, from station parameters at full power.
double capacity_extension_p(const StationParams& bs, const StationParams& ms,
                            double h_mb, double h_bm);

struct CapRegionPoint {
  double r_dl = 0.0;
  double r_ul = 0.0;
};

/// Boundary of the FD capacity region. The DL sweep holds the MS at full power
/// and lowers P_b until r_dl = alpha * s_b; the UL sweep is symmetric. alpha
/// runs over {1/n, 2/n, ..., 1}. Output is sorted by r_dl.
std::vector<CapRegionPoint> trace_capacity_boundary(const StationParams& bs,
                                                    const StationParams& ms,
                                                    double h_mb, double h_bm,
                                                    int n_points);

/// Biconcavity condition at a power pair.
///   ul: gamma_mm <= gamma_mb / (1 + gamma_bb)  (rate concave in P_m)
///   dl: gamma_bb <= gamma_bm / (1 + gamma_mm)  (rate concave in P_b)
struct Condition1 {
  bool ul = false;
  bool dl = false;
  bool holds() const { return ul && dl; }
};

Condition1 check_condition1(const StationParams& bs, const StationParams& ms,
                            double h_mb, double h_bm, double p_b, double p_m);

/// Largest FD-over-TDD gain r - r_TDD^max over a grid_points x grid_points
/// power grid, restricted to points where the biconcavity condition fails.
/// Throws std::invalid_argument when no sampled point violates it.
double tdd_gap_check(const StationParams& bs, const StationParams& ms,
                     double h_mb, double h_bm, int grid_points = 101);

/// Path-loss geometry for two unidirectional links (MS1 -> BS -> MS2).
/// Distances are normalized to the common reference distance at which each
/// link reaches its maximum SNR.
struct TwoUniGeometry {
  double eta = 4.0;  // path-loss exponent
  double rho = 1.0;  // d_m1m2 / (d_m1b + d_bm2)
  double gamma_m1b_max = 1.0;
  double gamma_bm2_max = 1.0;
  double gamma_m1m2_max = 1.0;
};

/// Distance implied by an SNR under h = (L/d)^eta: d = (gamma_max/gamma)^(1/eta).
double distance_from_snr(double gamma, double gamma_max, double eta);

/// Extension p over a grid of (gamma_m1b, gamma_bm2), full transmit powers.
/// Entry (i, j) uses gamma_m1b(i) and gamma_bm2(j). Cells whose implied
/// distances violate the triangle inequality get p = 0.
Eigen::MatrixXd two_uni_extension_map(const TwoUniGeometry& geom,
                                      double gamma_bb_max,
                                      const Vector& gamma_m1b,
                                      const Vector& gamma_bm2);

}  // namespace fdrate
