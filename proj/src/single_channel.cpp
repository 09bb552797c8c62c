#include "fdrate/single_channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fdrate/detail/bisection.hpp"

namespace fdrate {

namespace {

struct SingleLink {
  double snr_ul_per_power;  // h_mb / N_b
  double snr_dl_per_power;  // h_bm / N_m
  double xinr_bs_per_power; // g_b / N_b
  double xinr_ms_per_power; // g_m / N_m

  SingleLink(const StationParams& bs, const StationParams& ms, double h_mb,
             double h_bm)
      : snr_ul_per_power(h_mb / bs.noise),
        snr_dl_per_power(h_bm / ms.noise),
        xinr_bs_per_power(flat_fraction(bs) / bs.noise),
        xinr_ms_per_power(flat_fraction(ms) / ms.noise) {}

  double ul(double p_b, double p_m) const {
    return sinr_rate(snr_ul_per_power * p_m, xinr_bs_per_power * p_b);
  }
  double dl(double p_b, double p_m) const {
    return sinr_rate(snr_dl_per_power * p_b, xinr_ms_per_power * p_m);
  }
};

void check_inputs(const StationParams& bs, const StationParams& ms,
                  double h_mb, double h_bm) {
  validate(bs);
  validate(ms);
  if (!(h_mb > 0.0 && h_bm > 0.0 && std::isfinite(h_mb) &&
        std::isfinite(h_bm))) {
    throw std::invalid_argument("channel gains must be finite and > 0");
  }
}

}  // namespace

const char* to_string(Winner w) {
  switch (w) {
    case Winner::FullDuplex: return "FD";
    case Winner::TddUplink: return "TDD_UL";
    case Winner::TddDownlink: return "TDD_DL";
  }
  return "?";
}

SingleChannelOptimum single_channel_optimum(const StationParams& bs,
                                            const StationParams& ms,
                                            double h_mb, double h_bm) {
  check_inputs(bs, ms, h_mb, h_bm);
  const SingleLink link(bs, ms, h_mb, h_bm);

  SingleChannelOptimum out;
  out.fd_rate = link.ul(bs.p_max, ms.p_max) + link.dl(bs.p_max, ms.p_max);
  out.tdd_ul_rate = link.ul(0.0, ms.p_max);
  out.tdd_dl_rate = link.dl(bs.p_max, 0.0);

  // FD must strictly beat the better TDD corner; ties go to TDD (UL first).
  if (out.tdd_ul_rate >= out.tdd_dl_rate) {
    out.winner = Winner::TddUplink;
    out.rate = out.tdd_ul_rate;
    out.p_m = ms.p_max;
  } else {
    out.winner = Winner::TddDownlink;
    out.rate = out.tdd_dl_rate;
    out.p_b = bs.p_max;
  }
  if (out.fd_rate > out.rate) {
    out.winner = Winner::FullDuplex;
    out.rate = out.fd_rate;
    out.p_b = bs.p_max;
    out.p_m = ms.p_max;
  }
  return out;
}

double capacity_extension_p(double gamma_bm_max, double gamma_mb_max,
                            double gamma_mm_max, double gamma_bb_max) {
  if (!(gamma_bm_max > 0.0 && gamma_mb_max > 0.0)) {
    throw std::invalid_argument(
        "capacity extension is undefined for a zero maximum SNR");
  }
  if (!(gamma_mm_max >= 0.0 && gamma_bb_max >= 0.0)) {
    throw std::invalid_argument("XINRs must be >= 0");
  }
  const double dl_ratio = std::log1p(gamma_bm_max / (1.0 + gamma_mm_max)) /
                          std::log1p(gamma_bm_max);
  const double ul_ratio = std::log1p(gamma_mb_max / (1.0 + gamma_bb_max)) /
                          std::log1p(gamma_mb_max);
  return std::max(dl_ratio + ul_ratio - 1.0, 0.0);
}

double capacity_extension_p(const StationParams& bs, const StationParams& ms,
                            double h_mb, double h_bm) {
  check_inputs(bs, ms, h_mb, h_bm);
  return capacity_extension_p(h_bm * bs.p_max / ms.noise,
                              h_mb * ms.p_max / bs.noise,
                              flat_fraction(ms) * ms.p_max / ms.noise,
                              flat_fraction(bs) * bs.p_max / bs.noise);
}

std::vector<CapRegionPoint> trace_capacity_boundary(const StationParams& bs,
                                                    const StationParams& ms,
                                                    double h_mb, double h_bm,
                                                    int n_points) {
  if (n_points < 2) throw std::invalid_argument("n_points must be >= 2");
  check_inputs(bs, ms, h_mb, h_bm);
  const SingleLink link(bs, ms, h_mb, h_bm);
  const double s_b = link.dl(bs.p_max, ms.p_max);
  const double s_m = link.ul(bs.p_max, ms.p_max);

  std::vector<CapRegionPoint> points;
  points.reserve(2 * static_cast<std::size_t>(n_points));
  for (int i = 1; i <= n_points; ++i) {
    const double alpha = static_cast<double>(i) / n_points;

    // DL sweep: r_dl is increasing in P_b at fixed P_m.
    const double p_b = detail::bisect_increasing(
        [&](double p) { return link.dl(p, ms.p_max); }, 0.0, bs.p_max,
        alpha * s_b, 1e-10 * bs.p_max);
    points.push_back({alpha * s_b, link.ul(p_b, ms.p_max)});

    if (i == n_points) break;  // alpha = 1 is the shared (s_b, s_m) corner

    // UL sweep: r_ul is increasing in P_m at fixed P_b.
    const double p_m = detail::bisect_increasing(
        [&](double p) { return link.ul(bs.p_max, p); }, 0.0, ms.p_max,
        alpha * s_m, 1e-10 * ms.p_max);
    points.push_back({link.dl(bs.p_max, p_m), alpha * s_m});
  }
  std::sort(points.begin(), points.end(),
            [](const CapRegionPoint& a, const CapRegionPoint& b) {
              return a.r_dl < b.r_dl || (a.r_dl == b.r_dl && a.r_ul > b.r_ul);
            });
  return points;
}

Condition1 check_condition1(const StationParams& bs, const StationParams& ms,
                            double h_mb, double h_bm, double p_b, double p_m) {
  if (!(p_b >= 0.0 && p_m >= 0.0)) {
    throw std::invalid_argument("powers must be >= 0");
  }
  const SingleLink link(bs, ms, h_mb, h_bm);
  const double snr_ul = link.snr_ul_per_power * p_m;
  const double snr_dl = link.snr_dl_per_power * p_b;
  const double xinr_bs = link.xinr_bs_per_power * p_b;
  const double xinr_m = link.xinr_ms_per_power * p_m;
  return {xinr_m <= snr_ul / (1.0 + xinr_bs), xinr_bs <= snr_dl / (1.0 + xinr_m)};
}

double tdd_gap_check(const StationParams& bs, const StationParams& ms,
                     double h_mb, double h_bm, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");
  check_inputs(bs, ms, h_mb, h_bm);
  const SingleLink link(bs, ms, h_mb, h_bm);
  const double tdd_max =
      std::max(link.ul(0.0, ms.p_max), link.dl(bs.p_max, 0.0));

  double worst = -std::numeric_limits<double>::infinity();
  bool sampled = false;
  for (int i = 0; i < grid_points; ++i) {
    const double p_b = bs.p_max * i / (grid_points - 1);
    for (int j = 0; j < grid_points; ++j) {
      const double p_m = ms.p_max * j / (grid_points - 1);
      if (check_condition1(bs, ms, h_mb, h_bm, p_b, p_m).holds()) continue;
      sampled = true;
      worst = std::max(worst, link.ul(p_b, p_m) + link.dl(p_b, p_m) - tdd_max);
    }
  }
  if (!sampled) {
    throw std::invalid_argument(
        "biconcavity condition holds on the whole grid; nothing to check");
  }
  return worst;
}

double distance_from_snr(double gamma, double gamma_max, double eta) {
  if (!(gamma > 0.0 && gamma_max > 0.0 && eta > 0.0)) {
    throw std::invalid_argument("SNRs and path-loss exponent must be > 0");
  }
  return std::pow(gamma_max / gamma, 1.0 / eta);
}

Eigen::MatrixXd two_uni_extension_map(const TwoUniGeometry& geom,
                                      double gamma_bb_max,
                                      const Vector& gamma_m1b,
                                      const Vector& gamma_bm2) {
  if (!(geom.eta > 0.0 && geom.rho > 0.0)) {
    throw std::invalid_argument("eta and rho must be > 0");
  }
  if (!(geom.gamma_m1m2_max > 0.0)) {
    throw std::invalid_argument("gamma_m1m2_max must be > 0");
  }
  if ((gamma_m1b.array() > geom.gamma_m1b_max).any() ||
      (gamma_bm2.array() > geom.gamma_bm2_max).any()) {
    throw std::invalid_argument("swept SNRs must not exceed their maxima");
  }

  Eigen::MatrixXd p(gamma_m1b.size(), gamma_bm2.size());
  for (Eigen::Index i = 0; i < gamma_m1b.size(); ++i) {
    const double d_m1b =
        distance_from_snr(gamma_m1b(i), geom.gamma_m1b_max, geom.eta);
    for (Eigen::Index j = 0; j < gamma_bm2.size(); ++j) {
      const double d_bm2 =
          distance_from_snr(gamma_bm2(j), geom.gamma_bm2_max, geom.eta);
      const double d_m1m2 = geom.rho * (d_m1b + d_bm2);
      const double slack = 1e-12 * (d_m1b + d_bm2 + d_m1m2);
      const bool triangle = d_m1b <= d_bm2 + d_m1m2 + slack &&
                            d_bm2 <= d_m1b + d_m1m2 + slack &&
                            d_m1m2 <= d_m1b + d_bm2 + slack;
      if (!triangle) {
        p(i, j) = 0.0;
        continue;
      }
      const double gamma_m1m2 =
          geom.gamma_m1m2_max * std::pow(d_m1m2, -geom.eta);
      p(i, j) = capacity_extension_p(gamma_bm2(j), gamma_m1b(i), gamma_m1m2,
                                     gamma_bb_max);
    }
  }
  return p;
}

}  // namespace fdrate
