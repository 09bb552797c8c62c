// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and time limits are fixed here and nowhere else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fdrate/cli.hpp"
#include "fdrate/high_sinr.hpp"
#include "fdrate/multi_channel_opt.hpp"
#include "fdrate/sic_ingest.hpp"
#include "fdrate/single_channel.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace fdrate;
using test::eq3;
using test::flat_station;
using test::log_uniform;
using test::uniform;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// 1. Closed-form extension p against bisection on the scaling factor.
Outcome extension_vs_scaling() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double g_bm = log_uniform(rng, -10, 40);
    const double g_mb = log_uniform(rng, -10, 40);
    const double g_mm = log_uniform(rng, -30, 30);
    const double g_bb = log_uniform(rng, -30, 30);
    const double s_b = std::log2(1 + g_bm / (1 + g_mm));
    const double s_m = std::log2(1 + g_mb / (1 + g_bb));
    const double oracle =
        test::extension_by_scaling(s_b, s_m, std::log2(1 + g_bm), std::log2(1 + g_mb));
    worst = std::max(worst, std::abs(capacity_extension_p(g_bm, g_mb, g_mm, g_bb) - oracle));
  }
  return {worst <= 1e-6, "max |p - oracle| = " + num(worst) + " (tol 1e-6, 1000 instances)"};
}

// 2. FD-or-TDD trichotomy against a 201 x 201 power grid.
Outcome trichotomy_vs_grid() {
  std::mt19937_64 rng(1002);
  int mismatches = 0;
  int fd_wins = 0;
  double worst_excess = -INFINITY;
  const int n = 201;
  for (int t = 0; t < 1000; ++t) {
    const double h_mb = log_uniform(rng, 0, 30);
    const double h_bm = log_uniform(rng, 0, 30);
    const double g_b = log_uniform(rng, -20, 30);
    const double g_m = log_uniform(rng, -20, 30);
    const auto best = single_channel_optimum(flat_station(g_b), flat_station(g_m), h_mb, h_bm);

    double grid_best = -1.0;
    int bi = 0;
    int bj = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double r = eq3(h_mb, h_bm, g_b, g_m, 1, 1, i / (n - 1.0), j / (n - 1.0));
        if (r > grid_best) {
          grid_best = r;
          bi = i;
          bj = j;
        }
      }
    }
    Winner grid_winner = Winner::FullDuplex;
    bool corner = true;
    if (bi == n - 1 && bj == n - 1) grid_winner = Winner::FullDuplex;
    else if (bi == 0 && bj == n - 1) grid_winner = Winner::TddUplink;
    else if (bi == n - 1 && bj == 0) grid_winner = Winner::TddDownlink;
    else corner = false;

    // A different label is only acceptable for an exact tie in rate.
    const bool same = corner && (grid_winner == best.winner ||
                                 std::abs(grid_best - best.rate) <= 1e-12 * grid_best);
    if (!same) ++mismatches;
    if (best.winner == Winner::FullDuplex) {
      ++fd_wins;
      worst_excess = std::max(worst_excess, grid_best - best.fd_rate);
    }
  }
  const bool ok = mismatches == 0 && worst_excess <= 1e-9;
  return {ok, std::to_string(mismatches) + " winner mismatches, FD won " + std::to_string(fd_wins) +
                  "/1000, max grid excess over FD point " + num(worst_excess) + " (tol 1e-9)"};
}

// 3. Gain over TDD below one bit wherever the biconcavity condition fails.
Outcome gap_where_condition_fails() {
  std::mt19937_64 rng(1003);
  int instances = 0;
  double worst = -INFINITY;
  int samples = 0;
  const int n = 101;
  while (instances < 100) {
    const double h_mb = log_uniform(rng, 0, 30);
    const double h_bm = log_uniform(rng, 0, 30);
    const double g_b = log_uniform(rng, -10, 30);
    const double g_m = log_uniform(rng, -10, 30);
    const double tdd = std::max(std::log2(1 + h_mb), std::log2(1 + h_bm));
    double inst_worst = -INFINITY;
    int inst_samples = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double p_b = i / (n - 1.0);
        const double p_m = j / (n - 1.0);
        const double x_bb = g_b * p_b;
        const double x_mm = g_m * p_m;
        const bool ul = x_mm <= h_mb * p_m / (1 + x_bb);
        const bool dl = x_bb <= h_bm * p_b / (1 + x_mm);
        if (ul && dl) continue;
        ++inst_samples;
        inst_worst = std::max(inst_worst, eq3(h_mb, h_bm, g_b, g_m, 1, 1, p_b, p_m) - tdd);
      }
    }
    if (inst_samples == 0) continue;
    ++instances;
    samples += inst_samples;
    worst = std::max(worst, inst_worst);
    const double lib = tdd_gap_check(flat_station(g_b), flat_station(g_m), h_mb, h_bm, n);
    if (std::abs(lib - inst_worst) > 1e-12) {
      return {false, "tdd_gap_check disagrees with the grid: " + num(lib) + " vs " + num(inst_worst)};
    }
  }
  return {worst < 1.0, "max r - r_TDD = " + num(worst) + " b/s/Hz over " + std::to_string(samples) +
                           " violating samples (bound 1)"};
}

// 4. Second differences along each power axis when the condition holds.
Outcome biconcavity() {
  std::mt19937_64 rng(1004);
  int instances = 0;
  double worst = -INFINITY;
  const int n = 64;
  while (instances < 100) {
    const double h_mb = log_uniform(rng, 0, 40);
    const double h_bm = log_uniform(rng, 0, 40);
    const auto bs = flat_station(log_uniform(rng, -20, 20));
    const auto ms = flat_station(log_uniform(rng, -20, 20));
    // Both halves get easier as the other station's power drops, so holding
    // at full power means holding on the whole box.
    if (!check_condition1(bs, ms, h_mb, h_bm, 1.0, 1.0).holds()) continue;
    ++instances;
    const double fixed_b = uniform(rng, 0, 1);
    const double fixed_m = uniform(rng, 0, 1);
    std::vector<double> along_m(n);
    std::vector<double> along_b(n);
    for (int i = 0; i < n; ++i) {
      along_m[i] = sum_rate_single(bs, ms, h_mb, h_bm, fixed_b, i / (n - 1.0));
      along_b[i] = sum_rate_single(bs, ms, h_mb, h_bm, i / (n - 1.0), fixed_m);
    }
    for (int i = 1; i + 1 < n; ++i) {
      worst = std::max(worst, along_m[i - 1] - 2 * along_m[i] + along_m[i + 1]);
      worst = std::max(worst, along_b[i - 1] - 2 * along_b[i] + along_b[i + 1]);
    }
  }
  return {worst <= 1e-9, "max second difference " + num(worst) + " (tol 1e-9, 100 x 64 x 2 axes)"};
}

// 5. Closed-form dr/dc against central differences, and the derivative bound.
Outcome derivative_in_c() {
  std::mt19937_64 rng(1005);
  double worst_rel = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int k = 2 + t % 31;
    const StationParams bs{1.0, 1.0, FlatSic{log_uniform(rng, -10, 10)}};
    const StationParams ms{1.0, 1.0, QuadraticSic{log_uniform(rng, -15, 5)}};
    LinkInstance link = make_flat_link(k, 1.0, 1.0, bs, ms);
    for (int i = 0; i < k; ++i) {
      link.h_mb(i) = log_uniform(rng, 0, 30);
      link.h_bm(i) = log_uniform(rng, 0, 30);
    }
    Allocation a{Vector(k), Vector(k), uniform(rng, 1.0, k)};
    for (int i = 0; i < k; ++i) {
      a.p_b(i) = uniform(rng, 0, 1.0 / k);
      a.p_m(i) = uniform(rng, 0, 1.0 / k);
    }
    const double h = 1e-6;
    Allocation up = a;
    Allocation down = a;
    up.c += h;
    down.c -= h;
    const double fd = (total_rate(link, up) - total_rate(link, down)) / (2 * h);
    const double exact = dr_dc(link, a);
    worst_rel = std::max(worst_rel, std::abs(exact - fd) / std::abs(exact));
  }

  double worst_ratio = 0.0;
  int bounded = 0;
  while (bounded < 100) {
    const int k = 2 + bounded % 40;
    const double n_b = 1.0;
    const double g_b = log_uniform(rng, -10, 10);
    const double g_m = log_uniform(rng, -15, 10);
    const double h = log_uniform(rng, 0, 40);
    const auto link = make_flat_link(k, h, h, {1.0, n_b, FlatSic{g_b}}, {1.0, 1.0, QuadraticSic{g_m}});
    Allocation a{Vector(k), Vector(k), uniform(rng, 1.0, k)};
    bool ok = true;
    for (int i = 0; i < k; ++i) {
      a.p_b(i) = uniform(rng, 0, 1.0 / k);
      a.p_m(i) = uniform(rng, 0, 1.0 / k);
      ok = ok && g_m <= h / (n_b + g_b * a.p_b(i));
    }
    if (!ok) continue;
    ++bounded;
    Allocation up = a;
    Allocation down = a;
    up.c += 1e-6;
    down.c -= 1e-6;
    const double fd = (total_rate(link, up) - total_rate(link, down)) / 2e-6;
    const double bound = derivative_bound(k) + 1e-6;
    worst_ratio = std::max({worst_ratio, std::abs(dr_dc(link, a)) / bound, std::abs(fd) / bound});
  }
  const bool ok = worst_rel <= 1e-5 && worst_ratio <= 1.0;
  return {ok, "max relative error " + num(worst_rel) + " (tol 1e-5); max |dr/dc| / bound " +
                  num(worst_ratio) + " (must be <= 1)"};
}

// 6. Joint canceller and power search against an exhaustive K = 3 grid.
Outcome small_k_oracle() {
  std::mt19937_64 rng(1006);
  const double eps = 0.05;
  double worst = INFINITY;
  std::vector<double> cs;
  for (int i = 0; i <= 20; ++i) cs.push_back(1.0 + 0.1 * i);
  for (int t = 0; t < 20; ++t) {
    const double h_mb = log_uniform(rng, 0, 30);
    const double h_bm = log_uniform(rng, 0, 30);
    const double g_b = log_uniform(rng, -10, 15);
    const double g_m = log_uniform(rng, -15, 10);
    LinkInstance link = make_flat_link(3, h_mb, h_bm, {1, 1, FlatSic{g_b}}, {1, 1, QuadraticSic{g_m}});
    SolveOptions opts;
    opts.epsilon = eps;
    const auto sol = maximum_rate(link, opts);
    const double grid = test::k3_grid_best(h_mb, h_bm, 1.0, g_b, g_m, 20, cs);
    worst = std::min(worst, sol.sum_rate - grid);
  }
  return {worst >= -eps, "min (rate - grid best) = " + num(worst) + " b/s/Hz (must be >= -0.05, 20 instances)"};
}

// 7. High-SINR allocation: share window, stationarity, shape, center, scaling.
Outcome high_sinr_algorithm() {
  const double eps = 1e-6;
  double worst_resid = 0.0;
  bool window = true;
  bool shape = true;
  for (int k : {9, 17, 33, 65, 129}) {
    const auto link = calibrate_evaluation(k, 40.0);
    const auto r = hsinr_maximum_rate(link, eps);
    const double sum = r.alpha.sum();
    window = window && sum <= 1.0 && sum >= 1.0 - eps / (k + eps);
    const double c = 0.5 * (k + 1);
    const double n = link.ms.noise;
    auto rk = [&](int i) { return link.ms.p_max * residual_per_unit_power(link.ms.sic, (i + 1) - c); };
    const double level = r.alpha(k - 1) * (n + rk(k - 1) * r.alpha(k - 1));
    for (int i = 0; i < k; ++i) {
      const double lhs = r.alpha(i) * (n + rk(i) * r.alpha(i));
      worst_resid = std::max(worst_resid, std::abs(lhs - level) / level);
      shape = shape && std::abs(r.alpha(i) - r.alpha(k - 1 - i)) <= 1e-12 * r.alpha(i);
      if (std::abs(i + 2 - c) > std::abs(i + 1 - c) && i + 1 < k) {
        shape = shape && r.alpha(i + 1) <= r.alpha(i);
      }
    }
  }

  bool centered = true;
  for (int k : {9, 17, 33}) {
    const auto link = calibrate_evaluation(k, 40.0);
    double best = -INFINITY;
    double arg = 0.0;
    for (int i = 0; 1.0 + 0.1 * i <= k + 1e-9; ++i) {
      const double c = 1.0 + 0.1 * i;
      const double r = hsinr_rate(link, hsinr_allocation_at(link, c, eps).allocation);
      if (r > best) {
        best = r;
        arg = c;
      }
    }
    centered = centered && std::abs(arg - 0.5 * (k + 1)) <= 0.1 + 1e-9;
  }

  // Per-call time: best of several batches, each long enough to time reliably.
  std::vector<double> log_k;
  std::vector<double> log_t;
  for (int k : {9, 17, 33, 65, 129, 257, 513}) {
    const auto link = calibrate_evaluation(k, 40.0);
    double best = INFINITY;
    for (int batch = 0; batch < 5; ++batch) {
      int reps = 0;
      const auto t0 = std::chrono::steady_clock::now();
      double elapsed = 0.0;
      double sink = 0.0;
      while (elapsed < 0.02) {
        sink += hsinr_maximum_rate(link, eps).alpha(0);
        ++reps;
        elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
      if (sink < 0) std::puts("");
      best = std::min(best, elapsed / reps);
    }
    log_k.push_back(std::log(k));
    log_t.push_back(std::log(best));
  }
  const double mk = std::accumulate(log_k.begin(), log_k.end(), 0.0) / log_k.size();
  const double mt = std::accumulate(log_t.begin(), log_t.end(), 0.0) / log_t.size();
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < log_k.size(); ++i) {
    sxy += (log_k[i] - mk) * (log_t[i] - mt);
    sxx += (log_k[i] - mk) * (log_k[i] - mk);
  }
  const double slope = sxy / sxx;

  const bool ok = window && worst_resid <= 1e-10 && shape && centered && std::abs(slope - 1.0) <= 0.15;
  std::string d = std::string("share window ") + (window ? "ok" : "VIOLATED") +
                  ", stationarity residual " + num(worst_resid) + " (tol 1e-10), shape " +
                  (shape ? "ok" : "VIOLATED") + ", c-sweep " + (centered ? "centered" : "OFF CENTER") +
                  ", runtime slope " + num(slope) + " (1.0 +- 0.15)";
  return {ok, d};
}

// 8. Evaluation setup at K = 33 with the modeled profile.
Outcome evaluation_reproduction() {
  const int k = 33;
  SolveOptions opts;
  opts.delta_c = 0.01;

  const auto low = calibrate_evaluation(k, 0.0);
  const auto sol0 = maximum_rate(low, opts);
  const double max_pm0 = sol0.allocation.p_m.maxCoeff();
  const bool zero_ms = max_pm0 == 0.0;

  double worst_dev = 0.0;
  for (double g : {30.0, 40.0, 50.0}) {
    const auto link = calibrate_evaluation(k, g);
    const auto sol = maximum_rate(link, opts);
    const auto ref = hsinr_maximum_rate(link);
    for (int i = 0; i < k; ++i) {
      worst_dev = std::max(worst_dev, std::abs(sol.allocation.p_m(i) - ref.allocation.p_m(i)) /
                                          ref.allocation.p_m(i));
      worst_dev = std::max(worst_dev, std::abs(sol.allocation.p_b(i) - ref.allocation.p_b(i)) /
                                          ref.allocation.p_b(i));
    }
  }
  const bool close = worst_dev <= 0.05;

  const double eps_at_step = 0.01 * derivative_bound(k);
  const bool eps_ok = std::abs(eps_at_step - 0.2297) <= 1e-3 &&
                      std::abs(c_grid_step(k, eps_at_step) - 0.01) <= 1e-12;

  std::string d = std::string("0 dB: MS powers all zero ") + (zero_ms ? "yes" : "NO") +
                  " (max P_m = " + num(max_pm0) + ", c = " + num(sol0.allocation.c) +
                  "); 30/40/50 dB: max relative deviation from high-SINR " + num(worst_dev) +
                  " (tol 0.05); dc = 0.01 -> eps = " + num(eps_at_step) + (eps_ok ? "" : " MISMATCH");
  return {zero_ms && close && eps_ok, d};
}

// 9. Equal split against the optimizer under equal total irradiated power.
Outcome simple_policies() {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run({"sweep", "--ks", "9,17,33", "--gammas-db", "30,35,40,45,50", "--policies",
                             "maximum_rate,equal", "--normalize-total-power"},
                            out, err);
  if (code != 0) return {false, "sweep failed: " + err.str()};
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  std::vector<double> opt;
  std::vector<double> eq;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    (cells[2] == "maximum_rate" ? opt : eq).push_back(std::stod(cells[5]));
  }
  if (opt.size() != 15 || eq.size() != 15) return {false, "unexpected sweep shape"};
  double worst = 0.0;
  for (std::size_t i = 0; i < opt.size(); ++i) {
    worst = std::max(worst, std::abs(eq[i] - opt[i]) / opt[i]);
  }
  return {worst <= 0.02, "max relative gap equal vs optimized " + num(worst) +
                             " (tol 0.02, K in {9,17,33}, 30..50 dB)"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"extension p matches the scaling oracle", 5, extension_vs_scaling},
      {"single-channel winner matches the power grid", 60, trichotomy_vs_grid},
      {"FD gain below one bit where biconcavity fails", 30, gap_where_condition_fails},
      {"biconcavity along each power axis", 10, biconcavity},
      {"dr/dc closed form and derivative bound", 10, derivative_in_c},
      {"K = 3 joint search vs exhaustive grid", 300, small_k_oracle},
      {"high-SINR allocation properties and scaling", 60, high_sinr_algorithm},
      {"K = 33 evaluation: low and high SNR allocations", 600, evaluation_reproduction},
      {"equal split near-optimal at high SNR", 300, simple_policies},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s  [%zu] %s: %s; %.1f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", i + 1, c.name,
                o.detail.c_str(), secs, c.limit_s, in_time ? "" : " TIMEOUT");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
