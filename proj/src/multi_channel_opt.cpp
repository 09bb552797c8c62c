#include "fdrate/multi_channel_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "fdrate/error.hpp"

namespace fdrate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// One channel's rate (in nats) as a function of a single station's power P,
/// with the other station's power fixed:
///   f(P) = ln(1 + a P) + ln(1 + b / (1 + s P))
/// a: own SNR per unit power, s: XINR per unit power caused at the other
/// receiver, b: the other direction's SNR.
struct ChannelTerm {
  double a;
  double s;
  double b;

  double slope(double p) const {
    const double u = 1.0 + s * p;
    return a / (1.0 + a * p) - s * b / (u * (u + b));
  }
  double curvature(double p) const {
    const double v = 1.0 + a * p;
    const double u = 1.0 + s * p;
    return -a * a / (v * v) + s * s * b * (2.0 * u + b) / (u * u * (u + b) * (u + b));
  }
};

/// Power in [0, cap] where the slope equals mu. The slope is nonincreasing
/// under the biconcavity constraints; a safeguarded Newton iteration keeps a
/// bracket in case it is not.
double power_at_slope(const ChannelTerm& t, double mu, double cap, double tol) {
  if (cap <= 0.0) return 0.0;
  if (t.slope(0.0) <= mu) return 0.0;
  if (t.slope(cap) >= mu) return cap;

  double lo = 0.0;
  double hi = cap;
  double x = mu > 0.0 ? std::clamp(1.0 / mu - 1.0 / t.a, lo, hi) : 0.5 * cap;
  if (x <= lo || x >= hi) x = 0.5 * (lo + hi);
  for (int it = 0; it < 100 && hi - lo > tol; ++it) {
    const double g = t.slope(x) - mu;
    if (g > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double d = t.curvature(x);
    double next = d < 0.0 ? x - g / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 0.25 * tol) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

/// Maximizes sum_k f_k(P_k) subject to sum_k P_k <= budget and
/// 0 <= P_k <= cap_k, by bisection on the budget multiplier.
Vector solve_block(const std::vector<ChannelTerm>& terms, const Vector& cap,
                   double budget, double rel_tol, double p_tol) {
  const auto k = static_cast<Eigen::Index>(terms.size());
  Vector p(k);
  auto fill = [&](double mu) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      p(i) = power_at_slope(terms[static_cast<std::size_t>(i)], mu,
                            std::min(cap(i), budget), p_tol);
      total += p(i);
    }
    return total;
  };

  if (fill(0.0) <= budget) return p;

  double lo = 0.0;
  double hi = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (cap(i) > 0.0) hi = std::max(hi, terms[static_cast<std::size_t>(i)].slope(0.0));
  }
  if (!std::isfinite(hi)) throw NumericError("non-finite rate derivative");
  const double width = rel_tol * hi;
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    const double total = fill(mid);
    if (total > budget) {
      lo = mid;
    } else {
      hi = mid;
      if (budget - total <= 1e-13 * budget) break;
    }
  }
  fill(hi);
  return p;
}

/// Link quantities at a fixed canceller position, in per-unit-power form.
struct FixedCProblem {
  Vector snr_ul;   // h_mb / N_b
  Vector snr_dl;   // h_bm / N_m
  Vector xinr_ms;  // RSI_k per unit power / N_m
  double xinr_bs;  // g_b / N_b
  double budget_b;
  double budget_m;

  FixedCProblem(const LinkInstance& link, double c)
      : snr_ul(link.h_mb / link.bs.noise),
        snr_dl(link.h_bm / link.ms.noise),
        xinr_ms(link.k_channels),
        xinr_bs(flat_fraction(link.bs) / link.bs.noise),
        budget_b(link.bs.p_max),
        budget_m(link.ms.p_max) {
    for (int i = 0; i < link.k_channels; ++i) {
      xinr_ms(i) = residual_per_unit_power(link.ms.sic, (i + 1) - c) / link.ms.noise;
    }
    if (!snr_ul.allFinite() || !snr_dl.allFinite() || !xinr_ms.allFinite() ||
        !std::isfinite(xinr_bs)) {
      throw NumericError("non-finite link quantities");
    }
  }

  double rate(const Vector& p_b, const Vector& p_m) const {
    const Eigen::ArrayXd ul = snr_ul.array() * p_m.array();
    const Eigen::ArrayXd dl = snr_dl.array() * p_b.array();
    return (sinr_rate(ul, xinr_bs * p_b.array()) +
            sinr_rate(dl, xinr_ms.array() * p_m.array()))
        .sum();
  }

  std::vector<ChannelTerm> ms_terms(const Vector& p_b) const {
    std::vector<ChannelTerm> terms(static_cast<std::size_t>(p_b.size()));
    for (Eigen::Index i = 0; i < p_b.size(); ++i) {
      terms[static_cast<std::size_t>(i)] = {snr_ul(i) / (1.0 + xinr_bs * p_b(i)),
                                            xinr_ms(i), snr_dl(i) * p_b(i)};
    }
    return terms;
  }

  std::vector<ChannelTerm> bs_terms(const Vector& p_m) const {
    std::vector<ChannelTerm> terms(static_cast<std::size_t>(p_m.size()));
    for (Eigen::Index i = 0; i < p_m.size(); ++i) {
      terms[static_cast<std::size_t>(i)] = {snr_dl(i) / (1.0 + xinr_ms(i) * p_m(i)),
                                            xinr_bs, snr_ul(i) * p_m(i)};
    }
    return terms;
  }
};

Vector initial_split(const Vector& cap, double budget, std::mt19937_64* rng) {
  const auto k = cap.size();
  Vector weights = Vector::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (cap(i) <= 0.0) continue;
    if (rng == nullptr) {
      weights(i) = 1.0;
    } else {
      weights(i) = std::exponential_distribution<double>(1.0)(*rng);
    }
  }
  const double total = weights.sum();
  if (total <= 0.0) return Vector::Zero(k);
  return (weights * (budget / total)).cwiseMin(cap);
}

struct AscentResult {
  Vector p_b;
  Vector p_m;
  double rate;
  int iterations;
  std::vector<double> trace;
};

AscentResult alternate(const FixedCProblem& prob, const Vector& cap_b,
                       const Vector& cap_m, Vector p_b, Vector p_m,
                       const SolveOptions& opts) {
  AscentResult out;
  double rate = prob.rate(p_b, p_m);
  out.trace.push_back(rate);
  const double p_tol_m = 1e-12 * prob.budget_m;
  const double p_tol_b = 1e-12 * prob.budget_b;

  int it = 0;
  for (; it < opts.max_outer_iters; ++it) {
    const double start = rate;

    Vector cand_m = solve_block(prob.ms_terms(p_b), cap_m, prob.budget_m,
                                opts.bisection_tol, p_tol_m);
    double cand = prob.rate(p_b, cand_m);
    if (!std::isfinite(cand)) throw NumericError("non-finite sum rate");
    if (cand >= rate) {
      p_m = std::move(cand_m);
      rate = cand;
    }
    out.trace.push_back(rate);

    Vector cand_b = solve_block(prob.bs_terms(p_m), cap_b, prob.budget_b,
                                opts.bisection_tol, p_tol_b);
    cand = prob.rate(cand_b, p_m);
    if (!std::isfinite(cand)) throw NumericError("non-finite sum rate");
    if (cand >= rate) {
      p_b = std::move(cand_b);
      rate = cand;
    }
    out.trace.push_back(rate);

    if (rate - start < opts.inner_tol) {
      ++it;
      break;
    }
  }
  out.p_b = std::move(p_b);
  out.p_m = std::move(p_m);
  out.rate = rate;
  out.iterations = it;
  return out;
}

}  // namespace

double unit_offset_xinr(const StationParams& ms) {
  if (const auto* q = std::get_if<QuadraticSic>(&ms.sic)) return q->g_m / ms.noise;
  if (const auto* f = std::get_if<FlatSic>(&ms.sic)) return f->g / ms.noise;
  // Measured profile: one channel either side of the canceller, whichever
  // side the table covers.
  double worst = -1.0;
  for (double offset : {-1.0, 1.0}) {
    try {
      worst = std::max(worst, residual_per_unit_power(ms.sic, offset));
    } catch (const InputError&) {
    }
  }
  if (worst < 0.0) {
    throw InputError("measured SIC profile does not cover a one-channel offset");
  }
  return worst / ms.noise;
}

std::vector<ChannelConstraint> build_constraints(const LinkInstance& link,
                                                 double c) {
  validate(link);
  if (!std::isfinite(c)) throw std::invalid_argument("c must be finite");
  const double n_b = link.bs.noise;
  const double n_m = link.ms.noise;
  const double g_b = flat_fraction(link.bs);
  const double unit = unit_offset_xinr(link.ms);

  std::vector<ChannelConstraint> cons(static_cast<std::size_t>(link.k_channels));
  for (int i = 0; i < link.k_channels; ++i) {
    auto& con = cons[static_cast<std::size_t>(i)];
    const double h_mb = link.h_mb(i);
    const double h_bm = link.h_bm(i);
    // MS XINR per unit power on this channel.
    const double s = residual_per_unit_power(link.ms.sic, (i + 1) - c) / n_m;

    // (a) concavity in P_m,k
    if (s < h_mb / n_b) {
      if (s > 0.0 && g_b > 0.0) {
        con.p_b_upper = std::min(con.p_b_upper, (h_mb / s - n_b) / g_b);
      }
    } else {
      con.ms_forced_zero = true;
    }

    // (b) concavity in P_b,k
    if (g_b / n_b < h_bm / n_m) {
      if (s > 0.0 && g_b > 0.0) {
        con.p_m_upper = (h_bm * n_b / g_b - n_m) / (s * n_m);
      }
    } else if (!con.ms_forced_zero) {
      con.bs_forced_zero = true;
    }

    // bounded |dr/dc|
    if (unit < h_mb / n_b) {
      if (unit > 0.0 && g_b > 0.0) {
        con.p_b_upper = std::min(con.p_b_upper, (h_mb / unit - n_b) / g_b);
      }
    } else {
      con.ms_forced_zero = true;
    }

    con.p_b_upper = std::max(con.p_b_upper, 0.0);
    con.p_m_upper = std::max(con.p_m_upper, 0.0);
  }
  return cons;
}

Solution solve_fixed_c(const LinkInstance& link, double c,
                       const std::vector<ChannelConstraint>& constraints,
                       const SolveOptions& opts) {
  validate(link);
  if (constraints.size() != static_cast<std::size_t>(link.k_channels)) {
    throw std::invalid_argument("one constraint per channel required");
  }
  if (!(opts.inner_tol > 0.0 && opts.bisection_tol > 0.0 &&
        opts.max_outer_iters > 0 && opts.multi_start >= 1)) {
    throw std::invalid_argument("solver options must be positive");
  }
  const FixedCProblem prob(link, c);
  Vector cap_b(link.k_channels);
  Vector cap_m(link.k_channels);
  for (int i = 0; i < link.k_channels; ++i) {
    cap_b(i) = constraints[static_cast<std::size_t>(i)].bs_cap();
    cap_m(i) = constraints[static_cast<std::size_t>(i)].ms_cap();
  }

  AscentResult best;
  best.rate = -kInf;
  for (int start = 0; start < opts.multi_start; ++start) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(start));
    std::mt19937_64* seed = start == 0 ? nullptr : &rng;
    Vector p_b = initial_split(cap_b, prob.budget_b, seed);
    Vector p_m = initial_split(cap_m, prob.budget_m, seed);
    AscentResult run = alternate(prob, cap_b, cap_m, std::move(p_b),
                                 std::move(p_m), opts);
    if (run.rate > best.rate) best = std::move(run);
  }

  Solution sol;
  sol.allocation = Allocation{std::move(best.p_b), std::move(best.p_m), c};
  sol.sum_rate = best.rate;
  sol.outer_iterations = best.iterations;
  sol.ascent = std::move(best.trace);
  return sol;
}

double derivative_bound(int k_channels) {
  if (k_channels < 2) throw std::invalid_argument("derivative bound needs K >= 2");
  return (2.0 / std::numbers::ln2) *
         (std::log(static_cast<double>(k_channels)) + 1.0 + 2.0 * std::sqrt(3.0));
}

double c_grid_step(int k_channels, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  return epsilon / derivative_bound(k_channels);
}

Solution maximum_rate(const LinkInstance& link, const SolveOptions& opts) {
  validate(link);
  if (link.k_channels < 2) {
    throw std::invalid_argument(
        "maximum_rate needs K >= 2; use single_channel_optimum for K = 1");
  }
  if (opts.delta_c < 0.0) throw std::invalid_argument("delta_c must be >= 0");
  const double step = opts.delta_c > 0.0 ? opts.delta_c
                                         : c_grid_step(link.k_channels, opts.epsilon);
  const auto upper = static_cast<double>(link.k_channels);
  const auto n = static_cast<std::size_t>(std::ceil((upper - 1.0) / step));
  std::vector<double> grid;
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = 1.0 + static_cast<double>(i) * step;
    if (c >= upper) break;
    grid.push_back(c);
  }

  std::vector<Solution> results(grid.size());
  SolveOptions inner = opts;
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      results[i] = solve_fixed_c(link, grid[i], build_constraints(link, grid[i]), inner);
      results[i].ascent.clear();
    }
  };

  unsigned workers = opts.threads > 0 ? static_cast<unsigned>(opts.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(grid.size()));
  if (workers <= 1) {
    work(0, grid.size());
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (grid.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(grid.size(), begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].sum_rate > results[best].sum_rate) best = i;
  }
  return std::move(results[best]);
}

double dr_dc(const LinkInstance& link, const Allocation& a) {
  validate(link);
  validate(link, a);
  const auto* q = std::get_if<QuadraticSic>(&link.ms.sic);
  if (q == nullptr) {
    throw std::invalid_argument("dr_dc requires the quadratic MS profile");
  }
  const Eigen::ArrayXd offset =
      Eigen::ArrayXd::LinSpaced(link.k_channels, 1.0, link.k_channels) - a.c;
  const Eigen::ArrayXd slope = q->g_m * a.p_m.array() / link.ms.noise;
  const Eigen::ArrayXd xinr = slope * offset.square();
  const Eigen::ArrayXd snr_dl = link.h_bm.array() * a.p_b.array() / link.ms.noise;
  return (2.0 / std::numbers::ln2) *
         (slope * snr_dl * offset / ((1.0 + snr_dl + xinr) * (1.0 + xinr))).sum();
}

}  // namespace fdrate
