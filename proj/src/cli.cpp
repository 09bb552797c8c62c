#include "fdrate/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdrate/core_model.hpp"
#include "fdrate/error.hpp"
#include "fdrate/high_sinr.hpp"
#include "fdrate/multi_channel_opt.hpp"
#include "fdrate/sic_ingest.hpp"
#include "fdrate/single_channel.hpp"

namespace fdrate::cli {

namespace {

using nlohmann::json;

// 12 significant digits everywhere; the same value always prints the same.
std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double round12(double x) { return std::stod(fmt(x)); }

json to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(round12(v(i)));
  return arr;
}

int thread_budget(int requested) {
  int n = requested > 0 ? requested
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("FD_RATER_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

// ---------------------------------------------------------------------------
// single / capregion
// ---------------------------------------------------------------------------

struct LinkFlags {
  double snr_ul_db = 0.0;
  double snr_dl_db = 0.0;
  double xinr_bs = 0.0;
  double xinr_ms = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("--snr-ul-db", snr_ul_db, "Uplink SNR at full MS power (dB)")->required();
    app->add_option("--snr-dl-db", snr_dl_db, "Downlink SNR at full BS power (dB)")->required();
    app->add_option("--xinr-bs", xinr_bs, "BS XINR at full power (linear)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--xinr-ms", xinr_ms, "MS XINR at full power (linear)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }

  // Unit noise and unit budgets: gains equal the full-power SNRs and XINRs.
  StationParams bs() const { return {1.0, 1.0, FlatSic{xinr_bs}}; }
  StationParams ms() const { return {1.0, 1.0, FlatSic{xinr_ms}}; }
  double h_mb() const { return db_to_linear(snr_ul_db); }
  double h_bm() const { return db_to_linear(snr_dl_db); }
};

struct SingleCmd {
  LinkFlags link;
  double p_b = 1.0;
  double p_m = 1.0;
  bool as_json = false;

  void run(std::ostream& out) const {
    const auto bs = link.bs();
    const auto ms = link.ms();
    const double rate = sum_rate_single(bs, ms, link.h_mb(), link.h_bm(), p_b, p_m);
    const auto best = single_channel_optimum(bs, ms, link.h_mb(), link.h_bm());
    const double p = capacity_extension_p(bs, ms, link.h_mb(), link.h_bm());
    const double tdd = std::max(best.tdd_ul_rate, best.tdd_dl_rate);
    if (as_json) {
      json j{{"rate", round12(rate)},
             {"fd_rate", round12(best.fd_rate)},
             {"tdd_ul_rate", round12(best.tdd_ul_rate)},
             {"tdd_dl_rate", round12(best.tdd_dl_rate)},
             {"tdd_max", round12(tdd)},
             {"winner", to_string(best.winner)},
             {"optimum_rate", round12(best.rate)},
             {"p", round12(p)}};
      out << j.dump(2) << "\n";
      return;
    }
    out << "rate," << fmt(rate) << "\n"
        << "fd_rate," << fmt(best.fd_rate) << "\n"
        << "tdd_ul_rate," << fmt(best.tdd_ul_rate) << "\n"
        << "tdd_dl_rate," << fmt(best.tdd_dl_rate) << "\n"
        << "tdd_max," << fmt(tdd) << "\n"
        << "winner," << to_string(best.winner) << "\n"
        << "optimum_rate," << fmt(best.rate) << "\n"
        << "p," << fmt(p) << "\n";
  }
};

struct CapRegionCmd {
  LinkFlags link;
  int points = 50;

  void run(std::ostream& out) const {
    const auto pts = trace_capacity_boundary(link.bs(), link.ms(), link.h_mb(),
                                             link.h_bm(), points);
    const double dl_max = rate_log2(1.0 + link.h_bm());
    const double ul_max = rate_log2(1.0 + link.h_mb());
    out << "r_dl_norm,r_ul_norm\n";
    for (const auto& pt : pts) {
      out << fmt(pt.r_dl / dl_max) << "," << fmt(pt.r_ul / ul_max) << "\n";
    }
  }
};

// ---------------------------------------------------------------------------
// two-uni
// ---------------------------------------------------------------------------

struct TwoUniCmd {
  double eta = 4.0;
  double rho = 1.0;
  double gamma_max_db = 30.0;
  double xinr_bs = 1.0;
  double snr_min_db = 0.0;
  double snr_step_db = 1.0;

  void run(std::ostream& out) const {
    if (!(snr_step_db > 0.0)) throw std::invalid_argument("--snr-step-db must be > 0");
    if (snr_min_db > gamma_max_db) {
      throw std::invalid_argument("--snr-min-db exceeds --gamma-max-db");
    }
    const auto n = static_cast<Eigen::Index>(
        std::floor((gamma_max_db - snr_min_db) / snr_step_db + 1e-9)) + 1;
    Vector db(n);
    for (Eigen::Index i = 0; i < n; ++i) db(i) = snr_min_db + snr_step_db * i;
    const Vector lin = db.unaryExpr([](double x) { return db_to_linear(x); });

    TwoUniGeometry geom;
    geom.eta = eta;
    geom.rho = rho;
    geom.gamma_m1b_max = geom.gamma_bm2_max = geom.gamma_m1m2_max =
        db_to_linear(gamma_max_db);
    const Eigen::MatrixXd p = two_uni_extension_map(geom, xinr_bs, lin, lin);

    out << "gamma_m1b_db,gamma_bm2_db,p\n";
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        out << fmt(db(i)) << "," << fmt(db(j)) << "," << fmt(p(i, j)) << "\n";
      }
    }
  }
};

// ---------------------------------------------------------------------------
// multiopt / hsinr / sweep
// ---------------------------------------------------------------------------

struct EvalFlags {
  int k = 33;
  double gamma_avg_db = 0.0;
  std::string sic = "model";
  double digital_sic_db = 50.0;
  std::optional<double> center_freq_hz;
  std::optional<double> channel_width_hz;
  std::optional<double> edge_xinr;

  void add_to(CLI::App* app, bool with_gamma) {
    app->add_option("--k", k, "Number of channels")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    if (with_gamma) {
      app->add_option("--gamma-avg-db", gamma_avg_db, "Average per-channel SNR (dB)")->required();
    }
    app->add_option("--sic", sic, "MS SIC profile: model or trace:PATH")->capture_default_str();
    app->add_option("--digital-sic-db", digital_sic_db,
                    "Digital cancellation added to a measured trace (dB)")
        ->capture_default_str();
    app->add_option("--center-freq-hz", center_freq_hz,
                    "Canceller center in the trace (default: deepest isolation)");
    app->add_option("--channel-width-hz", channel_width_hz,
                    "Channel width (default: band for K divided by K)");
    app->add_option("--edge-xinr", edge_xinr,
                    "Band-edge MS XINR of the modeled profile (default per K)");
  }

  LinkInstance link(int k_channels, double gamma_db) const {
    LinkInstance link = calibrate_evaluation(k_channels, gamma_db, edge_xinr);
    if (sic == "model") return link;
    if (sic.rfind("trace:", 0) != 0) {
      throw std::invalid_argument("--sic must be 'model' or 'trace:PATH'");
    }
    const auto trace = load_trace(sic.substr(6));
    const double fc = center_freq_hz.value_or(deepest_isolation_freq(trace));
    const double width =
        channel_width_hz.value_or(default_bandwidth_hz(k_channels) / k_channels);
    link.ms.sic = to_profile(trace, fc, digital_sic_db, width);
    return link;
  }
};

struct SolverFlags {
  double epsilon = 0.2;
  double delta_c = 0.0;
  int threads = 0;

  void add_to(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "Target sum-rate error of the canceller grid")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--delta-c", delta_c, "Explicit canceller grid step (overrides --epsilon)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--threads", threads, "Worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
  }

  SolveOptions options() const {
    SolveOptions o;
    o.epsilon = epsilon;
    o.delta_c = delta_c;
    o.threads = thread_budget(threads);
    return o;
  }
};

void emit_allocation(std::ostream& out, const LinkInstance& link,
                     const Allocation& a, bool as_csv) {
  const auto report = sum_rate_multi(link, a);
  if (as_csv) {
    out << "k,p_b,p_m,r_ul,r_dl\n";
    for (int i = 0; i < link.k_channels; ++i) {
      out << (i + 1) << "," << fmt(a.p_b(i)) << "," << fmt(a.p_m(i)) << ","
          << fmt(report.per_channel(i, 0)) << "," << fmt(report.per_channel(i, 1)) << "\n";
    }
    return;
  }
  json j{{"c", round12(a.c)},
         {"p_b", to_json(a.p_b)},
         {"p_m", to_json(a.p_m)},
         {"rate", round12(report.sum_rate)},
         {"tdd_max", round12(report.tdd_max)},
         {"extension_p", round12(report.extension_p)}};
  out << j.dump(2) << "\n";
}

struct MultiOptCmd {
  EvalFlags eval;
  SolverFlags solver;
  bool as_csv = false;

  void run(std::ostream& out) const {
    const auto link = eval.link(eval.k, eval.gamma_avg_db);
    const auto sol = maximum_rate(link, solver.options());
    emit_allocation(out, link, sol.allocation, as_csv);
  }
};

struct HsinrCmd {
  EvalFlags eval;
  double epsilon = 1e-6;
  std::optional<double> c;
  bool as_csv = false;

  void run(std::ostream& out) const {
    const auto link = eval.link(eval.k, eval.gamma_avg_db);
    const auto res = c ? hsinr_allocation_at(link, *c, epsilon)
                       : hsinr_maximum_rate(link, epsilon);
    emit_allocation(out, link, res.allocation, as_csv);
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

// Scales both power vectors so the total irradiated power equals that of TDD,
// where a single station transmits its full budget.
Allocation normalize_total_power(const LinkInstance& link, Allocation a) {
  const double total = a.p_b.sum() + a.p_m.sum();
  const double tdd_total = std::max(link.bs.p_max, link.ms.p_max);
  if (total > tdd_total) {
    const double s = tdd_total / total;
    a.p_b *= s;
    a.p_m *= s;
  }
  return a;
}

struct SweepCmd {
  EvalFlags eval;
  SolverFlags solver;
  std::string ks = "9,17,33";
  std::string gammas = "0,5,10,15,20,25,30,35,40,45,50";
  std::string policies = "maximum_rate,hsinr,equal";
  bool normalize = false;

  void run(std::ostream& out) const {
    std::vector<int> k_list;
    for (const auto& s : split_list(ks)) k_list.push_back(std::stoi(s));
    std::vector<double> g_list;
    for (const auto& s : split_list(gammas)) g_list.push_back(std::stod(s));
    const auto pol = split_list(policies);
    for (const auto& p : pol) {
      if (p != "maximum_rate" && p != "hsinr" && p != "equal") {
        throw std::invalid_argument("unknown policy '" + p + "'");
      }
    }
    if (k_list.empty() || g_list.empty() || pol.empty()) {
      throw std::invalid_argument("empty sweep");
    }

    out << "k,gamma_avg_db,policy,normalized,c,sum_rate,tdd_max,extension_p\n";
    for (int k : k_list) {
      for (double g : g_list) {
        const auto link = eval.link(k, g);
        for (const auto& p : pol) {
          Allocation a;
          if (p == "maximum_rate") {
            a = maximum_rate(link, solver.options()).allocation;
          } else if (p == "hsinr") {
            a = hsinr_maximum_rate(link).allocation;
          } else {
            a = equal_allocation(link);
          }
          if (normalize) a = normalize_total_power(link, a);
          const auto r = sum_rate_multi(link, a);
          out << k << "," << fmt(g) << "," << p << "," << (normalize ? 1 : 0) << ","
              << fmt(a.c) << "," << fmt(r.sum_rate) << "," << fmt(r.tdd_max) << ","
              << fmt(r.extension_p) << "\n";
        }
      }
    }
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Full-duplex rate analysis", "fd_rater"};
  app.require_subcommand(1);

  SingleCmd single;
  auto* s = app.add_subcommand("single", "Single-channel rates, winner and extension p");
  single.link.add_to(s);
  s->add_option("--p-b", single.p_b, "BS power as a fraction of its budget")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  s->add_option("--p-m", single.p_m, "MS power as a fraction of its budget")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  s->add_flag("--json", single.as_json, "Print JSON instead of key,value lines");

  CapRegionCmd cap;
  auto* cr = app.add_subcommand("capregion", "FD capacity-region boundary as CSV");
  cap.link.add_to(cr);
  cr->add_option("--points", cap.points, "Points per sweep")
      ->check(CLI::Range(1, 1000000))
      ->capture_default_str();

  TwoUniCmd two;
  auto* tu = app.add_subcommand("two-uni", "Extension p over an SNR grid for two unidirectional links");
  tu->add_option("--eta", two.eta, "Path-loss exponent")->check(CLI::PositiveNumber)->capture_default_str();
  tu->add_option("--rho", two.rho, "d_m1m2 / (d_m1b + d_bm2)")->check(CLI::PositiveNumber)->capture_default_str();
  tu->add_option("--gamma-max-db", two.gamma_max_db, "SNR/INR at the reference distance (dB)")
      ->capture_default_str();
  tu->add_option("--xinr-bs", two.xinr_bs, "BS XINR at full power (linear)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  tu->add_option("--snr-min-db", two.snr_min_db, "Lowest SNR on the grid (dB)")->capture_default_str();
  tu->add_option("--snr-step-db", two.snr_step_db, "Grid step (dB)")->capture_default_str();

  MultiOptCmd multi;
  auto* mo = app.add_subcommand("multiopt", "Joint canceller placement and power allocation");
  multi.eval.add_to(mo, true);
  multi.solver.add_to(mo);
  mo->add_flag("--csv", multi.as_csv, "Per-channel CSV instead of JSON");

  HsinrCmd hs;
  auto* hc = app.add_subcommand("hsinr", "High-SINR power allocation");
  hs.eval.add_to(hc, true);
  hc->add_option("--epsilon", hs.epsilon, "Share-sum tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  hc->add_option("--c", hs.c, "Canceller position (default (K+1)/2)");
  hc->add_flag("--csv", hs.as_csv, "Per-channel CSV instead of JSON");

  SweepCmd sweep;
  auto* sw = app.add_subcommand("sweep", "Sum rate and extension p versus gamma_avg");
  sweep.eval.add_to(sw, false);
  sweep.solver.add_to(sw);
  sw->add_option("--ks", sweep.ks, "Comma-separated channel counts")->capture_default_str();
  sw->add_option("--gammas-db", sweep.gammas, "Comma-separated gamma_avg values (dB)")->capture_default_str();
  sw->add_option("--policies", sweep.policies, "maximum_rate, hsinr, equal")->capture_default_str();
  sw->add_flag("--normalize-total-power", sweep.normalize,
               "Scale allocations to the TDD total irradiated power");

  std::vector<const char*> argv{"fd_rater"};
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (s->parsed()) single.run(out);
    else if (cr->parsed()) cap.run(out);
    else if (tu->parsed()) two.run(out);
    else if (mo->parsed()) multi.run(out);
    else if (hc->parsed()) hs.run(out);
    else if (sw->parsed()) sweep.run(out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

}  // namespace fdrate::cli
