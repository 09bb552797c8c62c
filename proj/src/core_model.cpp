#include "fdrate/core_model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fdrate/error.hpp"

namespace fdrate {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

void require_power(double p, double p_max, const char* what) {
  require(std::isfinite(p) && p >= 0.0 && p <= p_max * (1.0 + 1e-12), what);
}

}  // namespace

double TabulatedSic::analog_db_at(double offset) const {
  if (offset_hz.empty() || offset < offset_hz.front() ||
      offset > offset_hz.back()) {
    throw InputError("isolation lookup at offset " + std::to_string(offset) +
                     " Hz is outside the tabulated span");
  }
  auto hi = std::upper_bound(offset_hz.begin(), offset_hz.end(), offset);
  if (hi == offset_hz.end()) return isolation_db.back();
  const auto j = static_cast<std::size_t>(hi - offset_hz.begin());
  const std::size_t i = j - 1;
  const double t = (offset - offset_hz[i]) / (offset_hz[j] - offset_hz[i]);
  return isolation_db[i] + t * (isolation_db[j] - isolation_db[i]);
}

double TabulatedSic::residual_at(double offset) const {
  return db_to_linear(analog_db_at(offset) - digital_sic_db);
}

void validate(const SicProfile& sic) {
  std::visit(
      Overloaded{
          [](const FlatSic& s) {
            require(std::isfinite(s.g) && s.g >= 0.0, "flat SIC g must be >= 0");
          },
          [](const QuadraticSic& s) {
            require(std::isfinite(s.g_m) && s.g_m >= 0.0,
                    "quadratic SIC g_m must be >= 0");
          },
          [](const TabulatedSic& s) {
            require(s.offset_hz.size() == s.isolation_db.size() &&
                        s.offset_hz.size() >= 2,
                    "tabulated SIC needs matching offset/isolation columns");
            require(finite_positive(s.channel_width_hz),
                    "tabulated SIC channel width must be > 0");
            require(std::isfinite(s.digital_sic_db),
                    "digital SIC must be finite");
            for (std::size_t i = 0; i < s.offset_hz.size(); ++i) {
              require(std::isfinite(s.isolation_db[i]),
                      "tabulated isolation must be finite");
              if (i > 0) {
                require(s.offset_hz[i] > s.offset_hz[i - 1],
                        "tabulated offsets must be strictly increasing");
              }
            }
          },
      },
      sic);
}

double residual_per_unit_power(const SicProfile& sic, double offset_channels) {
  return std::visit(
      Overloaded{
          [](const FlatSic& s) { return s.g; },
          [&](const QuadraticSic& s) {
            return s.g_m * offset_channels * offset_channels;
          },
          [&](const TabulatedSic& s) {
            return s.residual_at(offset_channels * s.channel_width_hz);
          },
      },
      sic);
}

bool is_flat(const SicProfile& sic) {
  return std::holds_alternative<FlatSic>(sic);
}

void validate(const StationParams& station) {
  require(finite_positive(station.p_max), "p_max must be > 0");
  require(finite_positive(station.noise), "noise must be > 0");
  validate(station.sic);
}

double flat_fraction(const StationParams& station) {
  const auto* flat = std::get_if<FlatSic>(&station.sic);
  if (flat == nullptr) {
    throw std::invalid_argument(
        "single-channel analysis requires a flat SIC profile");
  }
  return flat->g;
}

void validate(const LinkInstance& link) {
  require(link.k_channels >= 1, "K must be >= 1");
  require(link.h_mb.size() == link.k_channels &&
              link.h_bm.size() == link.k_channels,
          "gain vectors must have length K");
  require(link.h_mb.allFinite() && link.h_bm.allFinite() &&
              (link.h_mb.array() > 0.0).all() &&
              (link.h_bm.array() > 0.0).all(),
          "channel gains must be finite and > 0");
  validate(link.bs);
  validate(link.ms);
  require(is_flat(link.bs.sic), "BS residual SI must be frequency-flat");
}

LinkInstance make_flat_link(int k_channels, double h_mb, double h_bm,
                            const StationParams& bs, const StationParams& ms) {
  require(k_channels >= 1, "K must be >= 1");
  LinkInstance link;
  link.k_channels = k_channels;
  link.h_mb = Vector::Constant(k_channels, h_mb);
  link.h_bm = Vector::Constant(k_channels, h_bm);
  link.bs = bs;
  link.ms = ms;
  validate(link);
  return link;
}

void validate(const LinkInstance& link, const Allocation& a) {
  const auto k = link.k_channels;
  require(a.p_b.size() == k && a.p_m.size() == k,
          "allocation vectors must have length K");
  require(std::isfinite(a.c), "canceller position must be finite");
  require(a.p_b.allFinite() && a.p_m.allFinite() &&
              (a.p_b.array() >= 0.0).all() && (a.p_m.array() >= 0.0).all(),
          "allocated powers must be finite and >= 0");
  require(a.p_b.sum() <= link.bs.p_max * (1.0 + 1e-9),
          "BS allocation exceeds its budget");
  require(a.p_m.sum() <= link.ms.p_max * (1.0 + 1e-9),
          "MS allocation exceeds its budget");
}

Allocation equal_allocation(const LinkInstance& link) {
  const auto k = link.k_channels;
  Allocation a;
  a.p_b = Vector::Constant(k, link.bs.p_max / k);
  a.p_m = Vector::Constant(k, link.ms.p_max / k);
  a.c = 0.5 * (k + 1);
  return a;
}

double xinr_ms(const StationParams& ms, double p, double k, double c) {
  require(std::isfinite(p) && p >= 0.0, "power must be >= 0");
  return p * residual_per_unit_power(ms.sic, k - c) / ms.noise;
}

double sum_rate_single(const StationParams& bs, const StationParams& ms,
                       double h_mb, double h_bm, double p_b, double p_m) {
  require_power(p_b, bs.p_max, "BS power outside [0, p_max]");
  require_power(p_m, ms.p_max, "MS power outside [0, p_max]");
  const double snr_ul = h_mb * p_m / bs.noise;
  const double snr_dl = h_bm * p_b / ms.noise;
  const double xinr_bs = flat_fraction(bs) * p_b / bs.noise;
  const double xinr_m = flat_fraction(ms) * p_m / ms.noise;
  return sinr_rate(snr_ul, xinr_bs) + sinr_rate(snr_dl, xinr_m);
}

double sum_rate_two_uni(const StationParams& bs, const StationParams& ms1,
                        const StationParams& ms2, double h_m1b, double h_bm2,
                        double h_m1m2, double p_m1, double p_b) {
  require_power(p_b, bs.p_max, "BS power outside [0, p_max]");
  require_power(p_m1, ms1.p_max, "MS1 power outside [0, p_max]");
  require(h_m1m2 >= 0.0, "inter-node gain must be >= 0");
  const double snr_ul = h_m1b * p_m1 / bs.noise;
  const double xinr_bs = flat_fraction(bs) * p_b / bs.noise;
  const double snr_dl = h_bm2 * p_b / ms2.noise;
  const double inr_m2 = h_m1m2 * p_m1 / ms2.noise;
  return sinr_rate(snr_ul, xinr_bs) + sinr_rate(snr_dl, inr_m2);
}

Eigen::MatrixX2d channel_rates(const LinkInstance& link, const Allocation& a) {
  const auto k = link.k_channels;
  const double g_b = flat_fraction(link.bs);
  const Eigen::ArrayXd snr_ul = link.h_mb.array() * a.p_m.array() / link.bs.noise;
  const Eigen::ArrayXd xinr_bs = g_b * a.p_b.array() / link.bs.noise;
  const Eigen::ArrayXd snr_dl = link.h_bm.array() * a.p_b.array() / link.ms.noise;

  Eigen::ArrayXd xinr_m(k);
  if (const auto* q = std::get_if<QuadraticSic>(&link.ms.sic)) {
    const Eigen::ArrayXd offset =
        Eigen::ArrayXd::LinSpaced(k, 1.0, static_cast<double>(k)) - a.c;
    xinr_m = q->g_m * offset.square() * a.p_m.array() / link.ms.noise;
  } else {
    for (Eigen::Index i = 0; i < k; ++i) {
      xinr_m(i) = xinr_ms(link.ms, a.p_m(i), static_cast<double>(i + 1), a.c);
    }
  }

  Eigen::MatrixX2d rates(k, 2);
  rates.col(0) = sinr_rate(snr_ul, xinr_bs).matrix();
  rates.col(1) = sinr_rate(snr_dl, xinr_m).matrix();
  return rates;
}

double total_rate(const LinkInstance& link, const Allocation& a) {
  return channel_rates(link, a).sum();
}

Vector water_fill(const Vector& snr_per_power, double budget) {
  const auto k = snr_per_power.size();
  require(k >= 1, "water filling needs at least one channel");
  require((snr_per_power.array() > 0.0).all(), "gains must be > 0");
  require(budget >= 0.0, "budget must be >= 0");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto lhs, auto rhs) {
    return snr_per_power(lhs) > snr_per_power(rhs);
  });

  // Largest active set whose water level stays above every member's floor.
  double inv_sum = 0.0;
  double level = 0.0;
  for (std::size_t n = 0; n < order.size(); ++n) {
    const double floor_n = 1.0 / snr_per_power(order[n]);
    const double candidate = (budget + inv_sum + floor_n) / double(n + 1);
    if (n > 0 && candidate <= floor_n) break;
    inv_sum += floor_n;
    level = candidate;
  }
  return (level - snr_per_power.array().inverse()).max(0.0).matrix();
}

double tdd_rate(const Vector& snr_per_power, double budget) {
  const Vector p = water_fill(snr_per_power, budget);
  return (1.0 + snr_per_power.array() * p.array()).log().sum() /
         std::numbers::ln2;
}

RateReport sum_rate_multi(const LinkInstance& link, const Allocation& a) {
  validate(link);
  validate(link, a);
  RateReport report;
  report.per_channel = channel_rates(link, a);
  report.sum_rate = report.per_channel.sum();
  report.tdd_ul_max = tdd_rate(link.h_mb / link.bs.noise, link.ms.p_max);
  report.tdd_dl_max = tdd_rate(link.h_bm / link.ms.noise, link.bs.p_max);
  report.tdd_max = std::max(report.tdd_ul_max, report.tdd_dl_max);
  const double ul = report.per_channel.col(0).sum();
  const double dl = report.per_channel.col(1).sum();
  report.extension_p =
      std::max(ul / report.tdd_ul_max + dl / report.tdd_dl_max - 1.0, 0.0);
  return report;
}

}  // namespace fdrate
