#pragma once

#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace fdrate {

using Vector = Eigen::VectorXd;

/// Base-2 logarithm used for every rate in the library. Derivatives divide by
/// the same constant, so keep this the only place ln 2 enters a rate.
template <typename Scalar>
inline Scalar rate_log2(Scalar x) {
  using std::log;
  return log(x) / Scalar(std::numbers::ln2);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

// ---------------------------------------------------------------------------
// Residual self-interference profiles
// ---------------------------------------------------------------------------

/// Frequency-flat residual SI: RSI = g * P.
struct FlatSic {
  double g = 0.0;
};

/// Frequency-selective residual SI of a compact canceller:
/// RSI_k = g_m * P_k * (k - c)^2, with k and c in channel-index units.
struct QuadraticSic {
  double g_m = 0.0;
};

/// Measured TX/RX isolation re-expressed against the offset from the
/// canceller's peak-cancellation frequency. Samples are kept in dB and
/// interpolated linearly in dB; lookups outside the sampled span throw
/// InputError.
struct TabulatedSic {
  std::vector<double> offset_hz;     // strictly increasing
  std::vector<double> isolation_db;  // analog isolation, negative = suppression
  double digital_sic_db = 0.0;       // extra flat cancellation, positive dB
  double channel_width_hz = 0.0;     // B / K, converts (k - c) to Hz

  /// Analog isolation in dB at `offset`, linearly interpolated.
  double analog_db_at(double offset) const;
  /// Total residual SI per unit transmit power (linear), digital included.
  double residual_at(double offset) const;
};

using SicProfile = std::variant<FlatSic, QuadraticSic, TabulatedSic>;

/// Throws std::invalid_argument when the profile violates its invariants.
void validate(const SicProfile& sic);

/// Residual SI per unit transmit power at a canceller offset of
/// `offset_channels` channel widths. Flat profiles ignore the offset.
double residual_per_unit_power(const SicProfile& sic, double offset_channels);

/// True when the profile is a FlatSic; single-channel analyses require it.
bool is_flat(const SicProfile& sic);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct StationParams {
  double p_max = 1.0;  // total transmit-power budget
  double noise = 1.0;  // per-channel thermal noise
  SicProfile sic = FlatSic{};
};

void validate(const StationParams& station);

/// Flat residual-SI fraction g of a station; throws std::invalid_argument for
/// frequency-selective profiles.
double flat_fraction(const StationParams& station);

struct LinkInstance {
  int k_channels = 1;
  Vector h_mb;  // MS -> BS gain per channel
  Vector h_bm;  // BS -> MS gain per channel
  StationParams bs;
  StationParams ms;
};

/// Checks sizes, positivity and the flat-BS requirement.
void validate(const LinkInstance& link);

/// Channel-flat link: every channel shares the same gains.
LinkInstance make_flat_link(int k_channels, double h_mb, double h_bm,
                            const StationParams& bs, const StationParams& ms);

struct Allocation {
  Vector p_b;
  Vector p_m;
  double c = 1.0;  // canceller position in channel-index units
};

/// Nonnegativity and budgets, with 1e-9 relative slack on the budgets.
void validate(const LinkInstance& link, const Allocation& a);

/// Equal split of both budgets with the canceller at the band center.
Allocation equal_allocation(const LinkInstance& link);

struct RateReport {
  Eigen::MatrixX2d per_channel;  // column 0: uplink, column 1: downlink
  double sum_rate = 0.0;
  double tdd_ul_max = 0.0;
  double tdd_dl_max = 0.0;
  double tdd_max = 0.0;
  double extension_p = 0.0;
};

// ---------------------------------------------------------------------------
// Rate arithmetic
// ---------------------------------------------------------------------------

/// Shannon rate of an interference-limited link, elementwise over arrays:
/// log2(1 + snr / (1 + inr)).
template <typename DerivedS, typename DerivedI>
auto sinr_rate(const Eigen::ArrayBase<DerivedS>& snr,
               const Eigen::ArrayBase<DerivedI>& inr) {
  return ((1.0 + snr / (1.0 + inr)).log() / std::numbers::ln2);
}

inline double sinr_rate(double snr, double inr) {
  return rate_log2(1.0 + snr / (1.0 + inr));
}

/// XINR at the MS on channel k with canceller at c:
/// residual SI / noise = p * rsi(k - c) / N_m.
double xinr_ms(const StationParams& ms, double p, double k, double c);

/// Single-channel bidirectional sum rate. Both stations must use FlatSic.
double sum_rate_single(const StationParams& bs, const StationParams& ms,
                       double h_mb, double h_bm, double p_b, double p_m);

/// Two unidirectional links through a full-duplex BS: MS1 uplink, MS2
/// downlink, uncancelled MS1 -> MS2 interference.
double sum_rate_two_uni(const StationParams& bs, const StationParams& ms1,
                        const StationParams& ms2, double h_m1b, double h_bm2,
                        double h_m1m2, double p_m1, double p_b);

/// Per-channel uplink and downlink rates of an OFDM link.
Eigen::MatrixX2d channel_rates(const LinkInstance& link, const Allocation& a);

/// Per-channel rates, total, TDD baselines and capacity-region extension.
RateReport sum_rate_multi(const LinkInstance& link, const Allocation& a);

/// Sum rate only; the hot path of the optimizers, so inputs are not validated.
double total_rate(const LinkInstance& link, const Allocation& a);

/// Interference-free water-filling: maximizes sum_k log2(1 + snr_per_power_k P_k)
/// subject to sum_k P_k <= budget. Closed form over the sorted gains.
Vector water_fill(const Vector& snr_per_power, double budget);

/// Best single-direction (TDD) rate with the full budget water-filled.
double tdd_rate(const Vector& snr_per_power, double budget);

}  // namespace fdrate
