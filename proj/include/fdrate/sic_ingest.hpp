#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "fdrate/core_model.hpp"

namespace fdrate {

enum class AntennaInterface { Unknown, Pair, Circulator };

const char* to_string(AntennaInterface i);

/// Measured TX/RX isolation versus frequency.
struct IsolationTrace {
  Vector freq_hz;       // strictly increasing
  Vector isolation_db;  // negative = suppression
  AntennaInterface interface = AntennaInterface::Unknown;
};

/// Reads `freq_hz,isolation_db` CSV. Lines starting with '#' are comments; a
/// `# interface: pair|circulator` comment sets the antenna interface. An
/// optional header row naming the two columns is skipped. Throws InputError
/// naming the offending line.
IsolationTrace parse_trace(std::istream& in);
IsolationTrace load_trace(const std::filesystem::path& path);

/// Frequency of the deepest isolation sample.
double deepest_isolation_freq(const IsolationTrace& trace);

/// Re-expresses the trace against the offset from center_freq_hz (assumed
/// shift-invariant when the canceller is retuned) and adds digital_sic_db of
/// flat cancellation.
TabulatedSic to_profile(const IsolationTrace& trace, double center_freq_hz,
                        double digital_sic_db, double channel_width_hz);

/// Least-squares fit of linear isolation over [band_lo_hz, band_hi_hz] to
/// floor + g_m * ((f - center) * K / B)^2, B = band_hi - band_lo. Returns g_m
/// (clamped at 0), i.e. residual SI per unit power per squared channel offset
/// before digital cancellation.
double fit_gm(const IsolationTrace& trace, double band_lo_hz, double band_hi_hz,
              int k_channels, double center_freq_hz);

/// Band-edge MS XINR at an equal power split with the canceller centered:
/// 35 for K = 33, 8.5 for K = 17, 2.5 for K = 9. Other K keep g_m fixed in
/// absolute terms relative to K = 33 (same channel width, noise ~ 1/K).
double edge_xinr_for(int k_channels);

/// Evaluation link: unit budgets, per-channel noise 110 dB below the
/// equal-split transmit power, g_b p_max_b / K = N_b, flat gains with
/// h p_max / N = gamma_avg * K, and the quadratic MS profile tuned to the
/// band-edge XINR.
LinkInstance calibrate_evaluation(int k_channels, double gamma_avg_db,
                                  std::optional<double> edge_xinr = std::nullopt);

/// Default total bandwidth for K: 20 MHz (33), 10 MHz (17), 5 MHz (9),
/// otherwise K channels of 20 MHz / 33.
double default_bandwidth_hz(int k_channels);

}  // namespace fdrate
