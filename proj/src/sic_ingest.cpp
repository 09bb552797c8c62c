#include "fdrate/sic_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <vector>

#include <Eigen/QR>

#include "fdrate/error.hpp"

namespace fdrate {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

bool parse_number(const std::string& field, double* out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  char* end = nullptr;
  *out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(*out);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw InputError("trace line " + std::to_string(line) + ": " + what);
}

}  // namespace

const char* to_string(AntennaInterface i) {
  switch (i) {
    case AntennaInterface::Pair: return "pair";
    case AntennaInterface::Circulator: return "circulator";
    case AntennaInterface::Unknown: break;
  }
  return "unknown";
}

IsolationTrace parse_trace(std::istream& in) {
  IsolationTrace trace;
  std::vector<double> freq;
  std::vector<double> iso;
  std::string raw;
  int line = 0;
  bool seen_data = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const std::string body = lower(trim(text.substr(1)));
      if (body.rfind("interface:", 0) == 0) {
        const std::string tag = trim(body.substr(10));
        if (tag == "pair") {
          trace.interface = AntennaInterface::Pair;
        } else if (tag == "circulator") {
          trace.interface = AntennaInterface::Circulator;
        } else {
          fail(line, "unknown antenna interface '" + tag + "'");
        }
      }
      continue;
    }

    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
      fail(line, "expected two comma-separated fields");
    }
    double f = 0.0;
    double db = 0.0;
    const bool ok = parse_number(text.substr(0, comma), &f) &&
                    parse_number(text.substr(comma + 1), &db);
    if (!ok) {
      if (!seen_data && lower(text).find("freq") != std::string::npos) {
        seen_data = true;  // header row
        continue;
      }
      fail(line, "malformed row '" + text + "'");
    }
    seen_data = true;
    if (!freq.empty() && f <= freq.back()) {
      fail(line, "frequency " + text.substr(0, comma) +
                     " does not increase strictly");
    }
    freq.push_back(f);
    iso.push_back(db);
  }
  if (freq.size() < 3) {
    throw InputError("trace needs at least 3 rows, found " +
                     std::to_string(freq.size()));
  }
  trace.freq_hz = Eigen::Map<const Vector>(freq.data(), static_cast<Eigen::Index>(freq.size()));
  trace.isolation_db = Eigen::Map<const Vector>(iso.data(), static_cast<Eigen::Index>(iso.size()));
  return trace;
}

IsolationTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace file " + path.string());
  return parse_trace(in);
}

double deepest_isolation_freq(const IsolationTrace& trace) {
  Eigen::Index idx = 0;
  trace.isolation_db.minCoeff(&idx);
  return trace.freq_hz(idx);
}

TabulatedSic to_profile(const IsolationTrace& trace, double center_freq_hz,
                        double digital_sic_db, double channel_width_hz) {
  if (trace.freq_hz.size() < 3) throw InputError("trace needs at least 3 rows");
  if (center_freq_hz < trace.freq_hz(0) ||
      center_freq_hz > trace.freq_hz(trace.freq_hz.size() - 1)) {
    throw InputError("canceller center frequency lies outside the trace");
  }
  if (!(channel_width_hz > 0.0)) {
    throw std::invalid_argument("channel width must be > 0");
  }
  TabulatedSic sic;
  sic.offset_hz.resize(static_cast<std::size_t>(trace.freq_hz.size()));
  sic.isolation_db.resize(sic.offset_hz.size());
  for (Eigen::Index i = 0; i < trace.freq_hz.size(); ++i) {
    sic.offset_hz[static_cast<std::size_t>(i)] = trace.freq_hz(i) - center_freq_hz;
    sic.isolation_db[static_cast<std::size_t>(i)] = trace.isolation_db(i);
  }
  sic.digital_sic_db = digital_sic_db;
  sic.channel_width_hz = channel_width_hz;
  validate(SicProfile{sic});
  return sic;
}

double fit_gm(const IsolationTrace& trace, double band_lo_hz, double band_hi_hz,
              int k_channels, double center_freq_hz) {
  if (!(band_hi_hz > band_lo_hz)) throw std::invalid_argument("empty band");
  if (k_channels < 1) throw std::invalid_argument("K must be >= 1");
  const double scale = k_channels / (band_hi_hz - band_lo_hz);

  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < trace.freq_hz.size(); ++i) {
    if (trace.freq_hz(i) >= band_lo_hz && trace.freq_hz(i) <= band_hi_hz) {
      rows.push_back(i);
    }
  }
  if (rows.size() < 3) throw InputError("fewer than 3 samples inside the band");

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixX2d design(n, 2);
  Vector target(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = rows[static_cast<std::size_t>(r)];
    const double offset = (trace.freq_hz(i) - center_freq_hz) * scale;
    design(r, 0) = 1.0;
    design(r, 1) = offset * offset;
    target(r) = db_to_linear(trace.isolation_db(i));
  }
  // Column scaling keeps the QR rank decision independent of units.
  const double col_norm = design.col(1).norm();
  if (col_norm == 0.0) throw InputError("degenerate fit: all offsets are zero");
  design.col(1) /= col_norm;
  Eigen::ColPivHouseholderQR<Eigen::MatrixX2d> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 2) throw InputError("degenerate fit: offsets do not vary");
  const Eigen::Vector2d coef = qr.solve(target);
  return std::max(coef(1) / col_norm, 0.0);
}

double edge_xinr_for(int k_channels) {
  switch (k_channels) {
    case 33: return 35.0;
    case 17: return 8.5;
    case 9: return 2.5;
    default: break;
  }
  const double half = 0.5 * (k_channels - 1);
  return 35.0 * half * half / 256.0;
}

LinkInstance calibrate_evaluation(int k_channels, double gamma_avg_db,
                                  std::optional<double> edge_xinr) {
  if (k_channels < 2) throw std::invalid_argument("calibration needs K >= 2");
  if (!std::isfinite(gamma_avg_db)) throw std::invalid_argument("gamma_avg must be finite");
  const double k = k_channels;
  const double p_max = 1.0;
  const double noise = db_to_linear(-110.0) * p_max / k;
  const double gamma_avg = db_to_linear(gamma_avg_db);
  const double edge = edge_xinr.value_or(edge_xinr_for(k_channels));
  if (!(edge >= 0.0)) throw std::invalid_argument("edge XINR must be >= 0");
  const double half = 0.5 * (k - 1.0);

  StationParams bs{p_max, noise, FlatSic{noise * k / p_max}};
  StationParams ms{p_max, noise, QuadraticSic{edge * noise * k / (p_max * half * half)}};
  const double h = gamma_avg * k * noise / p_max;
  return make_flat_link(k_channels, h, h, bs, ms);
}

double default_bandwidth_hz(int k_channels) {
  switch (k_channels) {
    case 33: return 20e6;
    case 17: return 10e6;
    case 9: return 5e6;
    default: break;
  }
  return k_channels * (20e6 / 33.0);
}

}  // namespace fdrate
