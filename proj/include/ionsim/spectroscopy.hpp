#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ionsim/dynamics.hpp"
#include "ionsim/hilbert.hpp"
#include "ionsim/modes.hpp"

namespace ionsim {

struct NoiseSpec {
  enum class Kind { none, gaussian, counting };
  Kind kind = Kind::none;
  double sigma = 0.0;         // gaussian: rms in signal units
  double mean_photons = 0.0;  // counting: mean photons per bright ion

  nlohmann::json to_json() const;
  static NoiseSpec from_json(const nlohmann::json& j);
};

struct ModeState {
  Mode mode;
  OccupationDist dist;
};

struct ScanConfig {
  double delta_min = 0.0;  // rad/s relative to the carrier
  double delta_max = 0.0;
  double step = 0.0;
  double t_pr = 0.0;
  double omega = 0.0;  // base Rabi frequency, rad/s
  double theta = 0.0;
  double phi = 0.0;
  std::vector<ModeState> mode_states;
  bool include_carrier = true;
  double background = 0.0;
  NoiseSpec noise;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct Spectrum {
  std::vector<std::pair<double, double>> points;  // (delta rad/s, signal)
  nlohmann::json metadata;
};

// Eq.-style fluorescence signal: expected number of ions in the bright state,
// in [0, 2]. Resonant drives use the closed form; detuned drives use the
// rotating-frame numeric evolution.
double signal(const OccupationDist& dist, const DriveParams& drive,
              double t_pr);

Spectrum scan(const ScanConfig& cfg);

// Probe time maximizing the resonant feature depth 2 - S, searched over
// (0, t_max].
double optimal_probe_time(const OccupationDist& dist, const DriveParams& drive,
                          double t_max);

struct PeakFit {
  double center = 0.0;  // rad/s
  double depth = 0.0;   // signal units
  double width = 0.0;   // gaussian sigma, rad/s
  double residual = 0.0;  // rms

  nlohmann::json to_json() const;  // keys center_hz, depth, width_hz, residual
};

struct FitOptions {
  double max_residual = 1e9;
  double min_depth = 1e-9;
  // Largest allowed |center - guess| as a fraction of the window. Values < 1
  // also start the fit at the guess instead of the deepest sample, which
  // suppresses the noise-latching bias when the feature location is known.
  double max_center = 1.0;
};

// Least-squares Gaussian-plus-constant-background fit of the feature within
// +-window of each guess. Throws FitDiverged per the options.
std::vector<PeakFit> fit_peaks(const Spectrum& spec,
                               const std::vector<double>& guesses,
                               double window, const FitOptions& opts = {});
PeakFit fit_peak(const Spectrum& spec, double guess, double window,
                 const FitOptions& opts = {});

// Inverts the fitted lower/upper depth ratio against the thermal forward
// model at the given probe time. Returns 0 when the lower depth is at or
// below noise_floor; throws NoRoot for ratios no thermal state reaches.
double estimate_nbar(const PeakFit& lower, const PeakFit& upper,
                     const DriveParams& drive_template, double t_pr,
                     double noise_floor = 0.0);

struct ProbeConfig {
  double omega = 0.0;
  double t_pr = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  double span = 0.0;        // half-width scanned around each sideband, rad/s
  double step = 0.0;
  double fit_window = 0.0;  // 0 = span
  double background = 0.0;
  NoiseSpec noise;
  std::uint64_t seed = 0;
};

// Synthesizes local lower/upper sideband scans of one mode and inverts the
// sideband asymmetry.
double measure_nbar(const Mode& mode, const OccupationDist& dist,
                    const ProbeConfig& probe);

// heat() then measure for each delay; returns (delay_ms, nbar_estimate).
std::vector<std::pair<double, double>> heating_scan(
    const Mode& mode, const OccupationDist& initial,
    const std::vector<double>& delays_ms, double rate_per_ms,
    const ProbeConfig& probe);

// Ordinary least-squares slope of y vs x.
double linear_slope(const std::vector<std::pair<double, double>>& points);

// CSV: header "delta_hz,signal", one point per line, LF endings, 9
// significant digits.
void write_spectrum_csv(std::ostream& os, const Spectrum& spec);
Spectrum read_spectrum_csv(std::istream& is);

std::string format_sig9(double v);

}  // namespace ionsim
