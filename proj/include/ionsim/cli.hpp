#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ionsim/modes.hpp"
#include "ionsim/spectroscopy.hpp"

namespace ionsim {

inline constexpr const char* kPresetNist1998 = "nist-two-ion-1998";

struct PhysicsConfig {
  double trap_x_hz = 0.0;
  double trap_y_hz = 0.0;
  double trap_z_hz = 0.0;
  double mass_u = 0.0;
  double wavelength_m = 0.0;
  RamanGeometry beam_geometry = RamanGeometry::perpendicular;
  double rabi_frequency_hz = 0.0;
  double linewidth_hz = 0.0;

  double mass_kg() const;
  TrapFrequencies trap() const;
  BeamGeometry beams() const;
  ModeTable mode_table() const;
};

struct SpectrumBlock {
  double range_min_hz = 0.0;
  double range_max_hz = 0.0;
  double step_hz = 0.0;
  double probe_time_s = 0.0;  // 0 = auto (maximize the sideband features)
  // Empty = Doppler-limit thermal state for every mode.
  std::vector<std::pair<std::string, double>> mode_nbars;
  bool include_carrier = true;
  double background = 0.0;
  NoiseSpec noise;
};

struct CoolBlock {
  std::string mode = "xCOM";
  int pulses = 0;
  std::vector<double> durations_s;  // empty = optimize
  double t_max_s = 20e-6;
  double repump_recoil = -1.0;  // <0 = recoil energy / (hbar omega_m)
  double initial_nbar = -1.0;   // <0 = Doppler limit
};

struct HeatScanBlock {
  std::string mode = "xCOM";
  double rate_per_ms = 0.0;
  std::vector<double> delays_ms;
  double initial_nbar = -1.0;  // <0 = Doppler limit
  double probe_time_s = 0.0;   // 0 = auto
  double span_hz = 0.0;        // 0 = auto
  double step_hz = 0.0;        // 0 = auto
  double background = 0.0;
  NoiseSpec noise;
};

struct FitBlock {
  std::string input_csv;
  std::vector<double> guesses_hz;
  double window_hz = 0.0;
};

struct BudgetBlock {
  double spectator_eta = -1.0;  // <0 = xCOM mode eta from the physics block
  double n2_spread = 1.0;
  double fidelity_floor = 0.5;
};

struct RunConfig {
  std::optional<std::string> preset;
  PhysicsConfig physics;  // resolved (preset expanded)
  bool explicit_physics = false;
  std::optional<std::uint64_t> seed;

  std::optional<SpectrumBlock> spectrum;
  std::optional<CoolBlock> cool;
  std::optional<HeatScanBlock> heat_scan;
  std::optional<FitBlock> fit;
  std::optional<BudgetBlock> budget;

  nlohmann::json to_json() const;  // emits in the accepted schema
};

PhysicsConfig preset_physics(const std::string& name);

// Strict parse: unknown keys are errors; exactly one of preset / physics;
// seed required whenever noise != none.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Executes one subcommand, writing output files under out_dir. Returns the
// process exit status; on failure writes a machine-readable error record to
// err as JSON.
int run_subcommand(const std::string& subcommand, const RunConfig& cfg,
                   const std::string& out_dir, std::ostream& out,
                   std::ostream& err);

}  // namespace ionsim
