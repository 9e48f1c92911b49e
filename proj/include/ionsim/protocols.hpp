#pragma once

#include <limits>
#include <vector>

#include "ionsim/dynamics.hpp"
#include "ionsim/hilbert.hpp"
#include "ionsim/modes.hpp"

namespace ionsim {

// One Raman-cooling configuration: repeated (sideband pulse, repump) cycles
// on a single target mode.
struct CoolingCycleConfig {
  ModeId target_mode = ModeId::xCOM;
  int pulses = 0;
  std::vector<double> pulse_durations;  // empty = optimize per pulse
  double repump_recoil = 0.0;           // d(nbar) per repumped ion
  double repump_photons_per_ion = 1.0;
  DriveParams drive;  // sideband must be -1

  void validate() const;
};

struct HeatingModel {
  double com_rate = 0.0;  // quanta/ms
  double d = 0.0;         // trap characteristic dimension, m
  double delta_x = 0.0;   // ion-ion separation, m
};

// Recoil energy over hbar*omega_m for one scattered photon of wavevector k.
double recoil_nbar_per_event(double photon_k, double mass_kg, double omega_m);

// Doppler limit nbar = gamma / (2 omega_m).
OccupationDist doppler_init(const Mode& mode, double gamma);
OccupationDist doppler_init(double omega_m, double gamma);

// One cooling cycle: lower-sideband pulse of duration t applied to each
// populated level, then repump (spin reset preserving each branch's motional
// level) and recoil heating.
OccupationDist raman_cool_cycle(const OccupationDist& dist,
                                const CoolingCycleConfig& cfg, double t);

// Greedy per-pulse optimization of k pulse durations over (0, t_max].
std::vector<double> optimize_pulse_durations(const OccupationDist& dist,
                                             const CoolingCycleConfig& cfg,
                                             int k, double t_max);

struct CoolingTrajectoryPoint {
  int cycle;        // 0 = initial state
  double nbar;
  double ground_fraction;
  double duration;  // pulse duration that produced this point (0 for initial)
};

// Runs cfg.pulses cycles (optimizing durations when none are given) and
// records the trajectory.
std::vector<CoolingTrajectoryPoint> run_cooling(const OccupationDist& initial,
                                                const CoolingCycleConfig& cfg,
                                                double t_max);

// Thermalizing heating map: nbar -> nbar + rate*dt.
OccupationDist heat(const OccupationDist& dist, double rate_per_ms, double dt_ms);

// (delta_x / d)^2: differential-to-COM heating-rate ratio under a uniform
// stochastic field.
double heating_rate_ratio(const HeatingModel& model);

inline constexpr int kNoOperationsLimit = std::numeric_limits<int>::max();

// Number of sequential sideband pi-pulses before the accumulated pulse-area
// error from spectator-driven Rabi fluctuations (fractional spread
// n2_spread * eta2^2 per pulse) drives the worst-case fidelity product below
// fidelity_floor. Returns kNoOperationsLimit when eta2 == 0.
int operations_budget(double eta2, double n2_spread, double fidelity_floor);

}  // namespace ionsim
