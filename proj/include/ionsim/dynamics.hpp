#pragma once

#include <complex>

#include "ionsim/hilbert.hpp"

namespace ionsim {

// One Raman drive addressing a single feature (carrier or first sideband)
// of one motional mode, in the rotating frame of that feature.
struct DriveParams {
  double omega = 0.0;     // base two-photon Rabi frequency, rad/s
  double eta = 0.0;       // mode Lamb-Dicke parameter
  int sideband = 0;       // -1 lower, 0 carrier, +1 upper
  double detuning = 0.0;  // rad/s relative to the addressed feature
  double theta = 0.0;     // sum of Raman beam phases at the two ions
  double phi = 0.0;       // difference of Raman beam phases
  int mode_sign = +1;     // +1 COM, -1 stretch/differential

  void validate() const;

  static double rabi_from_single_photon(double g1, double g2,
                                        double raman_detuning) {
    return g1 * g2 / raman_detuning;
  }
};

enum class SidebandDirection { lower, upper };

// eta*sqrt(n)*Omega (lower) or eta*sqrt(n+1)*Omega (upper). The lower
// sideband vanishes at n = 0.
double single_ion_sideband_rabi(int n, SidebandDirection direction, double eta,
                                double omega);

// Pulse-area frequency of the |dd,n> lower-sideband evolution,
// sqrt(2(2n-1)) * omega * eta.
double collective_sideband_frequency(int n, double omega, double eta);

// Closed-form resonant evolution of |dd,n> on the first lower sideband.
// Requires sideband == -1 and detuning == 0; throws InvalidSideband otherwise.
SpinMotionState two_ion_lower_sideband_evolve(int n, const DriveParams& drive,
                                              double t);

// Closed-form resonant evolution of |dd,n> on the first upper sideband
// (ladder reflection of the lower-sideband solution; validated against the
// numeric propagator, not against a printed formula).
SpinMotionState two_ion_upper_sideband_evolve(int n, const DriveParams& drive,
                                              double t);

// Amplitudes of the four-state manifold reachable from |dd,n> under one
// drive, at arbitrary detuning. Exact (eigendecomposition of the 4x4
// rotating-frame Hamiltonian); used for spectral lineshapes.
struct SubspaceAmplitudes {
  std::complex<double> dd, du, ud, uu;
  int n_dd, n_flip, n_uu;  // motional levels of the dd, single-flip, uu rows
};

SubspaceAmplitudes evolve_from_ground_pair(int n, const DriveParams& drive,
                                           double t);

struct StepControl {
  double substep_factor = 450.0;  // steps per characteristic period / 2*pi
  double norm_tol = 1e-8;         // hard failure threshold on norm drift
  double tail_tol = 1e-8;         // top-two-level population triggering regrowth
  int max_truncation = 1024;
};

// Independent fixed-step RK4 integration of the rotating-frame coupling,
// including the detuning term. Grows the truncation when population reaches
// the top two Fock levels; throws TruncationOverflow at the regrowth cap.
SpinMotionState propagate_numeric(const SpinMotionState& state,
                                  const DriveParams& drive, double t,
                                  const StepControl& ctrl = {});

// First-sideband Rabi frequency on mode 1 with spectator mode 2 in |n2>:
// Omega * eta1 * sqrt(n1>) * exp(-(eta1^2+eta2^2)/2) * (1 - n2*eta2^2).
// The linear factor's zero crossing at n2*eta2^2 = 1 is a model boundary.
double spectator_corrected_rabi(int n1, int n1p, double eta1, double eta2,
                                int n2, double omega);

}  // namespace ionsim
