#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "ionsim/constants.hpp"
#include "ionsim/dynamics.hpp"
#include "ionsim/errors.hpp"

using namespace ionsim;

namespace {

DriveParams preset_drive(int sideband, int mode_sign, double theta = 0.0,
                        double phi = 0.0) {
  DriveParams d;
  d.omega = hz_to_rad(250e3);
  d.eta = 0.163;
  d.sideband = sideband;
  d.theta = theta;
  d.phi = phi;
  d.mode_sign = mode_sign;
  return d;
}

double max_amplitude_diff(const SpinMotionState& a, const SpinMotionState& b) {
  REQUIRE(a.truncation() == b.truncation());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.amplitudes()[i] - b.amplitudes()[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("single-ion sideband Rabi frequencies") {
  const double omega = hz_to_rad(250e3);
  CHECK(single_ion_sideband_rabi(1, SidebandDirection::lower, 0.23, omega) ==
        doctest::Approx(hz_to_rad(57.5e3)).epsilon(1e-12));
  CHECK(single_ion_sideband_rabi(0, SidebandDirection::lower, 0.23, omega) == 0.0);
  CHECK(single_ion_sideband_rabi(3, SidebandDirection::upper, 0.23, omega) ==
        doctest::Approx(2.0 * 0.23 * omega).epsilon(1e-12));
}

TEST_CASE("lower-sideband closed form: edge cases") {
  SUBCASE("n = 0 is dark") {
    const SpinMotionState s =
        two_ion_lower_sideband_evolve(0, preset_drive(-1, +1), 3e-6);
    CHECK(std::abs(s.at(SpinPair::dd, 0) - 1.0) < 1e-15);
    CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-14));
  }

  SUBCASE("n = 1, Gt = pi/2 puts everything in the Bell branch") {
    const DriveParams d = preset_drive(-1, +1, 0.4, 1.1);
    const double g = collective_sideband_frequency(1, d.omega, d.eta);
    const SpinMotionState s = two_ion_lower_sideband_evolve(1, d, (kPi / 2.0) / g);
    const auto pops = s.populations_by_spin();
    CHECK(pops[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pops[3] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::norm(s.at(SpinPair::du, 0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::norm(s.at(SpinPair::ud, 0)) == doctest::Approx(0.5).epsilon(1e-12));
    // Relative phase between the two Bell components is phi.
    const std::complex<double> rel =
        s.at(SpinPair::ud, 0) / s.at(SpinPair::du, 0);
    CHECK(std::arg(rel) == doctest::Approx(1.1).epsilon(1e-12));
  }

  SUBCASE("n = 2, Gt = pi: P(dd) = 1/9, P(uu) = 8/9, Bell branch empty") {
    const DriveParams d = preset_drive(-1, +1);
    const double g = collective_sideband_frequency(2, d.omega, d.eta);
    const SpinMotionState s = two_ion_lower_sideband_evolve(2, d, kPi / g);
    const auto pops = s.populations_by_spin();
    CHECK(pops[0] == doctest::Approx(1.0 / 9.0).epsilon(1e-10));
    CHECK(pops[3] == doctest::Approx(8.0 / 9.0).epsilon(1e-10));
    CHECK(pops[1] + pops[2] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(std::norm(s.at(SpinPair::uu, 0)) == doctest::Approx(8.0 / 9.0).epsilon(1e-10));
  }

  SUBCASE("preconditions") {
    CHECK_THROWS_AS(two_ion_lower_sideband_evolve(1, preset_drive(0, +1), 1e-6),
                    InvalidSideband);
    DriveParams detuned = preset_drive(-1, +1);
    detuned.detuning = 1e3;
    CHECK_THROWS_AS(two_ion_lower_sideband_evolve(1, detuned, 1e-6),
                    InvalidSideband);
  }
}

TEST_CASE("closed-form norm is exactly one on a Gt grid") {
  for (int mode_sign : {+1, -1}) {
    for (int n : {1, 2, 3, 7, 12}) {
      const DriveParams d = preset_drive(-1, mode_sign, 0.3, -0.7);
      const double g = collective_sideband_frequency(n, d.omega, d.eta);
      for (int j = 1; j <= 40; ++j) {
        const double t = 0.37 * j / g;
        CHECK(two_ion_lower_sideband_evolve(n, d, t).norm() ==
              doctest::Approx(1.0).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("numeric propagator basics") {
  SUBCASE("t = 0 is the identity") {
    const SpinMotionState s0 = product_state(SpinPair::dd, 2, 6);
    const SpinMotionState s = propagate_numeric(s0, preset_drive(-1, +1), 0.0);
    CHECK(max_amplitude_diff(s0, s) == 0.0);
  }

  SUBCASE("resonant carrier pi-pulse flips both ions") {
    DriveParams d;
    d.omega = hz_to_rad(250e3);
    d.sideband = 0;
    const SpinMotionState s0 = product_state(SpinPair::dd, 3, 6);
    const SpinMotionState s = propagate_numeric(s0, d, kPi / d.omega);
    const auto pops = s.populations_by_spin();
    CHECK(pops[3] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::norm(s.at(SpinPair::uu, 3)) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("closed form agrees with the numeric propagator") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  for (int mode_sign : {+1, -1}) {
    for (int n : {1, 2, 3, 5, 9}) {
      const DriveParams d = preset_drive(-1, mode_sign, phase(rng), phase(rng));
      const double g = collective_sideband_frequency(n, d.omega, d.eta);
      const SpinMotionState s0 = product_state(SpinPair::dd, n, n + 2);
      for (int j = 1; j <= 10; ++j) {
        const double t = (4.0 * kPi * j / 10.0) / g;
        const SpinMotionState closed = two_ion_lower_sideband_evolve(n, d, t);
        const SpinMotionState numeric = propagate_numeric(s0, d, t);
        CHECK(max_amplitude_diff(closed.grown(numeric.truncation()), numeric) <
              1e-8);
        CHECK(std::abs(numeric.norm() - 1.0) < 1e-10);
      }
    }
  }
}

TEST_CASE("upper-sideband closed form agrees with the numeric propagator") {
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  for (int mode_sign : {+1, -1}) {
    for (int n : {0, 1, 2, 4}) {
      const DriveParams d = preset_drive(+1, mode_sign, phase(rng), phase(rng));
      const double g =
          std::sqrt(2.0 * (2.0 * n + 3.0)) * d.omega * d.eta;
      const SpinMotionState s0 = product_state(SpinPair::dd, n, n + 4);
      for (int j = 1; j <= 8; ++j) {
        const double t = (3.0 * kPi * j / 8.0) / g;
        const SpinMotionState closed = two_ion_upper_sideband_evolve(n, d, t);
        const SpinMotionState numeric = propagate_numeric(s0, d, t);
        CHECK(max_amplitude_diff(closed.grown(numeric.truncation()), numeric) <
              1e-8);
      }
    }
  }
}

TEST_CASE("subspace evolution matches the full propagator off resonance") {
  std::mt19937 rng(44);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  std::uniform_real_distribution<double> det(-5e5, 5e5);
  for (int sideband : {-1, 0, +1}) {
    for (int n : {0, 1, 3}) {
      DriveParams d = preset_drive(sideband, n % 2 == 0 ? +1 : -1, phase(rng),
                                  phase(rng));
      d.detuning = det(rng);
      const double t = 4e-6;
      const SubspaceAmplitudes fast = evolve_from_ground_pair(n, d, t);
      const SpinMotionState full =
          propagate_numeric(product_state(SpinPair::dd, n, n + 4), d, t);
      CHECK(std::abs(fast.dd - full.at(SpinPair::dd, n)) < 1e-8);
      if (n + sideband >= 0) {
        CHECK(std::abs(fast.du - full.at(SpinPair::du, n + sideband)) < 1e-8);
        CHECK(std::abs(fast.ud - full.at(SpinPair::ud, n + sideband)) < 1e-8);
      }
      if (n + 2 * sideband >= 0) {
        CHECK(std::abs(fast.uu - full.at(SpinPair::uu, n + 2 * sideband)) < 1e-8);
      }
    }
  }
}

TEST_CASE("oscillation frequency of P(dd) matches G within 0.1%") {
  for (int n : {1, 2, 5}) {
    const DriveParams d = preset_drive(-1, +1);
    const double g = collective_sideband_frequency(n, d.omega, d.eta);
    const double period = kTwoPi / g;
    // P(dd) is periodic with period 2*pi/G; locate its return to 1 by
    // parabolic refinement around the expected period.
    double best_t = 0.0, best_p = -1.0;
    const int kSamples = 600;
    for (int j = 0; j < kSamples; ++j) {
      const double t = period * (0.9 + 0.2 * j / (kSamples - 1));
      const SpinMotionState s = two_ion_lower_sideband_evolve(n, d, t);
      const double p = s.populations_by_spin()[0];
      if (p > best_p) {
        best_p = p;
        best_t = t;
      }
    }
    CHECK(kTwoPi / best_t == doctest::Approx(g).epsilon(1e-3));
  }
}

TEST_CASE("detuned carrier follows the generalized Rabi formula") {
  DriveParams d;
  d.omega = hz_to_rad(100e3);
  d.sideband = 0;
  for (double delta_hz : {30e3, 80e3, 150e3}) {
    d.detuning = hz_to_rad(delta_hz);
    const double rabi = std::hypot(d.omega, d.detuning);
    const SpinMotionState s0 = product_state(SpinPair::dd, 0, 2);
    const SpinMotionState s = propagate_numeric(s0, d, kPi / rabi);
    const auto pops = s.populations_by_spin();
    const double per_ion_transfer = 0.5 * (pops[1] + pops[2] + 2.0 * pops[3]);
    const double expected = d.omega * d.omega / (rabi * rabi);
    CHECK(per_ion_transfer == doctest::Approx(expected).epsilon(1e-7));
  }
}

TEST_CASE("truncation overflow is reported, not hidden") {
  DriveParams d = preset_drive(+1, +1);
  StepControl ctrl;
  ctrl.max_truncation = 3;
  const SpinMotionState s0 = product_state(SpinPair::dd, 2, 3);
  const double g = std::sqrt(2.0 * 7.0) * d.omega * d.eta;
  CHECK_THROWS_AS(propagate_numeric(s0, d, kPi / g, ctrl), TruncationOverflow);
}

TEST_CASE("spectator-corrected Rabi frequency") {
  const double omega = hz_to_rad(250e3);
  SUBCASE("no spectator") {
    CHECK(spectator_corrected_rabi(1, 0, 0.23, 0.0, 0, omega) ==
          doctest::Approx(omega * 0.23 * std::exp(-0.23 * 0.23 / 2.0))
              .epsilon(1e-12));
  }
  SUBCASE("fractional change per spectator quantum is eta2^2") {
    const double eta2 = 0.1626;
    const double r0 = spectator_corrected_rabi(1, 0, 0.12, eta2, 0, omega);
    const double r1 = spectator_corrected_rabi(1, 0, 0.12, eta2, 1, omega);
    CHECK(r1 / r0 == doctest::Approx(1.0 - eta2 * eta2).epsilon(1e-12));
    CHECK(1.0 - r1 / r0 == doctest::Approx(0.02644).epsilon(2e-3));
  }
  SUBCASE("zero crossing at n2 * eta2^2 = 1") {
    const double eta2 = 0.1;
    CHECK(spectator_corrected_rabi(1, 2, 0.2, eta2, 100, omega) ==
          doctest::Approx(0.0));
  }
  SUBCASE("requires a first-sideband transition") {
    CHECK_THROWS(spectator_corrected_rabi(2, 4, 0.2, 0.1, 0, omega));
  }
}
