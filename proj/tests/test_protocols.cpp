#include <doctest.h>

#include <cmath>

#include "ionsim/constants.hpp"
#include "ionsim/protocols.hpp"

using namespace ionsim;

namespace {

CoolingCycleConfig preset_cooling(double recoil = 0.0) {
  CoolingCycleConfig cfg;
  cfg.target_mode = ModeId::xCOM;
  cfg.pulses = 5;
  cfg.repump_recoil = recoil;
  cfg.drive.omega = hz_to_rad(250e3);
  cfg.drive.eta = 0.163;
  cfg.drive.sideband = -1;
  cfg.drive.mode_sign = +1;
  return cfg;
}

}  // namespace

TEST_CASE("recoil nbar per scattering event") {
  const double mass = kBe9MassU * kAtomicMassKg;
  const double k = kTwoPi / kBe9RamanWavelengthM;
  // Single-photon recoil frequency ~226 kHz for 9Be+ at 313 nm.
  const double recoil_hz = rad_to_hz(kHbar * k * k / (2.0 * mass) );
  CHECK(recoil_hz == doctest::Approx(226e3).epsilon(0.01));
  // Against the 8.6 MHz xCOM mode this is ~0.026 quanta per photon.
  CHECK(recoil_nbar_per_event(k, mass, hz_to_rad(8.6e6)) ==
        doctest::Approx(0.0263).epsilon(0.01));
}

TEST_CASE("Doppler limit occupation") {
  const double gamma = hz_to_rad(19.4e6);
  SUBCASE("xCOM at 8.6 MHz gives nbar ~ 1.13") {
    const OccupationDist d = doppler_init(hz_to_rad(8.6e6), gamma);
    CHECK(d.mean() == doctest::Approx(19.4 / (2.0 * 8.6)).epsilon(1e-6));
    CHECK(d.mean() == doctest::Approx(1.128).epsilon(1e-3));
  }
  SUBCASE("xSTR at 14.9 MHz gives nbar ~ 0.651") {
    const OccupationDist d = doppler_init(hz_to_rad(14.9e6), gamma);
    CHECK(d.mean() == doctest::Approx(0.651).epsilon(1e-3));
  }
}

TEST_CASE("single cooling cycle on pure |n=1> with Gt = pi is a full revival") {
  // For n = 1 the uu branch is absent, so a_stay = cos(Gt): a pi pulse area
  // returns all population to |dd,1> and no repump happens.
  CoolingCycleConfig cfg = preset_cooling();
  const double g = collective_sideband_frequency(1, cfg.drive.omega, cfg.drive.eta);
  const OccupationDist init = OccupationDist::general({0.0, 1.0});
  const OccupationDist out = raman_cool_cycle(init, cfg, kPi / g);
  CHECK(out.mean() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single cooling cycle on pure |n=1> with Gt = pi/2 reaches n = 0") {
  CoolingCycleConfig cfg = preset_cooling();
  const double g = collective_sideband_frequency(1, cfg.drive.omega, cfg.drive.eta);
  const OccupationDist init = OccupationDist::general({0.0, 1.0});
  const OccupationDist out = raman_cool_cycle(init, cfg, 0.5 * kPi / g);
  CHECK(out.mean() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(out.ground_fraction() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ground state is a fixed point without recoil") {
  CoolingCycleConfig cfg = preset_cooling();
  const OccupationDist init = OccupationDist::thermal(0.0);
  const OccupationDist out = raman_cool_cycle(init, cfg, 5e-6);
  CHECK(out.mean() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("optimized cooling run from the Doppler limit") {
  const double mass = kBe9MassU * kAtomicMassKg;
  const double k = kTwoPi / kBe9RamanWavelengthM;
  const double recoil = recoil_nbar_per_event(k, mass, hz_to_rad(8.6e6));
  CoolingCycleConfig cfg = preset_cooling(recoil);
  const OccupationDist init = doppler_init(hz_to_rad(8.6e6), hz_to_rad(19.4e6));
  const auto traj = run_cooling(init, cfg, 20e-6);
  REQUIRE(traj.size() == 6);
  CHECK(traj.front().nbar == doctest::Approx(1.128).epsilon(1e-2));
  // Monotone decrease cycle over cycle.
  for (std::size_t i = 1; i < traj.size(); ++i) {
    CHECK(traj[i].nbar < traj[i - 1].nbar + 1e-12);
  }
  CHECK(traj.back().nbar <= 0.15);
  CHECK(traj.back().ground_fraction > 0.85);
  // Durations comparable to the ~5 us experimental pulse scale.
  for (std::size_t i = 1; i < traj.size(); ++i) {
    CHECK(traj[i].duration > 2.5e-6);
    CHECK(traj[i].duration < 10e-6);
  }
}

TEST_CASE("heating map") {
  const OccupationDist init = OccupationDist::thermal(0.05);
  const OccupationDist out = heat(init, 19.0, 0.1);
  CHECK(out.mean() == doctest::Approx(0.05 + 1.9).epsilon(1e-6));
  CHECK(out.kind() == DistKind::thermal);
  SUBCASE("zero rate is the identity on nbar") {
    // Truncated-thermal re-materialization moves the mean by O(tail_tol).
    CHECK(heat(init, 0.0, 10.0).mean() == doctest::Approx(0.05).epsilon(1e-6));
  }
}

TEST_CASE("differential-to-COM heating suppression") {
  HeatingModel m;
  m.com_rate = 19.0;
  m.d = 200e-6;
  m.delta_x = 2e-6;
  CHECK(heating_rate_ratio(m) == doctest::Approx(1e-4).epsilon(1e-12));
  // Implied stretch-mode bound is far below the measured <0.18 / ms.
  CHECK(m.com_rate * heating_rate_ratio(m) < 0.18);
}

TEST_CASE("operations budget") {
  SUBCASE("preset parameters land near ten") {
    const int k = operations_budget(0.163, 1.0, 0.5);
    CHECK(k == 10);
  }
  SUBCASE("zero spectator coupling is unlimited") {
    CHECK(operations_budget(0.0, 1.0, 0.5) == kNoOperationsLimit);
    CHECK(operations_budget(0.2, 0.0, 0.5) == kNoOperationsLimit);
  }
  SUBCASE("tighter floor shrinks the budget") {
    CHECK(operations_budget(0.163, 1.0, 0.9) < 10);
    CHECK(operations_budget(0.163, 1.0, 0.1) > 10);
  }
}

TEST_CASE("heat-then-cool closure") {
  const double mass = kBe9MassU * kAtomicMassKg;
  const double k = kTwoPi / kBe9RamanWavelengthM;
  const double recoil = recoil_nbar_per_event(k, mass, hz_to_rad(8.6e6));
  CoolingCycleConfig cfg = preset_cooling(recoil);
  cfg.pulses = 8;
  OccupationDist dist = OccupationDist::thermal(0.02);
  dist = heat(dist, 19.0, 0.05);  // 50 us of COM heating
  const auto traj = run_cooling(dist, cfg, 20e-6);
  CHECK(traj.back().nbar < dist.mean());
  CHECK(traj.back().nbar < 0.15);
}
