#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ionsim/cli.hpp"
#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/protocols.hpp"
#include "ionsim/spectroscopy.hpp"

using namespace ionsim;

namespace {

ModeTable preset_modes() {
  return preset_physics(kPresetNist1998).mode_table();
}

DriveParams drive_for(const Mode& m, int sideband, double omega) {
  DriveParams d;
  d.omega = omega;
  d.eta = m.eta;
  d.sideband = sideband;
  d.mode_sign = mode_sign_of(m.id);
  return d;
}

}  // namespace

TEST_CASE("resonant signal closed forms") {
  const ModeTable table = preset_modes();
  const Mode& xcom = table[ModeId::xCOM];
  const double omega = hz_to_rad(250e3);

  SUBCASE("t = 0 gives full fluorescence") {
    const DriveParams d = drive_for(xcom, -1, omega);
    CHECK(signal(OccupationDist::thermal(1.0), d, 0.0) ==
          doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("ground state is dark to the lower sideband") {
    const DriveParams d = drive_for(xcom, -1, omega);
    CHECK(signal(OccupationDist::thermal(0.0), d, 5e-6) ==
          doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("ground state responds to the upper sideband") {
    const DriveParams d = drive_for(xcom, +1, omega);
    CHECK(signal(OccupationDist::thermal(0.0), d, 5e-6) < 2.0 - 1e-3);
  }

  SUBCASE("pure |n=1>, lower sideband, Gt = pi/2: Bell branch, S = 1") {
    DriveParams d = drive_for(xcom, -1, omega);
    const double g = collective_sideband_frequency(1, d.omega, d.eta);
    const double s = signal(OccupationDist::general({0.0, 1.0}), d,
                            (kPi / 2.0) / g);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("pure |n=2>, lower sideband, Gt = pi: S = 2/9 + 2*8/9... check") {
    DriveParams d = drive_for(xcom, -1, omega);
    const double g = collective_sideband_frequency(2, d.omega, d.eta);
    const double s =
        signal(OccupationDist::general({0.0, 0.0, 1.0}), d, kPi / g);
    // S = 2 P(dd) + P(du) + P(ud) = 2/9.
    CHECK(s == doctest::Approx(2.0 / 9.0).epsilon(1e-10));
  }
}

TEST_CASE("scan minima sit at the mode frequencies") {
  const ModeTable table = preset_modes();
  ScanConfig cfg;
  cfg.omega = hz_to_rad(250e3);
  cfg.t_pr = 3e-6;
  cfg.delta_min = hz_to_rad(-16e6);
  cfg.delta_max = hz_to_rad(16e6);
  cfg.step = hz_to_rad(20e3);
  for (const Mode& m : table.modes()) {
    if (m.eta <= 0.0) continue;
    cfg.mode_states.push_back({m, OccupationDist::thermal(0.5)});
  }
  const Spectrum spec = scan(cfg);
  REQUIRE(!spec.points.empty());

  auto local_min_near = [&](double f_hz) {
    double best_delta = 0.0, best_s = 1e9;
    for (const auto& [delta, s] : spec.points) {
      if (std::abs(rad_to_hz(delta) - f_hz) < 0.5e6 && s < best_s) {
        best_s = s;
        best_delta = delta;
      }
    }
    return std::make_pair(rad_to_hz(best_delta), best_s);
  };

  for (double f : {-14.9e6, -8.6e6, 0.0, 8.6e6, 14.9e6}) {
    const auto [center, depth] = local_min_near(f);
    CHECK(std::abs(center - f) < 40e3);
    CHECK(depth < 2.0 - 1e-3);
  }
}

TEST_CASE("scan with a seed is deterministic") {
  const ModeTable table = preset_modes();
  ScanConfig cfg;
  cfg.omega = hz_to_rad(250e3);
  cfg.t_pr = 3e-6;
  cfg.delta_min = hz_to_rad(8.0e6);
  cfg.delta_max = hz_to_rad(9.2e6);
  cfg.step = hz_to_rad(10e3);
  cfg.mode_states.push_back(
      {table[ModeId::xCOM], OccupationDist::thermal(0.2)});
  cfg.noise.kind = NoiseSpec::Kind::gaussian;
  cfg.noise.sigma = 0.02;
  cfg.seed = 777;
  const Spectrum a = scan(cfg);
  const Spectrum b = scan(cfg);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].first == b.points[i].first);
    CHECK(a.points[i].second == b.points[i].second);
  }
  SUBCASE("a different seed changes the samples") {
    cfg.seed = 778;
    const Spectrum c = scan(cfg);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      if (a.points[i].second != c.points[i].second) any_diff = true;
    }
    CHECK(any_diff);
  }
}

TEST_CASE("peak fitting") {
  SUBCASE("self-consistent gaussian is recovered almost exactly") {
    Spectrum spec;
    const double c0 = hz_to_rad(8.6e6), w0 = hz_to_rad(60e3);
    for (int i = -40; i <= 40; ++i) {
      const double x = c0 + i * hz_to_rad(10e3);
      const double s =
          2.0 - 0.8 * std::exp(-(x - c0) * (x - c0) / (2.0 * w0 * w0));
      spec.points.emplace_back(x, s);
    }
    const PeakFit fit = fit_peak(spec, c0 + hz_to_rad(15e3), hz_to_rad(400e3));
    CHECK(fit.center == doctest::Approx(c0).epsilon(1e-9));
    CHECK(fit.depth == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(fit.width == doctest::Approx(w0).epsilon(1e-6));
    CHECK(fit.residual < 1e-6);
  }

  SUBCASE("flat spectrum diverges") {
    Spectrum spec;
    for (int i = 0; i < 60; ++i) {
      spec.points.emplace_back(hz_to_rad(8.3e6 + i * 10e3), 2.0);
    }
    CHECK_THROWS_AS(fit_peak(spec, hz_to_rad(8.6e6), hz_to_rad(300e3)),
                    FitDiverged);
  }

  SUBCASE("too few points in the window diverges") {
    Spectrum spec;
    spec.points.emplace_back(hz_to_rad(8.6e6), 1.5);
    spec.points.emplace_back(hz_to_rad(8.61e6), 1.6);
    CHECK_THROWS_AS(fit_peak(spec, hz_to_rad(8.6e6), hz_to_rad(50e3)),
                    FitDiverged);
  }
}

TEST_CASE("thermometry round trip without noise") {
  const ModeTable table = preset_modes();
  const Mode& xcom = table[ModeId::xCOM];
  ProbeConfig probe;
  probe.omega = hz_to_rad(250e3);
  probe.span = hz_to_rad(600e3);
  probe.step = hz_to_rad(8e3);
  for (double nbar : {0.01, 0.11, 0.5, 2.0}) {
    const OccupationDist dist = OccupationDist::thermal(nbar);
    DriveParams d = drive_for(xcom, +1, probe.omega);
    probe.t_pr = optimal_probe_time(dist, d, 6e-6);
    const double est = measure_nbar(xcom, dist, probe);
    CHECK(std::abs(est - nbar) <= std::max(0.01, 0.05 * nbar));
  }
}

TEST_CASE("heating scan recovers the injected rate") {
  const ModeTable table = preset_modes();
  const Mode& xcom = table[ModeId::xCOM];
  ProbeConfig probe;
  probe.omega = hz_to_rad(250e3);
  probe.span = hz_to_rad(600e3);
  probe.step = hz_to_rad(8e3);
  const OccupationDist init = OccupationDist::thermal(0.02);
  DriveParams d = drive_for(xcom, +1, probe.omega);
  probe.t_pr = optimal_probe_time(init, d, 6e-6);
  const std::vector<double> delays{0.0, 0.004, 0.008, 0.012, 0.016, 0.02};

  SUBCASE("rate 19 / ms") {
    const auto points = heating_scan(xcom, init, delays, 19.0, probe);
    CHECK(linear_slope(points) == doctest::Approx(19.0).epsilon(0.05));
  }
  SUBCASE("rate 0 gives slope ~ 0") {
    const auto points = heating_scan(xcom, init, delays, 0.0, probe);
    CHECK(std::abs(linear_slope(points)) < 0.05);
  }
}

TEST_CASE("CSV round trip") {
  Spectrum spec;
  spec.points.emplace_back(hz_to_rad(-8.6e6), 1.234567891);
  spec.points.emplace_back(0.0, 2.0);
  spec.points.emplace_back(hz_to_rad(8.6e6), 0.000123456789);
  std::ostringstream os;
  write_spectrum_csv(os, spec);
  const std::string text = os.str();
  CHECK(text.substr(0, 16) == "delta_hz,signal\n");
  CHECK(text.find('\r') == std::string::npos);
  std::istringstream is(text);
  const Spectrum back = read_spectrum_csv(is);
  REQUIRE(back.points.size() == spec.points.size());
  for (std::size_t i = 0; i < spec.points.size(); ++i) {
    CHECK(back.points[i].first ==
          doctest::Approx(spec.points[i].first).epsilon(1e-8));
    CHECK(back.points[i].second ==
          doctest::Approx(spec.points[i].second).epsilon(1e-8));
  }
  SUBCASE("format_sig9") {
    CHECK(format_sig9(2.0) == "2");
    CHECK(format_sig9(1.234567891) == "1.23456789");
  }
}
