#include "ionsim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

void CoolingCycleConfig::validate() const {
  if (pulses < 0) throw std::invalid_argument("pulses must be >= 0");
  for (double t : pulse_durations) {
    if (t <= 0.0) throw std::invalid_argument("pulse durations must be > 0");
  }
  if (repump_recoil < 0.0) {
    throw std::invalid_argument("repump_recoil must be >= 0");
  }
  if (repump_photons_per_ion < 0.0) {
    throw std::invalid_argument("repump_photons_per_ion must be >= 0");
  }
  drive.validate();
  if (drive.sideband != -1) {
    throw InvalidSideband("Raman cooling drives the first lower sideband");
  }
}

double recoil_nbar_per_event(double photon_k, double mass_kg, double omega_m) {
  if (photon_k <= 0.0 || mass_kg <= 0.0 || omega_m <= 0.0) {
    throw std::invalid_argument("recoil inputs must be > 0");
  }
  return kHbar * photon_k * photon_k / (2.0 * mass_kg) / omega_m;
}

OccupationDist doppler_init(double omega_m, double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be > 0");
  if (omega_m <= 0.0) throw std::invalid_argument("omega_m must be > 0");
  return OccupationDist::thermal(gamma / (2.0 * omega_m));
}

OccupationDist doppler_init(const Mode& mode, double gamma) {
  return doppler_init(mode.omega, gamma);
}

namespace {

struct BranchProbs {
  double stay, bell, uu;
};

// Resonant lower-sideband branching probabilities for |dd,n> after time t.
BranchProbs cycle_branch_probs(int n, const DriveParams& drive, double t) {
  if (n < 1) return {1.0, 0.0, 0.0};
  const double g = collective_sideband_frequency(n, drive.omega, drive.eta);
  const double msum = 2.0 * n - 1.0;
  const double x = 1.0 - std::cos(g * t);
  const double s = std::sin(g * t);
  const double stay = 1.0 - n / msum * x;
  const double bell = n / msum * s * s;
  const double uu = n * (n - 1.0) / (msum * msum) * x * x;
  return {stay * stay, bell, uu};
}

}  // namespace

OccupationDist raman_cool_cycle(const OccupationDist& dist,
                                const CoolingCycleConfig& cfg, double t) {
  cfg.validate();
  if (t < 0.0) throw std::invalid_argument("t must be >= 0");

  const std::size_t levels = dist.levels();
  std::vector<double> cooled(levels, 0.0);
  double repumped_ions = 0.0;
  for (std::size_t n = 0; n < levels; ++n) {
    const double pn = dist[n];
    if (pn == 0.0) continue;
    const BranchProbs b = cycle_branch_probs(static_cast<int>(n), cfg.drive, t);
    cooled[n] += pn * b.stay;
    if (n >= 1) cooled[n - 1] += pn * b.bell;
    if (n >= 2) cooled[n - 2] += pn * b.uu;
    repumped_ions += pn * (b.bell + 2.0 * b.uu);
  }

  const double eps = std::min(
      1.0, cfg.repump_recoil * cfg.repump_photons_per_ion * repumped_ions);
  if (eps > 0.0) {
    std::vector<double> heated(levels + 1, 0.0);
    for (std::size_t n = 0; n < levels; ++n) {
      heated[n] += (1.0 - eps) * cooled[n];
      heated[n + 1] += eps * cooled[n];
    }
    return OccupationDist::general(std::move(heated));
  }
  return OccupationDist::general(std::move(cooled));
}

namespace {

double post_cycle_mean(const OccupationDist& dist,
                       const CoolingCycleConfig& cfg, double t) {
  return raman_cool_cycle(dist, cfg, t).mean();
}

// Coarse grid scan followed by golden-section refinement around the best
// grid point. The objective oscillates, so the grid does the global work.
double best_pulse_duration(const OccupationDist& dist,
                           const CoolingCycleConfig& cfg, double t_max) {
  constexpr int kGridPoints = 240;
  double best_t = t_max / kGridPoints;
  double best_val = post_cycle_mean(dist, cfg, best_t);
  for (int j = 2; j <= kGridPoints; ++j) {
    const double t = t_max * j / kGridPoints;
    const double val = post_cycle_mean(dist, cfg, t);
    if (val < best_val) {
      best_val = val;
      best_t = t;
    }
  }

  const double h = t_max / kGridPoints;
  double lo = std::max(best_t - h, 1e-3 * h);
  double hi = std::min(best_t + h, t_max);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = post_cycle_mean(dist, cfg, c);
  double fd = post_cycle_mean(dist, cfg, d);
  for (int it = 0; it < 60; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = post_cycle_mean(dist, cfg, c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = post_cycle_mean(dist, cfg, d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> optimize_pulse_durations(const OccupationDist& dist,
                                             const CoolingCycleConfig& cfg,
                                             int k, double t_max) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  if (k > 0 && t_max <= 0.0) throw std::invalid_argument("t_max must be > 0");
  cfg.validate();

  std::vector<double> durations;
  durations.reserve(static_cast<std::size_t>(k));
  OccupationDist current = dist;
  for (int i = 0; i < k; ++i) {
    const double t = best_pulse_duration(current, cfg, t_max);
    durations.push_back(t);
    current = raman_cool_cycle(current, cfg, t);
  }
  return durations;
}

std::vector<CoolingTrajectoryPoint> run_cooling(const OccupationDist& initial,
                                                const CoolingCycleConfig& cfg,
                                                double t_max) {
  cfg.validate();
  std::vector<CoolingTrajectoryPoint> traj;
  traj.push_back({0, initial.mean(), initial.ground_fraction(), 0.0});

  OccupationDist current = initial;
  for (int i = 0; i < cfg.pulses; ++i) {
    const double t =
        i < static_cast<int>(cfg.pulse_durations.size())
            ? cfg.pulse_durations[static_cast<std::size_t>(i)]
            : best_pulse_duration(current, cfg, t_max);
    current = raman_cool_cycle(current, cfg, t);
    traj.push_back({i + 1, current.mean(), current.ground_fraction(), t});
  }
  return traj;
}

OccupationDist heat(const OccupationDist& dist, double rate_per_ms,
                    double dt_ms) {
  if (rate_per_ms < 0.0) throw std::invalid_argument("rate must be >= 0");
  if (dt_ms < 0.0) throw std::invalid_argument("dt must be >= 0");
  return OccupationDist::thermal(dist.mean() + rate_per_ms * dt_ms);
}

double heating_rate_ratio(const HeatingModel& model) {
  if (!(model.d > model.delta_x && model.delta_x > 0.0)) {
    throw std::invalid_argument("heating model requires d > delta_x > 0");
  }
  const double r = model.delta_x / model.d;
  return r * r;
}

int operations_budget(double eta2, double n2_spread, double fidelity_floor) {
  if (eta2 < 0.0 || n2_spread < 0.0) {
    throw std::invalid_argument("eta2 and n2_spread must be >= 0");
  }
  if (!(fidelity_floor > 0.0 && fidelity_floor < 1.0)) {
    throw std::invalid_argument("fidelity_floor must lie in (0, 1)");
  }
  const double spread = n2_spread * eta2 * eta2;
  if (spread == 0.0) return kNoOperationsLimit;

  // Pulse j carries accumulated area error j*pi*spread; worst-case fidelity
  // cos^2(j*pi*spread/2).
  double product = 1.0;
  int k = 0;
  constexpr int kCap = 1000000;
  while (k < kCap) {
    const double arg = (k + 1) * kPi * spread / 2.0;
    if (arg >= kPi / 2.0) break;  // next pulse has zero worst-case fidelity
    const double f = std::cos(arg);
    const double next = product * f * f;
    if (next < fidelity_floor) break;
    product = next;
    ++k;
  }
  return k;
}

}  // namespace ionsim
