#include "ionsim/spectroscopy.hpp"

#include "ionsim/protocols.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

nlohmann::json NoiseSpec::to_json() const {
  switch (kind) {
    case Kind::none: return {{"kind", "none"}};
    case Kind::gaussian: return {{"kind", "gaussian"}, {"sigma", sigma}};
    case Kind::counting:
      return {{"kind", "counting"}, {"mean_photons", mean_photons}};
  }
  throw std::logic_error("unknown noise kind");
}

NoiseSpec NoiseSpec::from_json(const nlohmann::json& j) {
  NoiseSpec spec;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "none") {
    spec.kind = Kind::none;
  } else if (kind == "gaussian") {
    spec.kind = Kind::gaussian;
    spec.sigma = j.at("sigma").get<double>();
  } else if (kind == "counting") {
    spec.kind = Kind::counting;
    spec.mean_photons = j.at("mean_photons").get<double>();
  } else {
    throw ValidationError("unknown noise kind: " + kind);
  }
  return spec;
}

void ScanConfig::validate() const {
  if (step <= 0.0) throw ValidationError("scan step must be > 0");
  if (t_pr <= 0.0) throw ValidationError("probe time must be > 0");
  if (delta_max < delta_min) throw ValidationError("scan range bounds out of order");
  if (noise.kind == NoiseSpec::Kind::gaussian && noise.sigma < 0.0) {
    throw ValidationError("gaussian noise sigma must be >= 0");
  }
  if (noise.kind == NoiseSpec::Kind::counting && noise.mean_photons <= 0.0) {
    throw ValidationError("counting noise mean photons must be > 0");
  }
}

nlohmann::json ScanConfig::to_json() const {
  nlohmann::json states = nlohmann::json::array();
  for (const ModeState& ms : mode_states) {
    states.push_back({{"mode", to_string(ms.mode.id)},
                      {"omega_hz", rad_to_hz(ms.mode.omega)},
                      {"eta", ms.mode.eta},
                      {"dist", ms.dist.to_json()}});
  }
  return {{"delta_min_hz", rad_to_hz(delta_min)},
          {"delta_max_hz", rad_to_hz(delta_max)},
          {"step_hz", rad_to_hz(step)},
          {"probe_time_s", t_pr},
          {"rabi_frequency_hz", rad_to_hz(omega)},
          {"theta", theta},
          {"phi", phi},
          {"mode_states", states},
          {"include_carrier", include_carrier},
          {"background", background},
          {"noise", noise.to_json()},
          {"seed", seed}};
}

namespace {

double bright_ion_count(const SubspaceAmplitudes& a) {
  return 2.0 * std::norm(a.dd) + std::norm(a.du) + std::norm(a.ud);
}

double signal_single_level(int n, const DriveParams& drive, double t_pr) {
  if (drive.detuning == 0.0 && drive.sideband == -1) {
    const SpinMotionState psi = two_ion_lower_sideband_evolve(n, drive, t_pr);
    const auto pops = psi.populations_by_spin();
    return 2.0 * pops[0] + pops[1] + pops[2];
  }
  if (drive.detuning == 0.0 && drive.sideband == +1) {
    const SpinMotionState psi = two_ion_upper_sideband_evolve(n, drive, t_pr);
    const auto pops = psi.populations_by_spin();
    return 2.0 * pops[0] + pops[1] + pops[2];
  }
  return bright_ion_count(evolve_from_ground_pair(n, drive, t_pr));
}

}  // namespace

double signal(const OccupationDist& dist, const DriveParams& drive,
              double t_pr) {
  drive.validate();
  if (t_pr < 0.0) throw std::invalid_argument("t_pr must be >= 0");
  if (drive.sideband == 0) {
    // Carrier: no motional dependence.
    return signal_single_level(0, drive, t_pr);
  }
  double s = 0.0;
  for (std::size_t n = 0; n < dist.levels(); ++n) {
    if (dist[n] == 0.0) continue;
    s += dist[n] * signal_single_level(static_cast<int>(n), drive, t_pr);
  }
  return s;
}

namespace {

struct Feature {
  double center;  // rad/s
  DriveParams drive;
  const OccupationDist* dist;  // nullptr for the carrier
};

std::vector<Feature> feature_list(const ScanConfig& cfg) {
  std::vector<Feature> features;
  for (const ModeState& ms : cfg.mode_states) {
    if (ms.mode.eta <= 0.0) continue;
    for (int sideband : {-1, +1}) {
      DriveParams d;
      d.omega = cfg.omega;
      d.eta = ms.mode.eta;
      d.sideband = sideband;
      d.theta = cfg.theta;
      d.phi = cfg.phi;
      d.mode_sign = ms.mode.geometry_class == GeometryClass::COM ? +1 : -1;
      features.push_back({sideband * ms.mode.omega, d, &ms.dist});
    }
  }
  if (cfg.include_carrier) {
    DriveParams d;
    d.omega = cfg.omega;
    d.sideband = 0;
    d.theta = cfg.theta;
    d.phi = cfg.phi;
    features.push_back({0.0, d, nullptr});
  }
  return features;
}

double feature_deficit(const Feature& f, double delta_pr, double t_pr) {
  DriveParams d = f.drive;
  d.detuning = delta_pr - f.center;
  if (d.sideband == 0) return 2.0 - signal_single_level(0, d, t_pr);
  double s = 0.0;
  for (std::size_t n = 0; n < f.dist->levels(); ++n) {
    if ((*f.dist)[n] == 0.0) continue;
    s += (*f.dist)[n] * signal_single_level(static_cast<int>(n), d, t_pr);
  }
  return 2.0 - s;
}

}  // namespace

Spectrum scan(const ScanConfig& cfg) {
  cfg.validate();
  const std::vector<Feature> features = feature_list(cfg);

  std::mt19937_64 rng(cfg.seed);
  Spectrum spec;
  spec.metadata = cfg.to_json();

  const long n_points =
      static_cast<long>(std::floor((cfg.delta_max - cfg.delta_min) / cfg.step +
                                   1e-9)) +
      1;
  spec.points.reserve(static_cast<std::size_t>(n_points));
  for (long i = 0; i < n_points; ++i) {
    const double delta = cfg.delta_min + cfg.step * static_cast<double>(i);
    double deficit = 0.0;
    for (const Feature& f : features) {
      deficit += feature_deficit(f, delta, cfg.t_pr);
    }
    double s = std::clamp(2.0 - deficit, 0.0, 2.0) + cfg.background;
    switch (cfg.noise.kind) {
      case NoiseSpec::Kind::none: break;
      case NoiseSpec::Kind::gaussian: {
        std::normal_distribution<double> noise(0.0, cfg.noise.sigma);
        s += noise(rng);
        break;
      }
      case NoiseSpec::Kind::counting: {
        std::poisson_distribution<long> counts(
            std::max(cfg.noise.mean_photons * s, 0.0));
        s = static_cast<double>(counts(rng)) / cfg.noise.mean_photons;
        break;
      }
    }
    spec.points.emplace_back(delta, s);
  }
  return spec;
}

double optimal_probe_time(const OccupationDist& dist, const DriveParams& drive,
                          double t_max) {
  if (t_max <= 0.0) throw std::invalid_argument("t_max must be > 0");
  constexpr int kGridPoints = 400;
  double best_t = t_max / kGridPoints;
  double best_deficit = 2.0 - signal(dist, drive, best_t);
  for (int j = 2; j <= kGridPoints; ++j) {
    const double t = t_max * j / kGridPoints;
    const double deficit = 2.0 - signal(dist, drive, t);
    if (deficit > best_deficit) {
      best_deficit = deficit;
      best_t = t;
    }
  }
  return best_t;
}

nlohmann::json PeakFit::to_json() const {
  return {{"center_hz", rad_to_hz(center)},
          {"depth", depth},
          {"width_hz", rad_to_hz(width)},
          {"residual", residual}};
}

PeakFit fit_peak(const Spectrum& spec, double guess, double window,
                 const FitOptions& opts) {
  if (window <= 0.0) throw std::invalid_argument("fit window must be > 0");

  std::vector<double> xs, ys;
  for (const auto& [delta, s] : spec.points) {
    if (std::abs(delta - guess) <= window) {
      xs.push_back((delta - guess) / window);  // scaled to [-1, 1]
      ys.push_back(s);
    }
  }
  const std::size_t m = xs.size();
  if (m < 5) throw FitDiverged("fewer than 5 points within the fit window");

  // Model: f(x) = b - A exp(-(x-c)^2 / (2 w^2)), dips below background.
  double b = *std::max_element(ys.begin(), ys.end());
  const std::size_t i_min = static_cast<std::size_t>(
      std::min_element(ys.begin(), ys.end()) - ys.begin());
  double a = b - ys[i_min];
  double c = opts.max_center < 1.0 ? 0.0 : xs[i_min];
  double w = 0.2;

  double lambda = 1e-3;
  double sse = 0.0;
  const auto eval_sse = [&](double bc, double ac, double cc, double wc) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double u = (xs[i] - cc) / wc;
      const double r = ys[i] - (bc - ac * std::exp(-0.5 * u * u));
      s += r * r;
    }
    return s;
  };
  sse = eval_sse(b, a, c, w);

  for (int iter = 0; iter < 200; ++iter) {
    Eigen::Matrix4d jtj = Eigen::Matrix4d::Zero();
    Eigen::Vector4d jtr = Eigen::Vector4d::Zero();
    for (std::size_t i = 0; i < m; ++i) {
      const double u = (xs[i] - c) / w;
      const double e = std::exp(-0.5 * u * u);
      const double r = ys[i] - (b - a * e);
      Eigen::Vector4d j;  // d f / d (c, a, w, b)
      j(0) = -a * e * u / w;
      j(1) = -e;
      j(2) = -a * e * u * u / w;
      j(3) = 1.0;
      jtj += j * j.transpose();
      jtr += j * r;
    }
    Eigen::Matrix4d damped = jtj;
    for (int k = 0; k < 4; ++k) damped(k, k) *= 1.0 + lambda;
    const Eigen::Vector4d step = damped.ldlt().solve(jtr);
    if (!step.allFinite()) break;

    const double c2 =
        std::clamp(c + step(0), -opts.max_center, opts.max_center);
    const double a2 = a + step(1);
    const double w2 = std::abs(w + step(2));
    const double b2 = b + step(3);
    const double sse2 = w2 > 1e-12 ? eval_sse(b2, a2, c2, w2) : sse + 1.0;
    if (sse2 < sse) {
      c = c2;
      a = a2;
      w = w2;
      b = b2;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (sse - sse2 < 1e-16 * (1.0 + sse)) break;
      sse = sse2;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }

  PeakFit fit;
  fit.center = guess + c * window;
  fit.depth = a;
  fit.width = std::abs(w) * window;
  fit.residual = std::sqrt(sse / static_cast<double>(m));

  if (!std::isfinite(fit.center) || !std::isfinite(fit.depth) ||
      !std::isfinite(fit.width) || !std::isfinite(fit.residual)) {
    throw FitDiverged("non-finite fit result");
  }
  if (fit.depth <= opts.min_depth) throw FitDiverged("no feature above depth floor");
  if (std::abs(c) > opts.max_center) {
    throw FitDiverged("fitted center escaped the guess window");
  }
  if (fit.width <= 0.0 || fit.width > 4.0 * window) {
    throw FitDiverged("fitted width outside plausible range");
  }
  // A feature narrower than the sample spacing is unresolvable: with four
  // free parameters such a "peak" can take any amplitude between grid points.
  std::vector<double> gaps;
  gaps.reserve(m - 1);
  for (std::size_t i = 1; i < m; ++i) gaps.push_back(std::abs(xs[i] - xs[i - 1]));
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double spacing = gaps[gaps.size() / 2];
  if (w < 0.5 * spacing) {
    throw FitDiverged("fitted width below the scan resolution");
  }
  if (fit.residual > opts.max_residual) {
    throw FitDiverged("fit residual exceeds threshold");
  }
  return fit;
}

std::vector<PeakFit> fit_peaks(const Spectrum& spec,
                               const std::vector<double>& guesses,
                               double window, const FitOptions& opts) {
  std::vector<PeakFit> fits;
  fits.reserve(guesses.size());
  for (double g : guesses) fits.push_back(fit_peak(spec, g, window, opts));
  return fits;
}

namespace {

double resonant_depth(const OccupationDist& dist, DriveParams drive,
                      int sideband, double t_pr) {
  drive.sideband = sideband;
  drive.detuning = 0.0;
  return 2.0 - signal(dist, drive, t_pr);
}

double model_depth_ratio(double nbar, const DriveParams& drive, double t_pr) {
  const OccupationDist dist = OccupationDist::thermal(nbar, 1e-10);
  const double lower = resonant_depth(dist, drive, -1, t_pr);
  const double upper = resonant_depth(dist, drive, +1, t_pr);
  return lower / upper;
}

}  // namespace

double estimate_nbar(const PeakFit& lower, const PeakFit& upper,
                     const DriveParams& drive_template, double t_pr,
                     double noise_floor) {
  if (lower.depth <= noise_floor) return 0.0;
  if (upper.depth <= 0.0) {
    throw NoRoot("upper-sideband depth is non-positive");
  }
  const double target = lower.depth / upper.depth;

  // Expand the bracket geometrically: the model costs O(levels^2), so keep
  // the upper bound as small as the target allows (cap at nbar = 100, where
  // the thermal ratio has long saturated).
  double lo = 0.0;
  double hi = 1.0;
  while (hi < 100.0 && model_depth_ratio(hi, drive_template, t_pr) < target) {
    lo = hi;
    hi *= 2.0;
  }
  if (model_depth_ratio(hi, drive_template, t_pr) < target) {
    throw NoRoot("depth ratio exceeds the thermal-model maximum");
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (model_depth_ratio(mid, drive_template, t_pr) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

Spectrum sideband_window_scan(const Mode& mode, const OccupationDist& dist,
                              const ProbeConfig& probe, int sideband,
                              std::uint64_t seed) {
  ScanConfig cfg;
  const double center = sideband * mode.omega;
  cfg.delta_min = center - probe.span;
  cfg.delta_max = center + probe.span;
  cfg.step = probe.step;
  cfg.t_pr = probe.t_pr;
  cfg.omega = probe.omega;
  cfg.theta = probe.theta;
  cfg.phi = probe.phi;
  cfg.mode_states = {{mode, dist}};
  cfg.include_carrier = false;
  cfg.background = probe.background;
  cfg.noise = probe.noise;
  cfg.seed = seed;
  return scan(cfg);
}

}  // namespace

namespace {

// Least-squares depth of a Gaussian dip of known center and width over a
// constant background: linear in (background, depth).
PeakFit fixed_shape_depth(const Spectrum& spec, double center, double width,
                          double window) {
  double se = 0.0, see = 0.0, sy = 0.0, sey = 0.0;
  std::size_t m = 0;
  for (const auto& [delta, s] : spec.points) {
    if (std::abs(delta - center) > window) continue;
    const double u = (delta - center) / width;
    const double e = std::exp(-0.5 * u * u);
    se += e;
    see += e * e;
    sy += s;
    sey += e * s;
    ++m;
  }
  if (m < 5) throw FitDiverged("fewer than 5 points within the fit window");
  const double n = static_cast<double>(m);
  const double det = n * see - se * se;
  if (std::abs(det) < 1e-30) throw FitDiverged("degenerate fixed-shape fit");
  // Model s = b - a e: minimize sum (s - b + a e)^2.
  const double a = (se * sy - n * sey) / det;
  const double b = (sy + a * se) / n;
  double sse = 0.0;
  for (const auto& [delta, s] : spec.points) {
    if (std::abs(delta - center) > window) continue;
    const double u = (delta - center) / width;
    const double r = s - (b - a * std::exp(-0.5 * u * u));
    sse += r * r;
  }
  PeakFit fit;
  fit.center = center;
  fit.depth = a;
  fit.width = width;
  fit.residual = std::sqrt(sse / n);
  return fit;
}

}  // namespace

double measure_nbar(const Mode& mode, const OccupationDist& dist,
                    const ProbeConfig& probe) {
  const double window = probe.fit_window > 0.0 ? probe.fit_window : probe.span;
  const Spectrum lower_spec =
      sideband_window_scan(mode, dist, probe, -1, probe.seed);
  const Spectrum upper_spec =
      sideband_window_scan(mode, dist, probe, +1, probe.seed + 1);

  // The sideband centers are known here, so pin the fit near the guess; a
  // freely roaming center latches onto noise dips and biases the lower-depth
  // estimate upward.
  FitOptions opts;
  opts.max_center = 0.1;
  const PeakFit upper = fit_peak(upper_spec, +mode.omega, window, opts);
  // The lower feature has the same probe-limited shape as the upper one, so
  // its center and width are known too. Estimating only (depth, background)
  // by linear least squares stays unbiased even when the feature sits below
  // the per-point noise, where a free-shape fit latches onto noise dips.
  const PeakFit lower =
      fixed_shape_depth(lower_spec, -mode.omega, upper.width, window);
  if (lower.depth <= 0.0) {
    return 0.0;  // no resolvable lower sideband: ground state estimate
  }

  DriveParams drive;
  drive.omega = probe.omega;
  drive.eta = mode.eta;
  drive.theta = probe.theta;
  drive.phi = probe.phi;
  drive.mode_sign = mode.geometry_class == GeometryClass::COM ? +1 : -1;

  // The forward model inside estimate_nbar uses resonant peak depths, while
  // the depths above come from finite-width fits; the shape mismatch is a
  // smooth n-dependent factor. Calibrate it by running the same estimator on
  // a noiseless synthetic scan at the current estimate and correcting the
  // measured ratio, iterating to the fixed point.
  const auto estimator_ratio = [&](double nbar) {
    const OccupationDist model = OccupationDist::thermal(nbar, 1e-10);
    ProbeConfig clean = probe;
    clean.noise = NoiseSpec{};
    const Spectrum ml = sideband_window_scan(mode, model, clean, -1, 0);
    const Spectrum mu = sideband_window_scan(mode, model, clean, +1, 0);
    const PeakFit u = fit_peak(mu, +mode.omega, window, opts);
    const PeakFit l = fixed_shape_depth(ml, -mode.omega, u.width, window);
    return std::max(l.depth, 0.0) / u.depth;
  };
  const auto resonant_ratio = [&](double nbar) {
    const OccupationDist model = OccupationDist::thermal(nbar, 1e-10);
    DriveParams d = drive;
    d.sideband = -1;
    const double lo = 2.0 - signal(model, d, probe.t_pr);
    d.sideband = +1;
    const double up = 2.0 - signal(model, d, probe.t_pr);
    return lo / up;
  };

  double nbar = estimate_nbar(lower, upper, drive, probe.t_pr);
  for (int it = 0; it < 3; ++it) {
    const double ref = std::max(nbar, 1e-3);
    const double kappa = estimator_ratio(ref) / resonant_ratio(ref);
    if (!(kappa > 0.0) || !std::isfinite(kappa)) break;
    PeakFit adjusted = lower;
    adjusted.depth = lower.depth / kappa;
    try {
      nbar = estimate_nbar(adjusted, upper, drive, probe.t_pr);
    } catch (const NoRoot&) {
      break;  // noisy ratio pushed past the thermal maximum; keep the prior
    }
  }
  return nbar;
}

std::vector<std::pair<double, double>> heating_scan(
    const Mode& mode, const OccupationDist& initial,
    const std::vector<double>& delays_ms, double rate_per_ms,
    const ProbeConfig& probe) {
  std::vector<std::pair<double, double>> out;
  out.reserve(delays_ms.size());
  std::uint64_t stream = 0;
  for (double delay : delays_ms) {
    const OccupationDist heated = heat(initial, rate_per_ms, delay);
    ProbeConfig p = probe;
    p.seed = probe.seed + 1000003 * stream++;
    out.emplace_back(delay, measure_nbar(mode, heated, p));
  }
  return out;
}

double linear_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw std::invalid_argument("need at least 2 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(points.size());
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("degenerate abscissa");
  return (n * sxy - sx * sy) / denom;
}

std::string format_sig9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spec) {
  os << "delta_hz,signal\n";
  for (const auto& [delta, s] : spec.points) {
    os << format_sig9(rad_to_hz(delta)) << ',' << format_sig9(s) << '\n';
  }
}

Spectrum read_spectrum_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty spectrum CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "delta_hz,signal") {
    throw ParseError("spectrum CSV must start with 'delta_hz,signal'");
  }
  Spectrum spec;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": missing comma");
    }
    try {
      const double f_hz = std::stod(line.substr(0, comma));
      const double s = std::stod(line.substr(comma + 1));
      spec.points.emplace_back(hz_to_rad(f_hz), s);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) + ": bad number");
    }
  }
  return spec;
}

}  // namespace ionsim
