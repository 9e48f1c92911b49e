#include "ionsim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"
#include "ionsim/protocols.hpp"

namespace ionsim {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& ctx) {
  if (!j.is_object()) throw ParseError(ctx + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (allowed.find(key) == allowed.end()) {
      throw ParseError(ctx + ": unknown key '" + key + "'");
    }
  }
}

double require_positive(const json& j, const std::string& key,
                        const std::string& ctx) {
  if (!j.contains(key)) throw ValidationError(ctx + ": missing '" + key + "'");
  const double v = j.at(key).get<double>();
  if (!(v > 0.0)) throw ValidationError(ctx + ": '" + key + "' must be > 0");
  return v;
}

NoiseSpec parse_noise(const json& j, const std::string& ctx) {
  check_keys(j, {"kind", "sigma", "mean_photons"}, ctx);
  NoiseSpec spec = NoiseSpec::from_json(j);
  if (spec.kind != NoiseSpec::Kind::gaussian && j.contains("sigma")) {
    throw ValidationError(ctx + ": 'sigma' only applies to gaussian noise");
  }
  if (spec.kind != NoiseSpec::Kind::counting && j.contains("mean_photons")) {
    throw ValidationError(ctx + ": 'mean_photons' only applies to counting noise");
  }
  return spec;
}

}  // namespace

double PhysicsConfig::mass_kg() const { return mass_u * kAtomicMassKg; }

TrapFrequencies PhysicsConfig::trap() const {
  return TrapFrequencies::from_hz(trap_x_hz, trap_y_hz, trap_z_hz);
}

BeamGeometry PhysicsConfig::beams() const {
  return beam_geometry == RamanGeometry::perpendicular
             ? BeamGeometry::perpendicular_x(wavelength_m)
             : BeamGeometry::counterpropagating_default(wavelength_m);
}

ModeTable PhysicsConfig::mode_table() const {
  return build_mode_table(trap(), beams(), mass_kg());
}

PhysicsConfig preset_physics(const std::string& name) {
  if (name == kPresetNist1998) {
    PhysicsConfig p;
    p.trap_x_hz = 8.6e6;
    p.trap_y_hz = 17.6e6;
    p.trap_z_hz = 9.3e6;
    p.mass_u = kBe9MassU;
    p.wavelength_m = kBe9RamanWavelengthM;
    p.beam_geometry = RamanGeometry::perpendicular;
    p.rabi_frequency_hz = 250e3;
    p.linewidth_hz = 19.4e6;
    return p;
  }
  throw ValidationError("unknown preset: " + name);
}

namespace {

PhysicsConfig parse_physics(const json& j) {
  check_keys(j,
             {"trap_frequencies_hz", "mass_u", "wavelength_m", "beam_geometry",
              "rabi_frequency_hz", "linewidth_hz"},
             "physics");
  PhysicsConfig p;
  if (!j.contains("trap_frequencies_hz")) {
    throw ValidationError("physics: missing 'trap_frequencies_hz'");
  }
  const json& trap = j.at("trap_frequencies_hz");
  check_keys(trap, {"x", "y", "z"}, "physics.trap_frequencies_hz");
  p.trap_x_hz = require_positive(trap, "x", "physics.trap_frequencies_hz");
  p.trap_y_hz = require_positive(trap, "y", "physics.trap_frequencies_hz");
  p.trap_z_hz = require_positive(trap, "z", "physics.trap_frequencies_hz");
  p.mass_u = require_positive(j, "mass_u", "physics");
  p.wavelength_m = require_positive(j, "wavelength_m", "physics");
  p.rabi_frequency_hz = require_positive(j, "rabi_frequency_hz", "physics");
  p.linewidth_hz = require_positive(j, "linewidth_hz", "physics");
  if (!j.contains("beam_geometry")) {
    throw ValidationError("physics: missing 'beam_geometry'");
  }
  const auto geom = j.at("beam_geometry").get<std::string>();
  if (geom == "perpendicular") {
    p.beam_geometry = RamanGeometry::perpendicular;
  } else if (geom == "counterpropagating") {
    p.beam_geometry = RamanGeometry::counterpropagating;
  } else {
    throw ValidationError("physics: unknown beam_geometry '" + geom + "'");
  }
  return p;
}

SpectrumBlock parse_spectrum_block(const json& j) {
  check_keys(j,
             {"range_hz", "step_hz", "probe_time_s", "mode_nbars",
              "include_carrier", "background", "noise"},
             "experiment.spectrum");
  SpectrumBlock b;
  if (!j.contains("range_hz")) {
    throw ValidationError("experiment.spectrum: missing 'range_hz'");
  }
  const json& range = j.at("range_hz");
  if (!range.is_array() || range.size() != 2) {
    throw ValidationError("experiment.spectrum: 'range_hz' must be [min, max]");
  }
  b.range_min_hz = range[0].get<double>();
  b.range_max_hz = range[1].get<double>();
  b.step_hz = require_positive(j, "step_hz", "experiment.spectrum");
  if (j.contains("probe_time_s")) {
    b.probe_time_s = j.at("probe_time_s").get<double>();
    if (b.probe_time_s < 0.0) {
      throw ValidationError("experiment.spectrum: probe_time_s must be >= 0");
    }
  }
  if (j.contains("mode_nbars")) {
    for (const auto& [key, value] : j.at("mode_nbars").items()) {
      mode_id_from_string(key);  // validates the name
      b.mode_nbars.emplace_back(key, value.get<double>());
    }
  }
  b.include_carrier = j.value("include_carrier", true);
  b.background = j.value("background", 0.0);
  if (j.contains("noise")) b.noise = parse_noise(j.at("noise"), "experiment.spectrum.noise");
  return b;
}

CoolBlock parse_cool_block(const json& j) {
  check_keys(j,
             {"mode", "pulses", "durations_s", "t_max_s", "repump_recoil",
              "initial_nbar"},
             "experiment.cool");
  CoolBlock b;
  b.mode = j.value("mode", std::string("xCOM"));
  mode_id_from_string(b.mode);
  if (!j.contains("pulses")) {
    throw ValidationError("experiment.cool: missing 'pulses'");
  }
  b.pulses = j.at("pulses").get<int>();
  if (b.pulses < 0) throw ValidationError("experiment.cool: pulses must be >= 0");
  if (j.contains("durations_s")) {
    b.durations_s = j.at("durations_s").get<std::vector<double>>();
  }
  if (j.contains("t_max_s")) b.t_max_s = require_positive(j, "t_max_s", "experiment.cool");
  if (j.contains("repump_recoil")) b.repump_recoil = j.at("repump_recoil").get<double>();
  if (j.contains("initial_nbar")) b.initial_nbar = j.at("initial_nbar").get<double>();
  return b;
}

HeatScanBlock parse_heat_scan_block(const json& j) {
  check_keys(j,
             {"mode", "rate_per_ms", "delays_ms", "initial_nbar",
              "probe_time_s", "span_hz", "step_hz", "background", "noise"},
             "experiment.heat_scan");
  HeatScanBlock b;
  b.mode = j.value("mode", std::string("xCOM"));
  mode_id_from_string(b.mode);
  if (!j.contains("rate_per_ms")) {
    throw ValidationError("experiment.heat_scan: missing 'rate_per_ms'");
  }
  b.rate_per_ms = j.at("rate_per_ms").get<double>();
  if (b.rate_per_ms < 0.0) {
    throw ValidationError("experiment.heat_scan: rate_per_ms must be >= 0");
  }
  if (!j.contains("delays_ms")) {
    throw ValidationError("experiment.heat_scan: missing 'delays_ms'");
  }
  b.delays_ms = j.at("delays_ms").get<std::vector<double>>();
  if (j.contains("initial_nbar")) b.initial_nbar = j.at("initial_nbar").get<double>();
  if (j.contains("probe_time_s")) b.probe_time_s = j.at("probe_time_s").get<double>();
  if (j.contains("span_hz")) b.span_hz = j.at("span_hz").get<double>();
  if (j.contains("step_hz")) b.step_hz = j.at("step_hz").get<double>();
  b.background = j.value("background", 0.0);
  if (j.contains("noise")) b.noise = parse_noise(j.at("noise"), "experiment.heat_scan.noise");
  return b;
}

FitBlock parse_fit_block(const json& j) {
  check_keys(j, {"input_csv", "guesses_hz", "window_hz"}, "experiment.fit");
  FitBlock b;
  if (!j.contains("input_csv")) {
    throw ValidationError("experiment.fit: missing 'input_csv'");
  }
  b.input_csv = j.at("input_csv").get<std::string>();
  if (!j.contains("guesses_hz")) {
    throw ValidationError("experiment.fit: missing 'guesses_hz'");
  }
  b.guesses_hz = j.at("guesses_hz").get<std::vector<double>>();
  b.window_hz = require_positive(j, "window_hz", "experiment.fit");
  return b;
}

BudgetBlock parse_budget_block(const json& j) {
  check_keys(j, {"spectator_eta", "n2_spread", "fidelity_floor"},
             "experiment.budget");
  BudgetBlock b;
  if (j.contains("spectator_eta")) b.spectator_eta = j.at("spectator_eta").get<double>();
  if (j.contains("n2_spread")) b.n2_spread = j.at("n2_spread").get<double>();
  if (j.contains("fidelity_floor")) b.fidelity_floor = j.at("fidelity_floor").get<double>();
  return b;
}

bool config_has_noise(const RunConfig& cfg) {
  const auto noisy = [](const NoiseSpec& n) {
    return n.kind != NoiseSpec::Kind::none;
  };
  return (cfg.spectrum && noisy(cfg.spectrum->noise)) ||
         (cfg.heat_scan && noisy(cfg.heat_scan->noise));
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"preset", "physics", "seed", "experiment"}, "config");

  RunConfig cfg;
  if (j.contains("preset") && j.contains("physics")) {
    throw ValidationError("config: 'preset' and 'physics' are mutually exclusive");
  }
  if (j.contains("preset")) {
    cfg.preset = j.at("preset").get<std::string>();
    cfg.physics = preset_physics(*cfg.preset);
  } else if (j.contains("physics")) {
    cfg.physics = parse_physics(j.at("physics"));
    cfg.explicit_physics = true;
  } else {
    throw ValidationError("config: exactly one of 'preset' or 'physics' required");
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

  if (j.contains("experiment")) {
    const json& exp = j.at("experiment");
    check_keys(exp, {"spectrum", "cool", "heat_scan", "fit", "budget"},
               "experiment");
    if (exp.contains("spectrum")) cfg.spectrum = parse_spectrum_block(exp.at("spectrum"));
    if (exp.contains("cool")) cfg.cool = parse_cool_block(exp.at("cool"));
    if (exp.contains("heat_scan")) cfg.heat_scan = parse_heat_scan_block(exp.at("heat_scan"));
    if (exp.contains("fit")) cfg.fit = parse_fit_block(exp.at("fit"));
    if (exp.contains("budget")) cfg.budget = parse_budget_block(exp.at("budget"));
  }

  if (config_has_noise(cfg) && !cfg.seed) {
    throw ValidationError("config: 'seed' is required whenever noise is enabled");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json RunConfig::to_json() const {
  json j;
  if (preset) {
    j["preset"] = *preset;
  } else {
    j["physics"] = {
        {"trap_frequencies_hz",
         {{"x", physics.trap_x_hz}, {"y", physics.trap_y_hz}, {"z", physics.trap_z_hz}}},
        {"mass_u", physics.mass_u},
        {"wavelength_m", physics.wavelength_m},
        {"beam_geometry", physics.beam_geometry == RamanGeometry::perpendicular
                              ? "perpendicular"
                              : "counterpropagating"},
        {"rabi_frequency_hz", physics.rabi_frequency_hz},
        {"linewidth_hz", physics.linewidth_hz}};
  }
  if (seed) j["seed"] = *seed;

  json exp = json::object();
  if (spectrum) {
    json s = {{"range_hz", {spectrum->range_min_hz, spectrum->range_max_hz}},
              {"step_hz", spectrum->step_hz},
              {"include_carrier", spectrum->include_carrier},
              {"background", spectrum->background},
              {"noise", spectrum->noise.to_json()}};
    if (spectrum->probe_time_s > 0.0) s["probe_time_s"] = spectrum->probe_time_s;
    if (!spectrum->mode_nbars.empty()) {
      json nbars = json::object();
      for (const auto& [name, nbar] : spectrum->mode_nbars) nbars[name] = nbar;
      s["mode_nbars"] = nbars;
    }
    exp["spectrum"] = s;
  }
  if (cool) {
    json c = {{"mode", cool->mode},
              {"pulses", cool->pulses},
              {"t_max_s", cool->t_max_s}};
    if (!cool->durations_s.empty()) c["durations_s"] = cool->durations_s;
    if (cool->repump_recoil >= 0.0) c["repump_recoil"] = cool->repump_recoil;
    if (cool->initial_nbar >= 0.0) c["initial_nbar"] = cool->initial_nbar;
    exp["cool"] = c;
  }
  if (heat_scan) {
    json h = {{"mode", heat_scan->mode},
              {"rate_per_ms", heat_scan->rate_per_ms},
              {"delays_ms", heat_scan->delays_ms},
              {"background", heat_scan->background},
              {"noise", heat_scan->noise.to_json()}};
    if (heat_scan->initial_nbar >= 0.0) h["initial_nbar"] = heat_scan->initial_nbar;
    if (heat_scan->probe_time_s > 0.0) h["probe_time_s"] = heat_scan->probe_time_s;
    if (heat_scan->span_hz > 0.0) h["span_hz"] = heat_scan->span_hz;
    if (heat_scan->step_hz > 0.0) h["step_hz"] = heat_scan->step_hz;
    exp["heat_scan"] = h;
  }
  if (fit) {
    exp["fit"] = {{"input_csv", fit->input_csv},
                  {"guesses_hz", fit->guesses_hz},
                  {"window_hz", fit->window_hz}};
  }
  if (budget) {
    json b = {{"n2_spread", budget->n2_spread},
              {"fidelity_floor", budget->fidelity_floor}};
    if (budget->spectator_eta >= 0.0) b["spectator_eta"] = budget->spectator_eta;
    exp["budget"] = b;
  }
  if (!exp.empty()) j["experiment"] = exp;
  return j;
}

namespace {

namespace fs = std::filesystem;

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << text;
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

DriveParams drive_for_mode(const PhysicsConfig& physics, const Mode& mode,
                           int sideband) {
  DriveParams d;
  d.omega = hz_to_rad(physics.rabi_frequency_hz);
  d.eta = mode.eta;
  d.sideband = sideband;
  d.mode_sign = mode.geometry_class == GeometryClass::COM ? +1 : -1;
  return d;
}

OccupationDist initial_dist(const PhysicsConfig& physics, const Mode& mode,
                            double nbar_override) {
  if (nbar_override >= 0.0) return OccupationDist::thermal(nbar_override);
  return doppler_init(mode, hz_to_rad(physics.linewidth_hz));
}

// Probe time maximizing the upper-sideband feature of the given mode.
double auto_probe_time(const PhysicsConfig& physics, const Mode& mode,
                       const OccupationDist& dist) {
  const DriveParams up = drive_for_mode(physics, mode, +1);
  const double g0 = std::sqrt(6.0) * up.eta * up.omega;
  return optimal_probe_time(dist, up, 4.0 * kPi / g0);
}

int run_modes(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  const ModeTable table = cfg.physics.mode_table();
  json rows = json::array();
  out << "mode      freq_mhz   eta        class\n";
  for (const Mode& m : table.modes()) {
    char line[128];
    std::snprintf(line, sizeof line, "%-8s  %9.6f  %.6f   %s\n",
                  to_string(m.id).c_str(), rad_to_hz(m.omega) / 1e6, m.eta,
                  m.geometry_class == GeometryClass::COM ? "COM" : "differential");
    out << line;
    rows.push_back({{"mode", to_string(m.id)},
                    {"frequency_hz", rad_to_hz(m.omega)},
                    {"eta", m.eta},
                    {"geometry_class", m.geometry_class == GeometryClass::COM
                                           ? "COM"
                                           : "differential"}});
  }
  write_json_file(out_dir / "modes.json", json{{"modes", rows}});
  return 0;
}

int run_spectrum(const RunConfig& cfg, const fs::path& out_dir,
                 std::ostream& out) {
  if (!cfg.spectrum) throw ValidationError("config has no experiment.spectrum block");
  const SpectrumBlock& block = *cfg.spectrum;
  const ModeTable table = cfg.physics.mode_table();
  const double gamma = hz_to_rad(cfg.physics.linewidth_hz);

  ScanConfig scan_cfg;
  scan_cfg.delta_min = hz_to_rad(block.range_min_hz);
  scan_cfg.delta_max = hz_to_rad(block.range_max_hz);
  scan_cfg.step = hz_to_rad(block.step_hz);
  scan_cfg.omega = hz_to_rad(cfg.physics.rabi_frequency_hz);
  scan_cfg.include_carrier = block.include_carrier;
  scan_cfg.background = block.background;
  scan_cfg.noise = block.noise;
  scan_cfg.seed = cfg.seed.value_or(0);

  if (block.mode_nbars.empty()) {
    for (const Mode& m : table.modes()) {
      if (m.eta <= 0.0) continue;
      scan_cfg.mode_states.push_back({m, doppler_init(m, gamma)});
    }
  } else {
    for (const auto& [name, nbar] : block.mode_nbars) {
      const Mode& m = table[mode_id_from_string(name)];
      if (nbar < 0.0) throw ValidationError("mode_nbars values must be >= 0");
      scan_cfg.mode_states.push_back({m, OccupationDist::thermal(nbar)});
    }
  }
  if (scan_cfg.mode_states.empty()) {
    throw ValidationError("spectrum scan needs at least one motion-sensitive mode");
  }

  if (block.probe_time_s > 0.0) {
    scan_cfg.t_pr = block.probe_time_s;
  } else {
    const auto strongest = std::max_element(
        scan_cfg.mode_states.begin(), scan_cfg.mode_states.end(),
        [](const ModeState& a, const ModeState& b) {
          return a.mode.eta < b.mode.eta;
        });
    scan_cfg.t_pr =
        auto_probe_time(cfg.physics, strongest->mode, strongest->dist);
  }

  const Spectrum spec = scan(scan_cfg);
  std::ostringstream csv;
  write_spectrum_csv(csv, spec);
  write_text_file(out_dir / "spectrum.csv", csv.str());
  write_json_file(out_dir / "spectrum_meta.json", spec.metadata);
  out << "wrote " << (out_dir / "spectrum.csv").string() << " ("
      << spec.points.size() << " points, t_pr = " << format_sig9(scan_cfg.t_pr)
      << " s)\n";
  return 0;
}

int run_cool(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  if (!cfg.cool) throw ValidationError("config has no experiment.cool block");
  const CoolBlock& block = *cfg.cool;
  const ModeTable table = cfg.physics.mode_table();
  const Mode& mode = table[mode_id_from_string(block.mode)];
  if (mode.eta <= 0.0) {
    throw ValidationError("mode " + block.mode + " is not driven by this beam geometry");
  }

  CoolingCycleConfig cycle;
  cycle.target_mode = mode.id;
  cycle.pulses = block.pulses;
  cycle.pulse_durations = block.durations_s;
  cycle.drive = drive_for_mode(cfg.physics, mode, -1);
  cycle.repump_recoil =
      block.repump_recoil >= 0.0
          ? block.repump_recoil
          : recoil_nbar_per_event(kTwoPi / cfg.physics.wavelength_m,
                                  cfg.physics.mass_kg(), mode.omega);

  const OccupationDist initial =
      initial_dist(cfg.physics, mode, block.initial_nbar);
  const auto traj = run_cooling(initial, cycle, block.t_max_s);

  std::ostringstream csv;
  csv << "cycle,nbar,ground_fraction,duration_s\n";
  for (const auto& p : traj) {
    csv << p.cycle << ',' << format_sig9(p.nbar) << ','
        << format_sig9(p.ground_fraction) << ',' << format_sig9(p.duration)
        << '\n';
  }
  write_text_file(out_dir / "cooling.csv", csv.str());

  write_json_file(out_dir / "cooling_meta.json",
                  {{"mode", to_string(mode.id)},
                   {"pulses", cycle.pulses},
                   {"repump_recoil", cycle.repump_recoil},
                   {"initial_nbar", initial.mean()},
                   {"final_nbar", traj.back().nbar},
                   {"t_max_s", block.t_max_s}});
  out << "final nbar = " << format_sig9(traj.back().nbar) << " after "
      << cycle.pulses << " pulses\n";
  return 0;
}

int run_heat_scan(const RunConfig& cfg, const fs::path& out_dir,
                  std::ostream& out) {
  if (!cfg.heat_scan) throw ValidationError("config has no experiment.heat_scan block");
  const HeatScanBlock& block = *cfg.heat_scan;
  const ModeTable table = cfg.physics.mode_table();
  const Mode& mode = table[mode_id_from_string(block.mode)];
  if (mode.eta <= 0.0) {
    throw ValidationError("mode " + block.mode + " is not driven by this beam geometry");
  }
  const OccupationDist initial =
      initial_dist(cfg.physics, mode, block.initial_nbar);

  ProbeConfig probe;
  probe.omega = hz_to_rad(cfg.physics.rabi_frequency_hz);
  probe.t_pr = block.probe_time_s > 0.0
                   ? block.probe_time_s
                   : auto_probe_time(cfg.physics, mode, initial);
  probe.span = block.span_hz > 0.0 ? hz_to_rad(block.span_hz)
                                   : 5.0 * kTwoPi / probe.t_pr;
  probe.step = block.step_hz > 0.0 ? hz_to_rad(block.step_hz) : probe.span / 40.0;
  probe.background = block.background;
  probe.noise = block.noise;
  probe.seed = cfg.seed.value_or(0);

  const auto points =
      heating_scan(mode, initial, block.delays_ms, block.rate_per_ms, probe);

  std::ostringstream csv;
  csv << "delay_ms,nbar\n";
  for (const auto& [delay, nbar] : points) {
    csv << format_sig9(delay) << ',' << format_sig9(nbar) << '\n';
  }
  write_text_file(out_dir / "heat_scan.csv", csv.str());

  write_json_file(out_dir / "heat_scan_meta.json",
                  {{"mode", to_string(mode.id)},
                   {"injected_rate_per_ms", block.rate_per_ms},
                   {"fitted_rate_per_ms", linear_slope(points)},
                   {"probe_time_s", probe.t_pr},
                   {"span_hz", rad_to_hz(probe.span)},
                   {"step_hz", rad_to_hz(probe.step)},
                   {"initial_nbar", initial.mean()},
                   {"seed", probe.seed}});
  out << "fitted rate = " << format_sig9(linear_slope(points)) << " /ms\n";
  return 0;
}

int run_fit(const RunConfig& cfg, const fs::path& out_dir, std::ostream& out) {
  if (!cfg.fit) throw ValidationError("config has no experiment.fit block");
  const FitBlock& block = *cfg.fit;
  std::ifstream in(block.input_csv);
  if (!in) throw ParseError("cannot open spectrum CSV: " + block.input_csv);
  const Spectrum spec = read_spectrum_csv(in);

  std::vector<double> guesses;
  guesses.reserve(block.guesses_hz.size());
  for (double g : block.guesses_hz) guesses.push_back(hz_to_rad(g));

  const auto fits = fit_peaks(spec, guesses, hz_to_rad(block.window_hz));
  json records = json::array();
  for (const PeakFit& f : fits) records.push_back(f.to_json());
  write_json_file(out_dir / "fits.json", json{{"peaks", records}});
  out << "fitted " << fits.size() << " features\n";
  return 0;
}

int run_budget(const RunConfig& cfg, const fs::path& out_dir,
               std::ostream& out) {
  const BudgetBlock block = cfg.budget.value_or(BudgetBlock{});
  double eta2 = block.spectator_eta;
  if (eta2 < 0.0) eta2 = cfg.physics.mode_table()[ModeId::xCOM].eta;
  const int k = operations_budget(eta2, block.n2_spread, block.fidelity_floor);

  json record = {{"spectator_eta", eta2},
                 {"n2_spread", block.n2_spread},
                 {"fidelity_floor", block.fidelity_floor}};
  if (k == kNoOperationsLimit) {
    record["operations"] = nullptr;
    record["unbounded"] = true;
    out << "operations budget: no limit\n";
  } else {
    record["operations"] = k;
    record["unbounded"] = false;
    out << "operations budget: " << k << "\n";
  }
  write_json_file(out_dir / "budget.json", record);
  return 0;
}

}  // namespace

int run_subcommand(const std::string& subcommand, const RunConfig& cfg,
                   const std::string& out_dir, std::ostream& out,
                   std::ostream& err) {
  try {
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    fs::create_directories(dir);
    if (subcommand == "modes") return run_modes(cfg, dir, out);
    if (subcommand == "spectrum") return run_spectrum(cfg, dir, out);
    if (subcommand == "cool") return run_cool(cfg, dir, out);
    if (subcommand == "heat-scan") return run_heat_scan(cfg, dir, out);
    if (subcommand == "fit") return run_fit(cfg, dir, out);
    if (subcommand == "budget") return run_budget(cfg, dir, out);
    throw ValidationError("unknown subcommand: " + subcommand);
  } catch (const std::exception& e) {
    const char* kind = "error";
    if (dynamic_cast<const ParseError*>(&e)) kind = "parse_error";
    else if (dynamic_cast<const ValidationError*>(&e)) kind = "validation_error";
    else if (dynamic_cast<const FitDiverged*>(&e)) kind = "fit_diverged";
    else if (dynamic_cast<const NoRoot*>(&e)) kind = "no_root";
    else if (dynamic_cast<const RockingUnstable*>(&e)) kind = "rocking_unstable";
    else if (dynamic_cast<const TruncationOverflow*>(&e)) kind = "truncation_overflow";
    err << json{{"error", kind}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
}

}  // namespace ionsim
