#include "ionsim/modes.hpp"

#include <cmath>
#include <stdexcept>

#include "ionsim/constants.hpp"
#include "ionsim/errors.hpp"

namespace ionsim {

std::string to_string(ModeId id) {
  switch (id) {
    case ModeId::xCOM: return "xCOM";
    case ModeId::xSTR: return "xSTR";
    case ModeId::yCOM: return "yCOM";
    case ModeId::zCOM: return "zCOM";
    case ModeId::xyROCK: return "xyROCK";
    case ModeId::xzROCK: return "xzROCK";
  }
  throw std::invalid_argument("unknown ModeId");
}

ModeId mode_id_from_string(const std::string& name) {
  for (ModeId id : kAllModes) {
    if (to_string(id) == name) return id;
  }
  throw std::invalid_argument("unknown mode name: " + name);
}

int axis_of(ModeId id) {
  switch (id) {
    case ModeId::xCOM:
    case ModeId::xSTR: return 0;
    case ModeId::yCOM:
    case ModeId::xyROCK: return 1;
    case ModeId::zCOM:
    case ModeId::xzROCK: return 2;
  }
  throw std::invalid_argument("unknown ModeId");
}

GeometryClass geometry_class_of(ModeId id) {
  switch (id) {
    case ModeId::xCOM:
    case ModeId::yCOM:
    case ModeId::zCOM: return GeometryClass::COM;
    default: return GeometryClass::differential;
  }
}

int mode_sign_of(ModeId id) {
  return geometry_class_of(id) == GeometryClass::COM ? +1 : -1;
}

TrapFrequencies TrapFrequencies::from_hz(double fx, double fy, double fz) {
  return {hz_to_rad(fx), hz_to_rad(fy), hz_to_rad(fz)};
}

double BeamGeometry::delta_k() const {
  const double factor =
      geometry == RamanGeometry::perpendicular ? std::sqrt(2.0) : 2.0;
  return factor * wavevector_magnitude;
}

double BeamGeometry::delta_k_along(int axis) const {
  if (axis < 0 || axis > 2) throw std::invalid_argument("axis must be 0..2");
  return delta_k() * std::abs(projection[static_cast<std::size_t>(axis)]);
}

BeamGeometry BeamGeometry::perpendicular_x(double wavelength_m) {
  if (wavelength_m <= 0.0) throw std::invalid_argument("wavelength must be > 0");
  return {kTwoPi / wavelength_m, RamanGeometry::perpendicular, {1.0, 0.0, 0.0}};
}

BeamGeometry BeamGeometry::counterpropagating_default(double wavelength_m) {
  if (wavelength_m <= 0.0) throw std::invalid_argument("wavelength must be > 0");
  // dk along the R2 beam direction (-1/sqrt2, -1/2, 1/2); magnitudes only.
  return {kTwoPi / wavelength_m,
          RamanGeometry::counterpropagating,
          {1.0 / std::sqrt(2.0), 0.5, 0.5}};
}

namespace {

void check_projection(const BeamGeometry& beams) {
  for (double c : beams.projection) {
    if (!(c >= -1.0 && c <= 1.0)) {
      throw std::invalid_argument("projection components must lie in [-1, 1]");
    }
  }
}

}  // namespace

double lamb_dicke_single(double omega_m, double mass_kg,
                         const BeamGeometry& beams, int axis) {
  if (omega_m <= 0.0) throw std::invalid_argument("omega_m must be > 0");
  if (mass_kg <= 0.0) throw std::invalid_argument("mass must be > 0");
  check_projection(beams);
  const double x0 = std::sqrt(kHbar / (2.0 * mass_kg * omega_m));
  return x0 * beams.delta_k_along(axis);
}

double mode_lamb_dicke(double eta_single, double freq_ratio) {
  if (eta_single < 0.0) throw std::invalid_argument("eta_single must be >= 0");
  if (freq_ratio <= 0.0) throw std::invalid_argument("freq_ratio must be > 0");
  return eta_single / std::sqrt(2.0 * freq_ratio);
}

double mode_lamb_dicke(double eta_single, ModeId id) {
  switch (id) {
    case ModeId::xCOM:
    case ModeId::yCOM:
    case ModeId::zCOM: return mode_lamb_dicke(eta_single, 1.0);
    case ModeId::xSTR: return mode_lamb_dicke(eta_single, std::sqrt(3.0));
    default:
      throw std::invalid_argument(
          "rocking-mode Lamb-Dicke factor needs the trap frequencies");
  }
}

double mode_lamb_dicke(double eta_single, ModeId id,
                       const TrapFrequencies& trap) {
  switch (id) {
    case ModeId::xyROCK: {
      const double omega = std::sqrt(trap.omega_y * trap.omega_y -
                                     trap.omega_x * trap.omega_x);
      return mode_lamb_dicke(eta_single, omega / trap.omega_y);
    }
    case ModeId::xzROCK: {
      const double omega = std::sqrt(trap.omega_z * trap.omega_z -
                                     trap.omega_x * trap.omega_x);
      return mode_lamb_dicke(eta_single, omega / trap.omega_z);
    }
    default: return mode_lamb_dicke(eta_single, id);
  }
}

ModeTable build_mode_table(const TrapFrequencies& trap,
                           const BeamGeometry& beams, double mass_kg) {
  if (trap.omega_x <= 0.0 || trap.omega_y <= 0.0 || trap.omega_z <= 0.0) {
    throw std::invalid_argument("trap frequencies must be > 0");
  }
  if (trap.omega_y <= trap.omega_x || trap.omega_z <= trap.omega_x) {
    throw RockingUnstable(
        "rocking modes require omega_y > omega_x and omega_z > omega_x");
  }
  check_projection(beams);

  const std::array<double, 3> axis_com = {trap.omega_x, trap.omega_y,
                                          trap.omega_z};

  const auto frequency_of = [&](ModeId id) -> double {
    switch (id) {
      case ModeId::xCOM: return trap.omega_x;
      case ModeId::xSTR: return std::sqrt(3.0) * trap.omega_x;
      case ModeId::yCOM: return trap.omega_y;
      case ModeId::zCOM: return trap.omega_z;
      case ModeId::xyROCK:
        return std::sqrt(trap.omega_y * trap.omega_y -
                         trap.omega_x * trap.omega_x);
      case ModeId::xzROCK:
        return std::sqrt(trap.omega_z * trap.omega_z -
                         trap.omega_x * trap.omega_x);
    }
    throw std::invalid_argument("unknown ModeId");
  };

  std::array<Mode, kModeCount> modes{};
  for (std::size_t i = 0; i < kModeCount; ++i) {
    const ModeId id = kAllModes[i];
    const int axis = axis_of(id);
    const double omega = frequency_of(id);
    const double eta_single = lamb_dicke_single(
        axis_com[static_cast<std::size_t>(axis)], mass_kg, beams, axis);
    const double eta = mode_lamb_dicke(
        eta_single, omega / axis_com[static_cast<std::size_t>(axis)]);
    modes[i] = Mode{id, omega, eta, geometry_class_of(id)};
  }
  return ModeTable(modes);
}

}  // namespace ionsim
