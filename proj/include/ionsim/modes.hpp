#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace ionsim {

// The six normal modes of two ions aligned along x.
enum class ModeId { xCOM = 0, xSTR, yCOM, zCOM, xyROCK, xzROCK };

inline constexpr std::size_t kModeCount = 6;
inline constexpr std::array<ModeId, kModeCount> kAllModes = {
    ModeId::xCOM, ModeId::xSTR, ModeId::yCOM,
    ModeId::zCOM, ModeId::xyROCK, ModeId::xzROCK};

// COM modes couple to uniform fields; differential (stretch/rocking) modes
// only to field gradients.
enum class GeometryClass { COM, differential };

enum class RamanGeometry { perpendicular, counterpropagating };

std::string to_string(ModeId id);
ModeId mode_id_from_string(const std::string& name);

int axis_of(ModeId id);  // 0 = x, 1 = y, 2 = z
GeometryClass geometry_class_of(ModeId id);
int mode_sign_of(ModeId id);  // +1 for COM, -1 for differential

// Single-ion pseudopotential oscillation frequencies, rad/s.
struct TrapFrequencies {
  double omega_x = 0.0;
  double omega_y = 0.0;
  double omega_z = 0.0;

  static TrapFrequencies from_hz(double fx, double fy, double fz);
};

// Raman beam pair: |dk| = sqrt(2) k for perpendicular beams, 2 k for
// counterpropagating. `projection` holds the direction cosines of dk.
struct BeamGeometry {
  double wavevector_magnitude = 0.0;  // 2*pi/lambda of one beam, rad/m
  RamanGeometry geometry = RamanGeometry::perpendicular;
  std::array<double, 3> projection = {1.0, 0.0, 0.0};

  double delta_k() const;
  double delta_k_along(int axis) const;

  static BeamGeometry perpendicular_x(double wavelength_m);
  static BeamGeometry counterpropagating_default(double wavelength_m);
};

struct Mode {
  ModeId id;
  double omega;  // rad/s
  double eta;    // mode Lamb-Dicke parameter
  GeometryClass geometry_class;
};

class ModeTable {
 public:
  explicit ModeTable(std::array<Mode, kModeCount> modes) : modes_(modes) {}

  const Mode& operator[](ModeId id) const {
    return modes_[static_cast<std::size_t>(id)];
  }
  const std::array<Mode, kModeCount>& modes() const { return modes_; }

 private:
  std::array<Mode, kModeCount> modes_;
};

// Throws RockingUnstable if omega_y <= omega_x or omega_z <= omega_x.
ModeTable build_mode_table(const TrapFrequencies& trap,
                           const BeamGeometry& beams, double mass_kg);

// x0 * |dk . axis| with x0 = sqrt(hbar / (2 m omega_m)).
double lamb_dicke_single(double omega_m, double mass_kg,
                         const BeamGeometry& beams, int axis);

// eta_single / sqrt(2 * freq_ratio), freq_ratio = omega_mode / omega_axisCOM.
// The sqrt(2) is the two-ion mass factor; the ratio generalizes the stretch
// mode's 1/sqrt(2 sqrt(3)).
double mode_lamb_dicke(double eta_single, double freq_ratio);

// Convenience for modes whose frequency ratio is a fixed constant
// (COM modes and xSTR). Rocking modes need the trap frequencies.
double mode_lamb_dicke(double eta_single, ModeId id);
double mode_lamb_dicke(double eta_single, ModeId id,
                       const TrapFrequencies& trap);

}  // namespace ionsim
