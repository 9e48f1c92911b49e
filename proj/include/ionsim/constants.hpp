#pragma once

namespace ionsim {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// CODATA 2018
inline constexpr double kHbar = 1.054571817e-34;          // J s
inline constexpr double kAtomicMassKg = 1.66053906660e-27; // kg per u

// 9Be+ preset values
inline constexpr double kBe9MassU = 9.012182;
inline constexpr double kBe9RamanWavelengthM = 313.0e-9;

constexpr double hz_to_rad(double f_hz) { return kTwoPi * f_hz; }
constexpr double rad_to_hz(double omega) { return omega / kTwoPi; }

}  // namespace ionsim
