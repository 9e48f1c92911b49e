#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include <json.hpp>

namespace ionsim {

// Spin basis ordering is fixed as (dd, du, ud, uu) everywhere, including
// serialized output.
enum class SpinPair { dd = 0, du = 1, ud = 2, uu = 3 };

inline constexpr double kDefaultTailTol = 1e-8;

// Joint pure state of two spins and one truncated motional mode.
// Amplitudes are indexed as spin * (N+1) + n.
class SpinMotionState {
 public:
  using Complex = std::complex<double>;

  SpinMotionState(int truncation, std::vector<Complex> amplitudes);

  // |spin, n> product state.
  static SpinMotionState fock(SpinPair spin, int n, int truncation);

  int truncation() const { return truncation_; }
  std::size_t size() const { return amp_.size(); }

  Complex& at(SpinPair spin, int n);
  const Complex& at(SpinPair spin, int n) const;

  const std::vector<Complex>& amplitudes() const { return amp_; }
  std::vector<Complex>& amplitudes() { return amp_; }

  double norm() const;

  // |amplitude|^2 summed over n, one entry per spin pair.
  std::array<double, 4> populations_by_spin() const;

  // Population in the top two motional levels (N-1 and N).
  double tail_population() const;

  // Same state embedded in a larger truncation.
  SpinMotionState grown(int new_truncation) const;

  nlohmann::json to_json() const;
  static SpinMotionState from_json(const nlohmann::json& j);

 private:
  int truncation_;
  std::vector<Complex> amp_;
};

SpinMotionState product_state(SpinPair spin, int n, int truncation);

enum class DistKind { thermal, general };

// Classical occupation distribution over Fock levels of one mode.
class OccupationDist {
 public:
  // Geometric (Bose-Einstein) distribution truncated at the smallest N with
  // tail < tail_tol, then renormalized.
  static OccupationDist thermal(double nbar, double tail_tol = kDefaultTailTol);
  static OccupationDist general(std::vector<double> p);

  const std::vector<double>& p() const { return p_; }
  double operator[](std::size_t n) const { return n < p_.size() ? p_[n] : 0.0; }
  std::size_t levels() const { return p_.size(); }
  int truncation() const { return static_cast<int>(p_.size()) - 1; }

  DistKind kind() const { return kind_; }
  double mean() const;
  double ground_fraction() const { return p_.empty() ? 0.0 : p_.front(); }

  nlohmann::json to_json() const;
  static OccupationDist from_json(const nlohmann::json& j);

 private:
  OccupationDist(std::vector<double> p, DistKind kind);

  std::vector<double> p_;
  DistKind kind_;
};

inline double ground_fraction(const OccupationDist& d) {
  return d.ground_fraction();
}
inline double mean_occupation(const OccupationDist& d) { return d.mean(); }

}  // namespace ionsim
