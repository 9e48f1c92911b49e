#include "ionsim/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

using Complex = std::complex<double>;
constexpr Complex kI{0.0, 1.0};

// Raman beam phases at the two ions, reconstructed from their sum and
// difference.
double ion1_phase(const DriveParams& d) { return 0.5 * (d.theta + d.phi); }
double ion2_phase(const DriveParams& d) { return 0.5 * (d.theta - d.phi); }

// Differential modes drive the two ions with opposite motional amplitude.
void ion_signs(const DriveParams& d, double& s1, double& s2) {
  s1 = d.mode_sign > 0 ? 1.0 : -1.0;
  s2 = 1.0;
}

// Motional matrix-element ladder for the one-ion flip out of level n.
double flip_element(const DriveParams& d, int n) {
  switch (d.sideband) {
    case -1: return n > 0 ? d.eta * d.omega * std::sqrt(static_cast<double>(n)) : 0.0;
    case +1: return d.eta * d.omega * std::sqrt(static_cast<double>(n + 1));
    case 0: return 0.5 * d.omega;
    default: throw InvalidSideband("sideband must be -1, 0, or +1");
  }
}

}  // namespace

void DriveParams::validate() const {
  if (omega < 0.0) throw std::invalid_argument("omega must be >= 0");
  if (eta < 0.0) throw std::invalid_argument("eta must be >= 0");
  if (sideband < -1 || sideband > 1) {
    throw InvalidSideband("sideband must be -1, 0, or +1");
  }
  if (mode_sign != 1 && mode_sign != -1) {
    throw std::invalid_argument("mode_sign must be +1 or -1");
  }
}

double single_ion_sideband_rabi(int n, SidebandDirection direction, double eta,
                                double omega) {
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  const double m = direction == SidebandDirection::lower
                       ? static_cast<double>(n)
                       : static_cast<double>(n + 1);
  return eta * std::sqrt(m) * omega;
}

double collective_sideband_frequency(int n, double omega, double eta) {
  if (n < 1) return 0.0;
  return std::sqrt(2.0 * (2.0 * n - 1.0)) * omega * eta;
}

namespace {

// Shared closed form for the resonant |dd,n> manifold. m1 and m2 are the
// squared ladder elements of the first and second flip (lower: n, n-1;
// upper: n+1, n+2). The Bell part carries the top sign for COM drives.
SpinMotionState closed_form_evolve(int n, const DriveParams& drive, double t,
                                   int m1, int m2, int n_flip, int n_uu) {
  const double kappa = drive.eta * drive.omega;
  const double msum = static_cast<double>(m1 + m2);
  const int trunc = std::max({2, n, n_flip, n_uu});
  SpinMotionState state = SpinMotionState::fock(SpinPair::dd, n, trunc);
  if (m1 == 0) return state;  // lower sideband from n = 0: dark

  const double g = kappa * std::sqrt(2.0 * msum);
  const double c = std::cos(g * t);
  const double s = std::sin(g * t);
  const double sign = drive.mode_sign > 0 ? 1.0 : -1.0;

  const Complex bell = -kI * std::exp(kI * 0.5 * (drive.theta - drive.phi)) *
                       std::sqrt(m1 / msum) * s / std::sqrt(2.0);
  state.at(SpinPair::dd, n) = 1.0 - (m1 / msum) * (1.0 - c);
  state.at(SpinPair::du, n_flip) = bell;
  state.at(SpinPair::ud, n_flip) = sign * std::exp(kI * drive.phi) * bell;
  if (n_uu >= 0 && m2 > 0) {
    state.at(SpinPair::uu, n_uu) = -sign * std::exp(kI * drive.theta) *
                                   std::sqrt(static_cast<double>(m1) * m2) /
                                   msum * (1.0 - c);
  }
  return state;
}

}  // namespace

SpinMotionState two_ion_lower_sideband_evolve(int n, const DriveParams& drive,
                                              double t) {
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  drive.validate();
  if (drive.sideband != -1 || drive.detuning != 0.0) {
    throw InvalidSideband(
        "two_ion_lower_sideband_evolve requires sideband -1 at zero detuning");
  }
  return closed_form_evolve(n, drive, t, n, std::max(n - 1, 0),
                            std::max(n - 1, 0), n - 2);
}

SpinMotionState two_ion_upper_sideband_evolve(int n, const DriveParams& drive,
                                              double t) {
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  drive.validate();
  if (drive.sideband != +1 || drive.detuning != 0.0) {
    throw InvalidSideband(
        "two_ion_upper_sideband_evolve requires sideband +1 at zero detuning");
  }
  return closed_form_evolve(n, drive, t, n + 1, n + 2, n + 1, n + 2);
}

SubspaceAmplitudes evolve_from_ground_pair(int n, const DriveParams& drive,
                                           double t) {
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  drive.validate();

  const int n_flip = n + drive.sideband;
  const int n_uu = n + 2 * drive.sideband;
  double s1, s2;
  ion_signs(drive, s1, s2);
  const Complex e1 = std::exp(kI * ion1_phase(drive));
  const Complex e2 = std::exp(kI * ion2_phase(drive));

  const double c1 = flip_element(drive, n);
  const double c2 = n_flip >= 0 ? flip_element(drive, n_flip) : 0.0;

  Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
  // Basis order: dd, du, ud, uu.
  h(1, 0) = c1 * s2 * e2;
  h(2, 0) = c1 * s1 * e1;
  if (n_uu >= 0) {
    h(3, 1) = c2 * s1 * e1;
    h(3, 2) = c2 * s2 * e2;
  }
  h(0, 1) = std::conj(h(1, 0));
  h(0, 2) = std::conj(h(2, 0));
  h(1, 3) = std::conj(h(3, 1));
  h(2, 3) = std::conj(h(3, 2));
  h(1, 1) = -drive.detuning;
  h(2, 2) = -drive.detuning;
  h(3, 3) = -2.0 * drive.detuning;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(h);
  const Eigen::Vector4cd psi0(1.0, 0.0, 0.0, 0.0);
  const Eigen::Vector4cd coeffs = solver.eigenvectors().adjoint() * psi0;
  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  for (int k = 0; k < 4; ++k) {
    psi += coeffs(k) * std::exp(-kI * solver.eigenvalues()(k) * t) *
           solver.eigenvectors().col(k);
  }

  SubspaceAmplitudes out;
  out.dd = psi(0);
  out.du = n_flip >= 0 ? psi(1) : Complex{0.0, 0.0};
  out.ud = n_flip >= 0 ? psi(2) : Complex{0.0, 0.0};
  out.uu = n_uu >= 0 ? psi(3) : Complex{0.0, 0.0};
  out.n_dd = n;
  out.n_flip = std::max(n_flip, 0);
  out.n_uu = std::max(n_uu, 0);
  return out;
}

namespace {

// y += -i * H * x on the full 4*(N+1) space.
void apply_minus_i_h(const DriveParams& drive, int trunc,
                     const std::vector<Complex>& x, std::vector<Complex>& y) {
  const std::size_t levels = static_cast<std::size_t>(trunc + 1);
  const auto idx = [levels](SpinPair s, int n) {
    return static_cast<std::size_t>(s) * levels + static_cast<std::size_t>(n);
  };

  double s1, s2;
  ion_signs(drive, s1, s2);
  const Complex g1 = s1 * std::exp(kI * ion1_phase(drive));
  const Complex g2 = s2 * std::exp(kI * ion2_phase(drive));

  std::fill(y.begin(), y.end(), Complex{0.0, 0.0});

  struct Flip {
    SpinPair from, to;
    bool ion1;
  };
  static constexpr Flip kFlips[4] = {
      {SpinPair::dd, SpinPair::ud, true},
      {SpinPair::dd, SpinPair::du, false},
      {SpinPair::du, SpinPair::uu, true},
      {SpinPair::ud, SpinPair::uu, false},
  };

  for (int n = 0; n <= trunc; ++n) {
    const int np = n + drive.sideband;
    if (np < 0 || np > trunc) continue;
    const double elem = flip_element(drive, n);
    if (elem == 0.0) continue;
    for (const Flip& f : kFlips) {
      const Complex g = f.ion1 ? g1 : g2;
      y[idx(f.to, np)] += -kI * g * elem * x[idx(f.from, n)];
      y[idx(f.from, n)] += -kI * std::conj(g) * elem * x[idx(f.to, np)];
    }
  }

  if (drive.detuning != 0.0) {
    static constexpr double kFlipCount[4] = {0.0, 1.0, 1.0, 2.0};
    for (std::size_t s = 0; s < 4; ++s) {
      if (kFlipCount[s] == 0.0) continue;
      const Complex d = kI * drive.detuning * kFlipCount[s];
      for (std::size_t n = 0; n < levels; ++n) {
        const std::size_t i = idx(static_cast<SpinPair>(s), static_cast<int>(n));
        y[i] += d * x[i];
      }
    }
  }
}

SpinMotionState rk4_propagate(const SpinMotionState& state,
                              const DriveParams& drive, double t,
                              const StepControl& ctrl) {
  const int trunc = state.truncation();
  // Spectral-radius estimate: collective coupling at the truncation edge
  // plus the detuning ladder.
  const double g_max =
      drive.sideband == 0
          ? drive.omega
          : drive.eta * drive.omega * std::sqrt(2.0 * (2.0 * trunc + 3.0));
  const double scale = g_max + 2.0 * std::abs(drive.detuning);
  if (scale <= 0.0 || t == 0.0) return state;

  const double h_max = 1.0 / (ctrl.substep_factor * scale);
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(t / h_max)));
  const double h = t / static_cast<double>(steps);

  std::vector<Complex> psi = state.amplitudes();
  const std::size_t dim = psi.size();
  std::vector<Complex> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

  for (long step = 0; step < steps; ++step) {
    apply_minus_i_h(drive, trunc, psi, k1);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * h * k1[i];
    apply_minus_i_h(drive, trunc, tmp, k2);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * h * k2[i];
    apply_minus_i_h(drive, trunc, tmp, k3);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + h * k3[i];
    apply_minus_i_h(drive, trunc, tmp, k4);
    for (std::size_t i = 0; i < dim; ++i) {
      psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  return SpinMotionState(trunc, std::move(psi));
}

}  // namespace

SpinMotionState propagate_numeric(const SpinMotionState& state,
                                  const DriveParams& drive, double t,
                                  const StepControl& ctrl) {
  drive.validate();
  if (t < 0.0) throw std::invalid_argument("t must be >= 0");
  if (t == 0.0) return state;

  SpinMotionState current = state;
  while (true) {
    SpinMotionState result = rk4_propagate(current, drive, t, ctrl);
    const double drift = std::abs(result.norm() - 1.0);
    if (drift > ctrl.norm_tol) {
      throw std::runtime_error("propagator norm drift " +
                               std::to_string(drift) + " exceeds tolerance");
    }
    if (result.tail_population() < ctrl.tail_tol) return result;
    const int new_trunc =
        std::max(current.truncation() + 4, current.truncation() * 3 / 2);
    if (new_trunc > ctrl.max_truncation) {
      throw TruncationOverflow(
          "population reached the top Fock levels at the regrowth cap");
    }
    current = current.grown(new_trunc);
  }
}

double spectator_corrected_rabi(int n1, int n1p, double eta1, double eta2,
                                int n2, double omega) {
  if (std::abs(n1 - n1p) != 1) {
    throw std::invalid_argument("first-sideband transition requires |n1-n1p| = 1");
  }
  if (eta1 < 0.0 || eta2 < 0.0) throw std::invalid_argument("eta must be >= 0");
  if (n2 < 0) throw std::invalid_argument("n2 must be >= 0");
  const double n_greater = static_cast<double>(std::max(n1, n1p));
  return omega * eta1 * std::sqrt(n_greater) *
         std::exp(-0.5 * (eta1 * eta1 + eta2 * eta2)) *
         (1.0 - static_cast<double>(n2) * eta2 * eta2);
}

}  // namespace ionsim
