#include "ionsim/hilbert.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ionsim {

SpinMotionState::SpinMotionState(int truncation, std::vector<Complex> amplitudes)
    : truncation_(truncation), amp_(std::move(amplitudes)) {
  if (truncation_ < 1) throw std::invalid_argument("truncation must be >= 1");
  if (amp_.size() != 4 * static_cast<std::size_t>(truncation_ + 1)) {
    throw std::invalid_argument("amplitude vector size must be 4*(N+1)");
  }
}

SpinMotionState SpinMotionState::fock(SpinPair spin, int n, int truncation) {
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  if (truncation < n) throw std::invalid_argument("truncation must be >= n");
  std::vector<Complex> amp(4 * static_cast<std::size_t>(truncation + 1), 0.0);
  SpinMotionState state(truncation, std::move(amp));
  state.at(spin, n) = 1.0;
  return state;
}

SpinMotionState::Complex& SpinMotionState::at(SpinPair spin, int n) {
  return amp_[static_cast<std::size_t>(spin) *
                  static_cast<std::size_t>(truncation_ + 1) +
              static_cast<std::size_t>(n)];
}

const SpinMotionState::Complex& SpinMotionState::at(SpinPair spin, int n) const {
  return amp_[static_cast<std::size_t>(spin) *
                  static_cast<std::size_t>(truncation_ + 1) +
              static_cast<std::size_t>(n)];
}

double SpinMotionState::norm() const {
  double s = 0.0;
  for (const Complex& a : amp_) s += std::norm(a);
  return std::sqrt(s);
}

std::array<double, 4> SpinMotionState::populations_by_spin() const {
  std::array<double, 4> pops{};
  const std::size_t levels = static_cast<std::size_t>(truncation_ + 1);
  for (std::size_t spin = 0; spin < 4; ++spin) {
    double s = 0.0;
    for (std::size_t n = 0; n < levels; ++n) {
      s += std::norm(amp_[spin * levels + n]);
    }
    pops[spin] = s;
  }
  return pops;
}

double SpinMotionState::tail_population() const {
  const std::size_t levels = static_cast<std::size_t>(truncation_ + 1);
  double s = 0.0;
  for (std::size_t spin = 0; spin < 4; ++spin) {
    s += std::norm(amp_[spin * levels + levels - 1]);
    s += std::norm(amp_[spin * levels + levels - 2]);
  }
  return s;
}

SpinMotionState SpinMotionState::grown(int new_truncation) const {
  if (new_truncation < truncation_) {
    throw std::invalid_argument("grown() cannot shrink the truncation");
  }
  std::vector<Complex> amp(4 * static_cast<std::size_t>(new_truncation + 1),
                           0.0);
  const std::size_t old_levels = static_cast<std::size_t>(truncation_ + 1);
  const std::size_t new_levels = static_cast<std::size_t>(new_truncation + 1);
  for (std::size_t spin = 0; spin < 4; ++spin) {
    for (std::size_t n = 0; n < old_levels; ++n) {
      amp[spin * new_levels + n] = amp_[spin * old_levels + n];
    }
  }
  return SpinMotionState(new_truncation, std::move(amp));
}

nlohmann::json SpinMotionState::to_json() const {
  std::vector<double> re, im;
  re.reserve(amp_.size());
  im.reserve(amp_.size());
  for (const Complex& a : amp_) {
    re.push_back(a.real());
    im.push_back(a.imag());
  }
  return {{"truncation", truncation_},
          {"amplitudes_re", re},
          {"amplitudes_im", im}};
}

SpinMotionState SpinMotionState::from_json(const nlohmann::json& j) {
  const int truncation = j.at("truncation").get<int>();
  const auto re = j.at("amplitudes_re").get<std::vector<double>>();
  const auto im = j.at("amplitudes_im").get<std::vector<double>>();
  if (re.size() != im.size()) {
    throw std::invalid_argument("amplitudes_re/amplitudes_im size mismatch");
  }
  std::vector<Complex> amp(re.size());
  for (std::size_t i = 0; i < re.size(); ++i) amp[i] = {re[i], im[i]};
  return SpinMotionState(truncation, std::move(amp));
}

SpinMotionState product_state(SpinPair spin, int n, int truncation) {
  return SpinMotionState::fock(spin, n, truncation);
}

OccupationDist::OccupationDist(std::vector<double> p, DistKind kind)
    : p_(std::move(p)), kind_(kind) {
  if (p_.empty()) throw std::invalid_argument("distribution must be non-empty");
  double sum = 0.0;
  for (double v : p_) {
    if (v < 0.0) throw std::invalid_argument("probabilities must be >= 0");
    sum += v;
  }
  if (sum <= 0.0) throw std::invalid_argument("distribution must not be all zero");
  for (double& v : p_) v /= sum;
}

OccupationDist OccupationDist::thermal(double nbar, double tail_tol) {
  if (nbar < 0.0) throw std::invalid_argument("nbar must be >= 0");
  if (tail_tol <= 0.0 || tail_tol >= 1.0) {
    throw std::invalid_argument("tail_tol must be in (0, 1)");
  }
  if (nbar == 0.0) return OccupationDist({1.0}, DistKind::thermal);

  // Tail beyond N is (nbar/(1+nbar))^(N+1).
  const double r = nbar / (1.0 + nbar);
  const int levels = static_cast<int>(
      std::ceil(std::log(tail_tol) / std::log(r)));
  std::vector<double> p(static_cast<std::size_t>(std::max(levels, 2)));
  double pn = 1.0 / (1.0 + nbar);
  for (double& v : p) {
    v = pn;
    pn *= r;
  }
  return OccupationDist(std::move(p), DistKind::thermal);
}

OccupationDist OccupationDist::general(std::vector<double> p) {
  return OccupationDist(std::move(p), DistKind::general);
}

double OccupationDist::mean() const {
  double m = 0.0;
  for (std::size_t n = 0; n < p_.size(); ++n) m += static_cast<double>(n) * p_[n];
  return m;
}

nlohmann::json OccupationDist::to_json() const {
  return {{"p", p_},
          {"nbar", mean()},
          {"kind", kind_ == DistKind::thermal ? "thermal" : "general"}};
}

OccupationDist OccupationDist::from_json(const nlohmann::json& j) {
  auto p = j.at("p").get<std::vector<double>>();
  const auto kind = j.value("kind", std::string("general"));
  return OccupationDist(std::move(p),
                        kind == "thermal" ? DistKind::thermal : DistKind::general);
}

}  // namespace ionsim
