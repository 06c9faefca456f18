#include "lazygraph/oscillation.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

namespace lazygraph::osc {

void OscParams::validate() const {
  constexpr double half_pi = std::numbers::pi / 2;
  const auto check_angle = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= half_pi)) throw std::invalid_argument(std::string(name) + " must lie in [0, pi/2]");
  };
  check_angle(theta12, "theta12");
  check_angle(theta13, "theta13");
  check_angle(theta23, "theta23");
  if (!(delta_cp >= 0.0 && delta_cp < 2 * std::numbers::pi))
    throw std::invalid_argument("delta_cp must lie in [0, 2pi)");
}

double mass_splitting(const OscParams& params, MassPair pair) {
  switch (pair) {
    case MassPair::p21: return params.dm2_21;
    case MassPair::p31: return params.dm2_31;
    case MassPair::p32: return params.dm2_32();
  }
  return 0.0;
}

Eigen::Matrix3cd pmns_matrix(const OscParams& params) {
  using C = std::complex<double>;
  const double c12 = std::cos(params.theta12), s12 = std::sin(params.theta12);
  const double c13 = std::cos(params.theta13), s13 = std::sin(params.theta13);
  const double c23 = std::cos(params.theta23), s23 = std::sin(params.theta23);
  const C phase = std::polar(1.0, params.delta_cp);

  Eigen::Matrix3cd r23, u13, r12;
  r23 << 1, 0, 0,
         0, c23, s23,
         0, -s23, c23;
  u13 << c13, 0, s13 * std::conj(phase),
         0, 1, 0,
         -s13 * phase, 0, c13;
  r12 << c12, s12, 0,
         -s12, c12, 0,
         0, 0, 1;

  Eigen::Matrix3cd v = r23 * u13 * r12;
  if (params.antineutrino) v = v.conjugate().eval();
  return v;
}

OscWeights osc_weights(Flavor alpha, Flavor beta, const Eigen::Matrix3cd& v) {
  static constexpr std::array<std::pair<int, int>, 3> kPairs{{{1, 0}, {2, 0}, {2, 1}}};
  const int a = static_cast<int>(alpha), b = static_cast<int>(beta);
  OscWeights w;
  for (std::size_t k = 0; k < kPairs.size(); ++k) {
    const auto [i, j] = kPairs[k];
    const std::complex<double> q = std::conj(v(a, i)) * v(b, i) * v(a, j) * std::conj(v(b, j));
    w.re[k] = q.real();
    w.im[k] = q.imag();
  }
  return w;
}

void validate_energies(std::span<const double> energies_mev) {
  if (energies_mev.empty()) throw std::invalid_argument("energy vector is empty");
  for (double e : energies_mev)
    if (!(e > 0.0)) throw std::invalid_argument("energies must be strictly positive, got " + std::to_string(e));
}

}  // namespace lazygraph::osc
