#include "lazygraph/oscillation.hpp"

namespace lazygraph::osc {

namespace {

// Mixing matrix written out element by element rather than as a product of rotations.
std::array<std::array<std::complex<double>, 3>, 3> explicit_mixing(const OscParams& p) {
  const double c12 = std::cos(p.theta12), s12 = std::sin(p.theta12);
  const double c13 = std::cos(p.theta13), s13 = std::sin(p.theta13);
  const double c23 = std::cos(p.theta23), s23 = std::sin(p.theta23);
  const double delta = p.antineutrino ? -p.delta_cp : p.delta_cp;
  const std::complex<double> eid(std::cos(delta), std::sin(delta));

  std::array<std::array<std::complex<double>, 3>, 3> u{};
  u[0] = {c12 * c13, s12 * c13, s13 / eid};
  u[1] = {-s12 * c23 - c12 * s23 * s13 * eid, c12 * c23 - s12 * s23 * s13 * eid, s23 * c13};
  u[2] = {s12 * s23 - c12 * c23 * s13 * eid, -c12 * s23 - s12 * c23 * s13 * eid, c23 * c13};
  return u;
}

}  // namespace

ArrayX<double> oscprob_amplitude_oracle(Flavor alpha, Flavor beta, const OscParams& params, double baseline_km,
                                        const ArrayX<double>& energies_mev) {
  const auto u = explicit_mixing(params);
  const auto a = static_cast<std::size_t>(alpha), b = static_cast<std::size_t>(beta);
  const double m2[3] = {0.0, params.dm2_21, params.dm2_31};

  ArrayX<double> out(energies_mev.size());
  for (Eigen::Index n = 0; n < energies_mev.size(); ++n) {
    const double e_gev = energies_mev[n] * 1e-3;
    std::complex<double> amp{0.0, 0.0};
    for (std::size_t i = 0; i < 3; ++i) {
      const double phi = 2.0 * 1.26693268 * m2[i] * baseline_km / e_gev;
      amp += std::conj(u[a][i]) * u[b][i] * std::complex<double>(std::cos(phi), -std::sin(phi));
    }
    out[n] = std::norm(amp);
  }
  return out;
}

}  // namespace lazygraph::osc
