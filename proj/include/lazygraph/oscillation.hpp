#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace lazygraph::osc {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// 1.26693268 converts Δm²[eV²]·L[km]/E[GeV] into the phase Δm²L/4E.
inline constexpr double kPhaseConstant = 1.26693268;

enum class Flavor { e = 0, mu = 1, tau = 2 };

inline constexpr std::array<Flavor, 3> kFlavors{Flavor::e, Flavor::mu, Flavor::tau};

/// Three-flavor vacuum mixing parameters. Angles and phase in radians, splittings in eV².
struct OscParams {
  double theta12 = 0.0;
  double theta13 = 0.0;
  double theta23 = 0.0;
  double delta_cp = 0.0;
  double dm2_21 = 0.0;  // m2² - m1²
  double dm2_31 = 0.0;  // m3² - m1²; the sign selects the mass ordering
  bool antineutrino = false;

  double dm2_32() const noexcept { return dm2_31 - dm2_21; }

  /// Throws std::invalid_argument unless angles lie in [0, π/2] and delta_cp in [0, 2π).
  void validate() const;
};

/// Mass-splitting pairs (i, j) with i > j, in summation order.
enum class MassPair { p21 = 0, p31 = 1, p32 = 2 };

inline constexpr std::array<MassPair, 3> kMassPairs{MassPair::p21, MassPair::p31, MassPair::p32};

double mass_splitting(const OscParams& params, MassPair pair);

/// PMNS matrix in the R23(θ23)·U13(θ13, δ)·R12(θ12) factorization; conjugated for antineutrinos.
Eigen::Matrix3cd pmns_matrix(const OscParams& params);

/// Quartic products V*_{αi} V_{βi} V_{αj} V*_{βj} for the pairs (2,1), (3,1), (3,2).
struct OscWeights {
  std::array<double, 3> re{};
  std::array<double, 3> im{};
};

OscWeights osc_weights(Flavor alpha, Flavor beta, const Eigen::Matrix3cd& pmns);

/// Phase Δ for one energy in MeV.
template <typename Scalar>
inline Scalar phase_at(double dm2, double baseline_km, Scalar energy_mev) {
  const auto numerator = static_cast<Scalar>(kPhaseConstant * dm2 * baseline_km);
  return numerator / (energy_mev / Scalar(1000));
}

/// Probability for one energy from precomputed phases, summed left to right over the pairs:
/// δ_{αβ} − 4 Σ Re(W)·sin²Δ + 2 Σ Im(W)·sin 2Δ.
template <typename Scalar>
inline Scalar probability_at(bool same_flavor, const std::array<Scalar, 3>& re, const std::array<Scalar, 3>& im,
                             Scalar d21, Scalar d31, Scalar d32) {
  using std::sin;
  const Scalar s21 = sin(d21), s31 = sin(d31), s32 = sin(d32);
  const Scalar real_part = re[0] * s21 * s21 + re[1] * s31 * s31 + re[2] * s32 * s32;
  const Scalar imag_part = im[0] * sin(Scalar(2) * d21) + im[1] * sin(Scalar(2) * d31) + im[2] * sin(Scalar(2) * d32);
  return (same_flavor ? Scalar(1) : Scalar(0)) - Scalar(4) * real_part + Scalar(2) * imag_part;
}

/// Throws std::invalid_argument on an empty or non-positive energy vector.
void validate_energies(std::span<const double> energies_mev);

template <typename Scalar>
ArrayX<Scalar> osc_phase(double dm2, double baseline_km, const ArrayX<Scalar>& energies_mev) {
  return energies_mev.unaryExpr([=](Scalar e) { return phase_at<Scalar>(dm2, baseline_km, e); });
}

/// Oscillation probability P(α→β) at every energy, term by term over the three mass pairs.
template <typename Scalar>
ArrayX<Scalar> oscprob_full(Flavor alpha, Flavor beta, const OscParams& params, double baseline_km,
                            const ArrayX<Scalar>& energies_mev) {
  const auto w = osc_weights(alpha, beta, pmns_matrix(params));
  std::array<Scalar, 3> re{}, im{};
  for (std::size_t k = 0; k < 3; ++k) {
    re[k] = static_cast<Scalar>(w.re[k]);
    im[k] = static_cast<Scalar>(w.im[k]);
  }
  const bool same = alpha == beta;
  const double dm21 = params.dm2_21, dm31 = params.dm2_31, dm32 = params.dm2_32();
  return energies_mev.unaryExpr([&](Scalar e) {
    return probability_at<Scalar>(same, re, im, phase_at<Scalar>(dm21, baseline_km, e),
                                  phase_at<Scalar>(dm31, baseline_km, e), phase_at<Scalar>(dm32, baseline_km, e));
  });
}

/// Two-flavor survival probability 1 − sin²(2θ)·sin²Δ.
template <typename Scalar>
ArrayX<Scalar> two_flavor_prob(double theta, double dm2, double baseline_km, const ArrayX<Scalar>& energies_mev) {
  const Scalar amp = static_cast<Scalar>(std::pow(std::sin(2.0 * theta), 2));
  return energies_mev.unaryExpr([=](Scalar e) {
    const Scalar s = std::sin(phase_at<Scalar>(dm2, baseline_km, e));
    return Scalar(1) - amp * s * s;
  });
}

/// Independent reference: |Σ_i V*_{αi} V_{βi} exp(−2iΔ_{i1})|², evaluated in double precision
/// from the mass-basis amplitude. Shares no code with oscprob_full.
ArrayX<double> oscprob_amplitude_oracle(Flavor alpha, Flavor beta, const OscParams& params, double baseline_km,
                                        const ArrayX<double>& energies_mev);

}  // namespace lazygraph::osc
