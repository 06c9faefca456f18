#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lazygraph/oscillation.hpp"

using namespace lazygraph::osc;

namespace {

OscParams reactor_params() {
  OscParams p;
  p.theta12 = 0.5838;
  p.theta13 = 0.1496;
  p.theta23 = 0.7854;
  p.delta_cp = 0.0;
  p.dm2_21 = 7.53e-5;
  p.dm2_31 = 2.52e-3;
  return p;
}

ArrayX<double> grid(std::initializer_list<double> values) {
  ArrayX<double> e(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) e[i++] = v;
  return e;
}

}  // namespace

TEST_CASE("phase scales with dm2 and baseline over energy") {
  const auto phase = osc_phase<double>(2.5e-3, 1.0, grid({1000.0, 500.0}));
  CHECK(phase[0] == doctest::Approx(0.0031673317).epsilon(1e-12));
  CHECK(phase[1] == doctest::Approx(2 * 0.0031673317).epsilon(1e-12));
}

TEST_CASE("reactor survival probability matches frozen reference values") {
  // independent double-precision evaluation of the mass-basis amplitude
  const auto p = oscprob_full<double>(Flavor::e, Flavor::e, reactor_params(), 52.5, grid({1.0, 2.5, 4.0, 8.0}));
  CHECK(p[0] == doctest::Approx(0.19900417318029556).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.269628591644512).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.22339636878858163).epsilon(1e-12));
  CHECK(p[3] == doctest::Approx(0.6511654867570644).epsilon(1e-12));
}

TEST_CASE("CP phase produces the expected appearance asymmetry") {
  auto p = reactor_params();
  p.delta_cp = 1.2;
  const auto e = grid({600.0});
  CHECK(oscprob_full<double>(Flavor::mu, Flavor::e, p, 295.0, e)[0] ==
        doctest::Approx(0.032750501301709235).epsilon(1e-12));
  CHECK(oscprob_full<double>(Flavor::e, Flavor::mu, p, 295.0, e)[0] ==
        doctest::Approx(0.05615542643654882).epsilon(1e-12));
  // CPT: P(ν̄_μ→ν̄_e) = P(ν_e→ν_μ)
  p.antineutrino = true;
  CHECK(oscprob_full<double>(Flavor::mu, Flavor::e, p, 295.0, e)[0] ==
        doctest::Approx(0.05615542643654882).epsilon(1e-12));
}

TEST_CASE("pmns matrix is unitary") {
  auto p = reactor_params();
  p.delta_cp = 2.1;
  const auto v = pmns_matrix(p);
  CHECK((v * v.adjoint() - Eigen::Matrix3cd::Identity()).norm() < 1e-14);
  p.antineutrino = true;
  CHECK((pmns_matrix(p) - v.conjugate()).norm() == 0.0);
}

TEST_CASE("zero baseline returns the Kronecker delta exactly") {
  const auto e = grid({1.0, 10.0, 3000.0});
  for (auto a : kFlavors)
    for (auto b : kFlavors) {
      const auto p = oscprob_full<double>(a, b, reactor_params(), 0.0, e);
      for (Eigen::Index i = 0; i < e.size(); ++i) CHECK(p[i] == (a == b ? 1.0 : 0.0));
    }
}

TEST_CASE("probabilities out of each flavor sum to one") {
  auto p = reactor_params();
  p.delta_cp = 4.0;
  const auto e = grid({0.5, 3.0, 700.0, 12000.0});
  for (auto a : kFlavors) {
    ArrayX<double> total = ArrayX<double>::Zero(e.size());
    for (auto b : kFlavors) total += oscprob_full<double>(a, b, p, 810.0, e);
    for (Eigen::Index i = 0; i < e.size(); ++i) CHECK(std::abs(total[i] - 1.0) < 1e-12);
  }
}

TEST_CASE("theta13 = 0 reduces e-flavor survival to the two-flavor formula") {
  auto p = reactor_params();
  p.theta13 = 0.0;
  const auto e = grid({1.0, 2.0, 4.0, 6.0});
  const auto full = oscprob_full<double>(Flavor::e, Flavor::e, p, 180.0, e);
  const auto two = two_flavor_prob<double>(p.theta12, p.dm2_21, 180.0, e);
  for (Eigen::Index i = 0; i < e.size(); ++i) CHECK(std::abs(full[i] - two[i]) < 1e-12);
}

TEST_CASE("term-by-term formula agrees with the amplitude oracle on random draws") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 2), phase(0.0, 2 * std::numbers::pi),
      baseline(0.0, 13000.0), energy(100.0, 20000.0), dm21(1e-5, 1e-4), dm31(1e-3, 4e-3);
  for (int draw = 0; draw < 200; ++draw) {
    OscParams p;
    p.theta12 = angle(rng);
    p.theta13 = angle(rng);
    p.theta23 = angle(rng);
    p.delta_cp = phase(rng);
    p.dm2_21 = dm21(rng);
    p.dm2_31 = (rng() % 2 ? 1.0 : -1.0) * dm31(rng);
    p.antineutrino = rng() % 2;
    const double L = baseline(rng);
    const auto e = grid({energy(rng), energy(rng)});
    for (auto a : kFlavors)
      for (auto b : kFlavors) {
        const auto got = oscprob_full<double>(a, b, p, L, e);
        const auto want = oscprob_amplitude_oracle(a, b, p, L, e);
        for (Eigen::Index i = 0; i < e.size(); ++i) REQUIRE(std::abs(got[i] - want[i]) < 1e-12);
      }
  }
}

TEST_CASE("single precision tracks double precision") {
  const auto e64 = grid({1.0, 2.5, 4.0, 8.0});
  const ArrayX<float> e32 = e64.cast<float>();
  const auto p64 = oscprob_full<double>(Flavor::e, Flavor::e, reactor_params(), 52.5, e64);
  const auto p32 = oscprob_full<float>(Flavor::e, Flavor::e, reactor_params(), 52.5, e32);
  for (Eigen::Index i = 0; i < e64.size(); ++i) CHECK(std::abs(p32[i] - p64[i]) < 1e-4);
}

TEST_CASE("parameter and energy validation") {
  auto p = reactor_params();
  p.validate();
  p.theta12 = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = reactor_params();
  p.delta_cp = 2 * std::numbers::pi;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = reactor_params();
  p.dm2_31 = -2.5e-3;  // inverted ordering
  p.validate();

  const std::vector<double> ok{1.0, 2.0}, zero{1.0, 0.0}, empty;
  validate_energies(ok);
  CHECK_THROWS_AS(validate_energies(zero), std::invalid_argument);
  CHECK_THROWS_AS(validate_energies(empty), std::invalid_argument);
}

TEST_CASE("zero mixing gives the identity and theta13 = 0 decouples the third state from e") {
  CHECK((pmns_matrix(OscParams{}) - Eigen::Matrix3cd::Identity()).norm() == 0.0);
  auto p = reactor_params();
  p.theta13 = 0.0;
  p.delta_cp = 0.7;
  CHECK(std::abs(pmns_matrix(p)(0, 2)) == 0.0);
}

TEST_CASE("conjugation, CPT and bounds over random parameters") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 2), phase(0.0, 2 * std::numbers::pi),
      baseline(0.0, 3000.0);
  const auto e = grid({150.0, 600.0, 2500.0, 9000.0});
  for (int draw = 0; draw < 100; ++draw) {
    OscParams p = reactor_params();
    p.theta12 = angle(rng);
    p.theta13 = angle(rng);
    p.theta23 = angle(rng);
    p.delta_cp = phase(rng);
    const double L = baseline(rng);
    OscParams flipped = p;
    flipped.delta_cp = p.delta_cp == 0.0 ? 0.0 : 2 * std::numbers::pi - p.delta_cp;
    OscParams anti = p;
    anti.antineutrino = true;
    ArrayX<double> column = ArrayX<double>::Zero(e.size());
    for (auto a : kFlavors)
      for (auto b : kFlavors) {
        const auto nu = oscprob_full<double>(a, b, p, L, e);
        const auto nubar = oscprob_amplitude_oracle(a, b, anti, L, e);
        const auto nu_flipped = oscprob_amplitude_oracle(a, b, flipped, L, e);
        const auto reversed = oscprob_full<double>(b, a, flipped, L, e);
        for (Eigen::Index i = 0; i < e.size(); ++i) {
          REQUIRE(std::abs(nubar[i] - nu_flipped[i]) < 1e-12);
          REQUIRE(std::abs(nu[i] - reversed[i]) < 1e-12);
          REQUIRE(nu[i] >= -1e-12);
          REQUIRE(nu[i] <= 1.0 + 1e-12);
        }
        if (b == Flavor::mu) column += nu;
      }
    for (Eigen::Index i = 0; i < e.size(); ++i) REQUIRE(std::abs(column[i] - 1.0) < 1e-12);
  }
}

TEST_CASE("two-flavor formula limits") {
  // Δ = π/2 at E = 1000 MeV when dm2·L = π/(2·1.26693268)
  const double dm2 = 1e-3, L = std::numbers::pi / (2 * kPhaseConstant * dm2);
  const auto e = grid({1000.0});
  CHECK(two_flavor_prob<double>(0.0, dm2, L, e)[0] == 1.0);
  CHECK(two_flavor_prob<double>(0.3, dm2, L, e)[0] == doctest::Approx(1 - std::pow(std::sin(0.6), 2)));
  CHECK(std::abs(two_flavor_prob<double>(std::numbers::pi / 4, dm2, L, e)[0]) < 1e-15);
}
