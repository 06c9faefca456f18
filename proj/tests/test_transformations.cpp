#include <vector>

#include "doctest.h"
#include "lazygraph/executor.hpp"
#include "lazygraph/transformations.hpp"

using namespace lazygraph;

namespace {

// Runs one spec on host and on a device over the same inputs and returns both outputs.
template <typename Scalar>
std::pair<std::vector<Scalar>, std::vector<Scalar>> run_both(const TransformationSpec<Scalar>& spec,
                                                             const std::vector<std::vector<Scalar>>& inputs,
                                                             const std::vector<double>& vars,
                                                             std::optional<std::size_t> chunk = 5) {
  ArenaConfig cfg;
  cfg.chunk_size = chunk;
  SimArena<Scalar> arena(cfg);
  std::vector<DataBuffer<Scalar>> ins;
  for (const auto& v : inputs) {
    ins.push_back(arena.allocate({v.size()}, {DeviceSpec::host(), DeviceSpec::sim(0)}));
    auto w = arena.write_host(ins.back());
    std::copy(v.begin(), v.end(), w.begin());
    arena.sync_to_device(ins.back());
  }
  const std::size_t n = inputs.empty() ? 1 : inputs.front().size();
  auto host_out = arena.allocate({n}, {DeviceSpec::host()});
  auto dev_out = arena.allocate({n}, {DeviceSpec::sim(0)});
  std::vector<DataBuffer<Scalar>*> in_ptrs;
  for (auto& b : ins) in_ptrs.push_back(&b);
  std::vector<DataBuffer<Scalar>*> h{&host_out}, d{&dev_out};
  arena.dispatch(DeviceSpec::host(), spec.kernels.at(DeviceKind::Host), in_ptrs, h, vars);
  arena.dispatch(DeviceSpec::sim(0), spec.kernels.at(DeviceKind::SimDevice), in_ptrs, d, vars);
  const auto hv = arena.read_host(host_out);
  const auto dv = arena.read_host(dev_out);
  return {{hv.begin(), hv.end()}, {dv.begin(), dv.end()}};
}

}  // namespace

TEST_CASE("elementwise kernels agree bitwise between host and device") {
  const std::vector<double> a{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, b{0.5, -1, 2, 0.25, 3, 1e-3, 7, 9, 1, 0, -4};
  SUBCASE("identity") {
    auto [h, d] = run_both(ops::identity<double>("id"), {a}, {});
    CHECK(h == a);
    CHECK(d == a);
  }
  SUBCASE("scale") {
    auto [h, d] = run_both(ops::scale<double>("s"), {a}, {1.5});
    CHECK(h == d);
    CHECK(h[3] == 6.0);
  }
  SUBCASE("add and product") {
    auto [h, d] = run_both(ops::add<double>("add"), {a, b}, {});
    CHECK(h == d);
    CHECK(h[1] == 1.0);
    auto [hp, dp] = run_both(ops::product<double>("mul"), {a, b}, {});
    CHECK(hp == dp);
    CHECK(hp[0] == 0.5);
  }
  SUBCASE("weighted sum") {
    auto [h, d] = run_both(ops::weighted_sum<double>("ws", 2), {a, b}, {0.3, 0.7});
    CHECK(h == d);
    CHECK(h[0] == doctest::Approx(0.3 + 0.35));
  }
}

TEST_CASE("phase and probability kernels agree bitwise between host and device") {
  std::vector<double> energy;
  for (int i = 1; i <= 37; ++i) energy.push_back(0.75 * i);
  for (auto pair : osc::kMassPairs) {
    const std::vector<double> vars = pair == osc::MassPair::p32 ? std::vector<double>{2.52e-3, 7.53e-5, 52.5}
                                                                : std::vector<double>{2.52e-3, 52.5};
    auto [h, d] = run_both(ops::osc_phase<double>("phase", pair), {energy}, vars, 4);
    CHECK(h == d);
  }
  auto [h32, d32] = run_both(ops::osc_phase<double>("phase", osc::MassPair::p32), {energy}, {2.52e-3, 7.53e-5, 1.0});
  CHECK(h32[0] == doctest::Approx(osc::kPhaseConstant * (2.52e-3 - 7.53e-5) / (0.75e-3)));

  std::vector<double> p21(37), p31(37), p32(37), weights{0.1, -0.2, 0.05, 0.01, -0.03, 0.02};
  for (int i = 0; i < 37; ++i) {
    p21[i] = 0.01 * i;
    p31[i] = 0.3 * i;
    p32[i] = 0.29 * i;
  }
  auto [h, d] = run_both(ops::oscprob<double>("p", true), {p21, p31, p32, weights}, {}, 3);
  CHECK(h == d);
  CHECK(h[0] == 1.0);
}

TEST_CASE("osc_weights node reproduces the library weights") {
  auto spec = ops::osc_weights<double>("w", osc::Flavor::mu, osc::Flavor::e, false);
  SimArena<double> arena;
  auto out = arena.allocate({6}, {DeviceSpec::host()});
  std::vector<DataBuffer<double>*> outs{&out};
  const std::vector<double> vars{0.5838, 0.1496, 0.7854, 1.2};
  arena.dispatch(DeviceSpec::host(), spec.kernels.at(DeviceKind::Host), {}, outs, vars);
  osc::OscParams p;
  p.theta12 = vars[0];
  p.theta13 = vars[1];
  p.theta23 = vars[2];
  p.delta_cp = vars[3];
  const auto w = osc::osc_weights(osc::Flavor::mu, osc::Flavor::e, osc::pmns_matrix(p));
  const auto v = arena.read_host(out);
  for (int k = 0; k < 3; ++k) {
    CHECK(v[k] == w.re[k]);
    CHECK(v[k + 3] == w.im[k]);
  }
  CHECK_FALSE(spec.has_kernel(DeviceKind::SimDevice));
}

TEST_CASE("specs reject degenerate construction") {
  CHECK_THROWS_AS(ops::source<double>("s", {}), Error);
  CHECK_THROWS_AS(ops::weighted_sum<double>("w", 0), Error);
}
