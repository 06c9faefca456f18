#include "doctest.h"
#include "lazygraph/executor.hpp"
#include "lazygraph/transformations.hpp"

using namespace lazygraph;

namespace {

TransformationSpec<double> no_output_spec() {
  TransformationSpec<double> spec;
  spec.name = "empty";
  spec.kernels[DeviceKind::Host] = [](const KernelArgs<double>&) {};
  return spec;
}

TransformationSpec<double> rank_two_source() {
  TransformationSpec<double> spec;
  spec.name = "matrix";
  spec.outputs = {{"m", Shape{2, 3}}};
  spec.kernels[DeviceKind::Host] = [](const KernelArgs<double>&) {};
  return spec;
}

TransformationSpec<double> rank_one_consumer() {
  TransformationSpec<double> spec;
  spec.name = "vector_only";
  spec.inputs = {{"v", 1}};
  spec.outputs = {{"out", SameAsInput{0}}};
  spec.kernels[DeviceKind::Host] = [](const KernelArgs<double>&) {};
  return spec;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected lazygraph::Error");
  return ErrorCode::InvalidSpec;
}

}  // namespace

TEST_CASE("add_node hands out fresh handles and validates specs") {
  Graph<double> g;
  const auto a = g.add_node(ops::identity<double>("a"));
  const auto b = g.add_node(ops::identity<double>("b"));
  CHECK(a.value == 0);
  CHECK(a != b);
  CHECK(g.tainted(a));

  CHECK(code_of([&] { g.add_node(no_output_spec()); }) == ErrorCode::InvalidSpec);

  auto hostless = ops::identity<double>("hostless");
  hostless.kernels.erase(DeviceKind::Host);
  CHECK(code_of([&] { g.add_node(hostless); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("bind allows fan-out and rejects double binding and self loops") {
  Graph<double> g;
  const auto a = g.add_node(ops::source<double>("a", {1, 2}));
  const auto b = g.add_node(ops::identity<double>("b"));
  const auto c = g.add_node(ops::identity<double>("c"));

  g.bind(output_port(a), input_port(b));
  g.bind(output_port(a), input_port(c));
  CHECK(code_of([&] { g.bind(output_port(a), input_port(b)); }) == ErrorCode::AlreadyBound);
  CHECK(code_of([&] { g.bind(output_port(b), input_port(b)); }) == ErrorCode::SelfLoop);
  CHECK(code_of([&] { g.bind(output_port(a, 3), input_port(c)); }) == ErrorCode::UnknownPort);
  CHECK(code_of([&] { g.bind(output_port(NodeId{42}), input_port(c)); }) == ErrorCode::UnknownNode);
}

TEST_CASE("variables register dependents and reject duplicates") {
  Graph<double> g;
  const auto a = g.add_node(ops::scale<double>("a"));
  const auto b = g.add_node(ops::scale<double>("b"));
  const auto dm = g.make_variable("dm2_21", 7.53e-5);
  CHECK(g.variable_value(dm) == 7.53e-5);
  g.attach_variable(a, dm);
  g.attach_variable(b, dm);
  CHECK(g.variable(dm).dependents == std::set<NodeId>{a, b});

  CHECK(code_of([&] { g.make_variable("dm2_21", 1.0); }) == ErrorCode::DuplicateName);
  CHECK(code_of([&] { g.attach_variable(NodeId{9}, dm); }) == ErrorCode::UnknownNode);
  CHECK(code_of([&] { g.set_variable(VariableRef{7}, 1.0); }) == ErrorCode::UnknownVariable);
  CHECK(code_of([&] { g.attach_variable(a, dm, "nope"); }) == ErrorCode::UnknownVariable);
}

TEST_CASE("set_variable taints dependents and descendants only") {
  Graph<double> g;
  const auto a = g.add_node(ops::source<double>("a", {1, 2, 3}));
  const auto b = g.add_node(ops::scale<double>("b"));
  const auto c = g.add_node(ops::identity<double>("c"));
  g.bind(output_port(a), input_port(b));
  g.bind(output_port(b), input_port(c));
  const auto k = g.make_variable("k", 2.0);
  g.attach_variable(b, k);
  const auto loose = g.make_variable("loose", 0.0);

  auto exe = finalize(std::move(g));
  exe.evaluate(output_port(c));
  CHECK_FALSE(exe.tainted(a));
  CHECK_FALSE(exe.tainted(b));
  CHECK_FALSE(exe.tainted(c));

  exe.set_variable(k, 3.0);
  CHECK_FALSE(exe.tainted(a));
  CHECK(exe.tainted(b));
  CHECK(exe.tainted(c));

  exe.evaluate(output_port(c));
  exe.set_variable(k, 3.0);  // unchanged value still taints
  CHECK(exe.tainted(b));
  CHECK(exe.tainted(c));

  exe.evaluate(output_port(c));
  exe.set_variable(loose, 1.0);
  CHECK_FALSE(exe.tainted(a));
  CHECK_FALSE(exe.tainted(b));
  CHECK_FALSE(exe.tainted(c));
}

TEST_CASE("taint reaches every descendant of a diamond and is idempotent") {
  Graph<double> g;
  const auto a = g.add_node(ops::source<double>("a", {1, 2}));
  const auto b = g.add_node(ops::identity<double>("b"));
  const auto c = g.add_node(ops::identity<double>("c"));
  const auto d = g.add_node(ops::add<double>("d"));
  g.bind(output_port(a), input_port(b));
  g.bind(output_port(a), input_port(c));
  g.bind(output_port(b), input_port(d, 0));
  g.bind(output_port(c), input_port(d, 1));
  auto exe = finalize(std::move(g));
  exe.evaluate(output_port(d));

  exe.taint(d);
  CHECK(exe.tainted(d));
  CHECK_FALSE(exe.tainted(a));
  exe.evaluate(output_port(d));

  exe.taint(a);
  exe.taint(a);
  for (auto n : {a, b, c, d}) CHECK(exe.tainted(n));
  CHECK(code_of([&] { exe.taint(NodeId{10}); }) == ErrorCode::UnknownNode);
}

TEST_CASE("finalize propagates shapes and freezes structure") {
  Graph<double> g;
  const auto a = g.add_node(ops::source<double>("a", {1, 2, 3, 4}));
  const auto b = g.add_node(ops::identity<double>("b"));
  g.bind(output_port(a), input_port(b));
  auto exe = finalize(std::move(g));
  CHECK(exe.shape(output_port(b)) == Shape{4});
  CHECK(code_of([&] { exe.graph().add_node(ops::identity<double>("late")); }) == ErrorCode::GraphFinalized);
  CHECK(code_of([&] { exe.graph().bind(output_port(a), input_port(b)); }) == ErrorCode::GraphFinalized);
}

TEST_CASE("finalize reports cycles, unbound inputs and rank mismatches") {
  SUBCASE("cycle") {
    Graph<double> g;
    const auto a = g.add_node(ops::identity<double>("a"));
    const auto b = g.add_node(ops::identity<double>("b"));
    g.bind(output_port(a), input_port(b));
    g.bind(output_port(b), input_port(a));
    try {
      finalize(std::move(g));
      FAIL("expected CycleDetected");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::CycleDetected);
      const std::string msg = e.what();
      CHECK(msg.find("a") != std::string::npos);
      CHECK(msg.find("b") != std::string::npos);
    }
  }
  SUBCASE("unbound input") {
    Graph<double> g;
    g.add_node(ops::identity<double>("lonely"));
    try {
      finalize(std::move(g));
      FAIL("expected UnboundInput");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnboundInput);
      CHECK(std::string(e.what()).find("lonely.in:x") != std::string::npos);
    }
  }
  SUBCASE("unbound variable slot") {
    Graph<double> g;
    const auto a = g.add_node(ops::source<double>("a", {1}));
    const auto s = g.add_node(ops::scale<double>("s"));
    g.bind(output_port(a), input_port(s));
    CHECK(code_of([&] { finalize(std::move(g)); }) == ErrorCode::UnboundInput);
  }
  SUBCASE("rank mismatch") {
    Graph<double> g;
    const auto m = g.add_node(rank_two_source());
    const auto v = g.add_node(rank_one_consumer());
    g.bind(output_port(m), input_port(v));
    CHECK(code_of([&] { finalize(std::move(g)); }) == ErrorCode::ShapeMismatch);
  }
  SUBCASE("elementwise operands disagree") {
    Graph<double> g;
    const auto x = g.add_node(ops::source<double>("x", {1, 2}));
    const auto y = g.add_node(ops::source<double>("y", {1, 2, 3}));
    const auto s = g.add_node(ops::add<double>("s"));
    g.bind(output_port(x), input_port(s, 0));
    g.bind(output_port(y), input_port(s, 1));
    CHECK(code_of([&] { finalize(std::move(g)); }) == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("handles stay valid as the graph grows") {
  Graph<double> g;
  const auto first = g.add_node(ops::source<double>("first", {1}));
  const auto var = g.make_variable("v", 1.0);
  for (int i = 0; i < 50; ++i) {
    g.add_node(ops::identity<double>("n" + std::to_string(i)));
    g.make_variable("v" + std::to_string(i), i);
  }
  CHECK(g.node(first).spec.name == "first");
  CHECK(g.variable(var).name == "v");
  CHECK(g.variable_value(var) == 1.0);
}

TEST_CASE("set_target_device requires a device kernel") {
  Graph<double> g;
  const auto src = g.add_node(ops::source<double>("energy", {1, 2}));
  const auto id = g.add_node(ops::identity<double>("id"));
  g.set_target_device(id, DeviceSpec::sim(0));
  CHECK(code_of([&] { g.set_target_device(src, DeviceSpec::sim(0)); }) == ErrorCode::NoDeviceKernel);
}
