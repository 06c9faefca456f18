#include "lazygraph/bench/run.hpp"

#include <chrono>
#include <cstring>
#include <random>

#include "lazygraph/bench/builtin.hpp"

namespace lazygraph::bench {

namespace {

template <typename Scalar>
RunReport run_typed(const RunConfig& cfg) {
  auto built = build_graph<Scalar>(cfg);
  auto& exe = built.exe;
  auto& graph = exe.graph();

  RunReport report;
  report.config = cfg;

  std::vector<std::pair<VariableRef, double>> vary;
  for (const auto& name : cfg.vary) {
    const auto ref = *graph.find_variable(name);
    vary.emplace_back(ref, graph.variable_value(ref));
  }
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::span<const Scalar> last;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    IterationRecord rec;
    rec.index = it;
    if (it > 0) {
      for (const auto& [ref, base] : vary) {
        const double u = unit(rng);
        const double value = base == 0.0 ? 0.01 * u : base * (1.0 + 0.01 * u);
        exe.set_variable(ref, value);
        rec.vary.emplace_back(graph.variable(ref).name, value);
      }
    }

    const auto t0 = std::chrono::steady_clock::now();
    auto result = exe.evaluate(built.output);
    rec.wall_ns = std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0).count();
    last = result.values;

    const auto& s = result.stats;
    rec.kernels_host = s.kernels_host;
    rec.kernels_device = s.kernels_device;
    rec.h2d_count = s.transfers.h2d_count;
    rec.d2h_count = s.transfers.d2h_count;
    rec.h2d_bytes = s.transfers.h2d_bytes;
    rec.d2h_bytes = s.transfers.d2h_bytes;
    rec.checkpoint_d2h = s.transfers.count(TransferDirection::D2H, TransferCause::Checkpoint);
    rec.virtual_transfer_ns = s.virtual_transfer_ns;
    rec.virtual_compute_ns = s.virtual_compute_ns;
    rec.host_kernel_wall_ns = s.host_kernel_wall_ns;
    rec.device_kernel_wall_ns = s.device_kernel_wall_ns;
    for (auto id : s.nodes_evaluated) rec.nodes.push_back(graph.node(id).spec.name);
    for (const auto& f : s.faults)
      report.events.push_back(RunEvent{it, "device_fault", graph.node(f.node).spec.name, f.device, f.recovered, f.message});

    auto& t = report.totals;
    t.kernels_host += rec.kernels_host;
    t.kernels_device += rec.kernels_device;
    t.h2d_count += rec.h2d_count;
    t.d2h_count += rec.d2h_count;
    t.h2d_bytes += rec.h2d_bytes;
    t.d2h_bytes += rec.d2h_bytes;
    t.checkpoint_d2h += rec.checkpoint_d2h;
    t.virtual_transfer_ns += rec.virtual_transfer_ns;
    t.virtual_compute_ns += rec.virtual_compute_ns;
    t.wall_ns += rec.wall_ns;
    t.host_kernel_wall_ns += rec.host_kernel_wall_ns;
    t.device_kernel_wall_ns += rec.device_kernel_wall_ns;
    report.iterations.push_back(std::move(rec));
  }

  report.output.assign(last.begin(), last.end());
  report.checksums[graph.port_name(built.output)] = checksum(report.output, precision_of_v<Scalar>);
  return report;
}

}  // namespace

RunReport run(const RunConfig& cfg) {
  return cfg.precision == Precision::f32 ? run_typed<float>(cfg) : run_typed<double>(cfg);
}

Comparison run_comparison(const RunConfig& cfg) {
  RunConfig host = cfg;
  host.device_enabled = false;
  RunConfig device = cfg;
  device.device_enabled = true;
  return Comparison{run(host), run(device)};
}

Checksum checksum(const std::vector<double>& values, Precision precision) {
  Checksum c;
  c.elements = values.size();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const unsigned char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (double v : values) {
    c.sum += v;
    unsigned char bytes[8];
    if (precision == Precision::f32) {
      const auto f = static_cast<float>(v);
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      for (int k = 0; k < 4; ++k) bytes[k] = static_cast<unsigned char>(u >> (8 * k));
      mix(bytes, 4);
    } else {
      std::uint64_t u;
      std::memcpy(&u, &v, 8);
      for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(u >> (8 * k));
      mix(bytes, 8);
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  c.digest = hex;
  return c;
}

SpeedupRatios speedup_ratios(const Comparison& c) {
  SpeedupRatios r;
  r.cpu_ns = c.host.totals.host_kernel_wall_ns;
  r.device_compute_ns = c.device.totals.host_kernel_wall_ns + c.device.totals.device_kernel_wall_ns;
  r.device_inclusive_ns = r.device_compute_ns + c.device.totals.virtual_transfer_ns;
  r.inclusive_ratio = r.device_inclusive_ns > 0 ? r.cpu_ns / r.device_inclusive_ns : 0.0;
  r.compute_only_ratio = r.device_compute_ns > 0 ? r.cpu_ns / r.device_compute_ns : 0.0;
  return r;
}

}  // namespace lazygraph::bench
