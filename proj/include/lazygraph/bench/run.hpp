#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lazygraph/bench/config.hpp"

namespace lazygraph::bench {

struct IterationRecord {
  std::size_t index = 0;
  std::vector<std::pair<std::string, double>> vary;  // values applied before this iteration
  std::uint64_t kernels_host = 0;
  std::uint64_t kernels_device = 0;
  std::uint64_t h2d_count = 0;
  std::uint64_t d2h_count = 0;
  std::uint64_t h2d_bytes = 0;
  std::uint64_t d2h_bytes = 0;
  std::uint64_t checkpoint_d2h = 0;
  double virtual_transfer_ns = 0.0;
  double virtual_compute_ns = 0.0;  // device kernels only
  double wall_ns = 0.0;
  double host_kernel_wall_ns = 0.0;
  double device_kernel_wall_ns = 0.0;
  std::vector<std::string> nodes;  // execution order
};

struct Totals {
  std::uint64_t kernels_host = 0;
  std::uint64_t kernels_device = 0;
  std::uint64_t h2d_count = 0;
  std::uint64_t d2h_count = 0;
  std::uint64_t h2d_bytes = 0;
  std::uint64_t d2h_bytes = 0;
  std::uint64_t checkpoint_d2h = 0;
  double virtual_transfer_ns = 0.0;
  double virtual_compute_ns = 0.0;
  double wall_ns = 0.0;
  double host_kernel_wall_ns = 0.0;
  double device_kernel_wall_ns = 0.0;
};

struct Checksum {
  std::size_t elements = 0;
  double sum = 0.0;    // index order
  std::string digest;  // FNV-1a 64 of the little-endian byte stream, hex

  bool operator==(const Checksum&) const = default;
};

struct RunEvent {
  std::size_t iteration = 0;
  std::string kind;  // "device_fault"
  std::string node;
  int device = 0;
  bool recovered = false;
  std::string message;
};

struct RunReport {
  RunConfig config;
  std::vector<IterationRecord> iterations;
  Totals totals;
  std::map<std::string, Checksum> checksums;
  std::vector<RunEvent> events;
  std::vector<double> output;  // final values of the requested output; not serialized
};

/// Builds the configured graph and evaluates its output `iterations` times. Before every iteration
/// after the first, each `vary` variable is set to base·(1 + 0.01·u), u ~ U[-1, 1] from a generator
/// seeded with cfg.seed (an exact zero base gets 0.01·u instead).
/// Throws lazygraph::Error(DeviceFault) when a fault hits under the Abort policy.
RunReport run(const RunConfig& cfg);

/// Same config evaluated host-only and device-enabled.
struct Comparison {
  RunReport host;
  RunReport device;
};

Comparison run_comparison(const RunConfig& cfg);

Checksum checksum(const std::vector<double>& values, Precision precision);

enum class ReportFormat { json, text };

std::string emit_report(const RunReport& report, ReportFormat format);
std::string emit_comparison(const Comparison& comparison, ReportFormat format);

/// Table-1 style ratios from a comparison, computed from measured kernel wall time plus modeled
/// transfer time.
struct SpeedupRatios {
  double cpu_ns = 0.0;
  double device_compute_ns = 0.0;
  double device_inclusive_ns = 0.0;
  double inclusive_ratio = 0.0;     // cpu / (device compute + transfer)
  double compute_only_ratio = 0.0;  // cpu / device compute
};

SpeedupRatios speedup_ratios(const Comparison& comparison);

inline constexpr int kReportSchemaVersion = 1;

}  // namespace lazygraph::bench
