#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "lazygraph/bench/run.hpp"

namespace lazygraph::bench {

namespace {

using Json = nlohmann::ordered_json;

std::string placement_name(const std::optional<std::size_t>& chunk) {
  return chunk ? std::to_string(*chunk) : "unlimited";
}

Json config_json(const RunConfig& c) {
  Json j;
  j["graph"] = c.graph;
  j["precision"] = std::string(to_string(c.precision));
  j["device_enabled"] = c.device_enabled;
  j["iterations"] = c.iterations;
  j["vary"] = c.vary;
  j["seed"] = c.seed;
  j["recovery"] = c.recovery == RecoveryPolicy::Abort ? "abort" : "fallback";
  j["checkpoint_every"] = c.checkpoint_every ? Json(*c.checkpoint_every) : Json(nullptr);
  j["wall_clock"] = c.wall_clock;

  Json dev;
  dev["count"] = c.arena.devices;
  dev["capacity_bytes"] = c.arena.capacity_bytes ? Json(*c.arena.capacity_bytes) : Json(nullptr);
  dev["chunk_size"] = placement_name(c.arena.chunk_size);
  dev["latency_ns"] = c.arena.cost.latency_ns;
  dev["bytes_per_ns"] = c.arena.cost.bytes_per_ns;
  dev["launch_ns"] = c.arena.cost.launch_ns;
  dev["elements_per_ns"] = c.arena.cost.elements_per_ns;
  std::visit(
      [&dev](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FailAtKernel>) {
          dev["failure"] = {{"policy", "fail_at"}, {"kernel", p.n}};
        } else if constexpr (std::is_same_v<P, FailWithProbability>) {
          dev["failure"] = {{"policy", "probability"}, {"p", p.p}, {"seed", p.seed}};
        } else {
          dev["failure"] = {{"policy", "none"}};
        }
      },
      c.arena.failure);
  j["device"] = dev;

  Json placement = Json::object();
  for (const auto& [k, v] : c.placement) placement[k] = v;
  j["placement"] = placement;

  if (c.graph == "oscprob") {
    Json o;
    o["alpha"] = to_string(c.alpha);
    o["beta"] = to_string(c.beta);
    o["antineutrino"] = c.osc.antineutrino;
    o["theta12"] = c.osc.theta12;
    o["theta13"] = c.osc.theta13;
    o["theta23"] = c.osc.theta23;
    o["delta_cp"] = c.osc.delta_cp;
    o["dm2_21"] = c.osc.dm2_21;
    o["dm2_31"] = c.osc.dm2_31;
    o["baselines"] = c.baselines;
    o["weights"] = c.merge_weights;
    Json e;
    e["count"] = c.energies.values.size();
    if (c.energies.linspace) {
      const auto& [lo, hi, n] = *c.energies.linspace;
      e["linspace"] = {lo, hi, n};
    } else {
      e["values"] = c.energies.values;
    }
    o["energies"] = e;
    j["oscprob"] = o;
  } else if (c.graph == "chain") {
    j["chain"] = {{"length", c.chain_length}, {"size", c.chain_size}};
  } else {
    Json vars = Json::object();
    for (const auto& [k, v] : c.variables) vars[k] = v;
    j["variables"] = vars;
    Json nodes = Json::array();
    for (const auto& n : c.nodes) {
      Json node;
      node["name"] = n.name;
      node["kind"] = n.kind;
      node["inputs"] = n.inputs;
      node["variables"] = n.variables;
      if (!n.placement.empty()) node["device"] = n.placement;
      nodes.push_back(node);
    }
    j["nodes"] = nodes;
    j["output"] = c.output;
  }
  return j;
}

template <typename Record>
void counters_json(Json& j, const Record& r, bool wall) {
  j["kernels_host"] = r.kernels_host;
  j["kernels_device"] = r.kernels_device;
  j["h2d_count"] = r.h2d_count;
  j["d2h_count"] = r.d2h_count;
  j["h2d_bytes"] = r.h2d_bytes;
  j["d2h_bytes"] = r.d2h_bytes;
  j["checkpoint_d2h"] = r.checkpoint_d2h;
  j["virtual_device_compute_ns"] = r.virtual_compute_ns;
  j["virtual_transfer_ns"] = r.virtual_transfer_ns;
  j["virtual_device_inclusive_ns"] = r.virtual_compute_ns + r.virtual_transfer_ns;
  if (wall) {
    j["wall_ns"] = r.wall_ns;
    j["host_kernel_wall_ns"] = r.host_kernel_wall_ns;
    j["device_kernel_wall_ns"] = r.device_kernel_wall_ns;
  }
}

std::pair<double, double> wall_min_median(const RunReport& r) {
  std::vector<double> w;
  for (const auto& it : r.iterations) w.push_back(it.wall_ns);
  if (w.empty()) return {0.0, 0.0};
  std::sort(w.begin(), w.end());
  const auto n = w.size();
  const double median = n % 2 ? w[n / 2] : 0.5 * (w[n / 2 - 1] + w[n / 2]);
  return {w.front(), median};
}

Json report_json(const RunReport& r) {
  const bool wall = r.config.wall_clock;
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config_json(r.config);

  Json iterations = Json::array();
  for (const auto& it : r.iterations) {
    Json ij;
    ij["index"] = it.index;
    Json vary = Json::object();
    for (const auto& [k, v] : it.vary) vary[k] = v;
    ij["vary"] = vary;
    counters_json(ij, it, wall);
    ij["nodes"] = it.nodes;
    iterations.push_back(ij);
  }
  j["iterations"] = iterations;

  Json totals;
  counters_json(totals, r.totals, wall);
  j["totals"] = totals;

  Json timing;
  timing["clock"] = wall ? "virtual+wall" : "virtual";
  timing["device_compute_only_ns"] = r.totals.virtual_compute_ns;
  timing["device_inclusive_ns"] = r.totals.virtual_compute_ns + r.totals.virtual_transfer_ns;
  if (wall) {
    const auto [lo, med] = wall_min_median(r);
    timing["wall_min_ns"] = lo;
    timing["wall_median_ns"] = med;
  }
  j["timing"] = timing;

  Json sums = Json::object();
  for (const auto& [name, c] : r.checksums)
    sums[name] = {{"elements", c.elements}, {"sum", c.sum}, {"digest", c.digest}};
  j["checksums"] = sums;

  Json events = Json::array();
  for (const auto& e : r.events)
    events.push_back({{"iteration", e.iteration},
                      {"kind", e.kind},
                      {"node", e.node},
                      {"device", e.device},
                      {"recovered", e.recovered},
                      {"message", e.message}});
  j["events"] = events;

  Json notes = Json::array();
  if (r.config.vary.empty()) notes.push_back("vary list is empty: iterations after the first reuse cached outputs");
  j["notes"] = notes;
  return j;
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

void text_report(std::ostringstream& os, const RunReport& r, const std::string& title) {
  const auto& c = r.config;
  os << "== " << title << " ==\n";
  os << "graph " << c.graph << ", precision " << to_string(c.precision) << ", device "
     << (c.device_enabled ? "on" : "off") << ", iterations " << c.iterations << ", seed " << c.seed << "\n";
  if (c.vary.empty()) {
    os << "vary: (empty)\n";
  } else {
    os << "vary:";
    for (const auto& v : c.vary) os << ' ' << v;
    os << "\n";
  }
  os << "iter  host  dev  h2d  d2h  h2d_bytes  d2h_bytes  wall_ms  virt_compute_us  virt_transfer_us\n";
  for (const auto& it : r.iterations) {
    char line[256];
    std::snprintf(line, sizeof line, "%4zu %5llu %4llu %4llu %4llu %10llu %10llu %8.3f %16.3f %17.3f\n", it.index,
                  static_cast<unsigned long long>(it.kernels_host), static_cast<unsigned long long>(it.kernels_device),
                  static_cast<unsigned long long>(it.h2d_count), static_cast<unsigned long long>(it.d2h_count),
                  static_cast<unsigned long long>(it.h2d_bytes), static_cast<unsigned long long>(it.d2h_bytes),
                  it.wall_ns * 1e-6, it.virtual_compute_ns * 1e-3, it.virtual_transfer_ns * 1e-3);
    os << line;
  }
  const auto& t = r.totals;
  os << "totals: kernels host " << t.kernels_host << ", device " << t.kernels_device << "; h2d " << t.h2d_count << " ("
     << t.h2d_bytes << " B), d2h " << t.d2h_count << " (" << t.d2h_bytes << " B), checkpoint d2h "
     << t.checkpoint_d2h << "\n";
  const auto [lo, med] = wall_min_median(r);
  os << "wall per iteration: min " << fmt("%.3f", lo * 1e-6) << " ms, median " << fmt("%.3f", med * 1e-6) << " ms\n";
  os << "device time (modeled): compute-only " << fmt("%.3f", t.virtual_compute_ns * 1e-3) << " us, inclusive "
     << fmt("%.3f", (t.virtual_compute_ns + t.virtual_transfer_ns) * 1e-3) << " us\n";
  for (const auto& [name, cs] : r.checksums)
    os << "checksum " << name << ": elements " << cs.elements << ", sum " << fmt("%.17g", cs.sum) << ", digest "
       << cs.digest << "\n";
  for (const auto& e : r.events)
    os << "event iteration " << e.iteration << ": " << e.kind << " at " << e.node << " on sim" << e.device
       << (e.recovered ? " (recovered on host)" : " (aborted)") << "\n";
}

}  // namespace

std::string emit_report(const RunReport& report, ReportFormat format) {
  if (format == ReportFormat::json) return report_json(report).dump(2) + "\n";
  std::ostringstream os;
  text_report(os, report, "run");
  return os.str();
}

std::string emit_comparison(const Comparison& c, ReportFormat format) {
  const auto ratios = speedup_ratios(c);
  bool match = c.host.output.size() == c.device.output.size();
  for (std::size_t i = 0; match && i < c.host.output.size(); ++i) match = c.host.output[i] == c.device.output[i];

  if (format == ReportFormat::json) {
    Json j;
    j["schema_version"] = kReportSchemaVersion;
    j["host"] = report_json(c.host);
    j["device"] = report_json(c.device);
    j["outputs_identical"] = match;
    if (c.host.config.wall_clock) {
      j["ratios"] = {{"cpu_over_device_inclusive", ratios.inclusive_ratio},
                     {"cpu_over_device_compute_only", ratios.compute_only_ratio}};
    }
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  text_report(os, c.host, "host-only run");
  text_report(os, c.device, "device-enabled run");
  os << "== comparison ==\n";
  os << "outputs identical: " << (match ? "yes" : "no") << "\n";
  os << "CPU time / (device computing + transfer time): " << fmt("%.4f", ratios.inclusive_ratio) << "\n";
  os << "CPU time / device computing-only time:         " << fmt("%.4f", ratios.compute_only_ratio) << "\n";
  os << "(CPU " << fmt("%.3f", ratios.cpu_ns * 1e-6) << " ms measured; device compute "
     << fmt("%.3f", ratios.device_compute_ns * 1e-6) << " ms measured; transfers "
     << fmt("%.3f", c.device.totals.virtual_transfer_ns * 1e-6) << " ms modeled)\n";
  return os.str();
}

}  // namespace lazygraph::bench
