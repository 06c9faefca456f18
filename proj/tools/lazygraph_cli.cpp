// lazygraph: run benchmark graphs described by a config file and print a report.
//
//   lazygraph run <config> [--device on|off] [--precision f32|f64] [--iterations N]
//                 [--fail-at N] [--report json|text] [--out PATH] [--seed N]
//                 [--compare] [--wall-clock]
//
// Exit codes: 0 success, 2 config error, 3 device fault under the abort policy.
// LAZYGRAPH_DISABLE_DEVICE=1 turns the device backend off regardless of flags.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lazygraph/bench/run.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDeviceFault = 3;

bool device_disabled_by_env() {
  const char* v = std::getenv("LAZYGRAPH_DISABLE_DEVICE");
  return v && *v && std::string(v) != "0";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lazygraph;

  CLI::App app{"Lazy host/device computation graph benchmarks"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Evaluate a configured graph and report counters and timings");
  std::string config_path, device, precision, report_format = "json", out_path;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> fail_at, seed;
  bool compare = false, wall_clock = false;

  run_cmd->add_option("config", config_path, "Config file")->required();
  run_cmd->add_option("--device", device, "Enable the simulated device")->check(CLI::IsMember({"on", "off"}));
  run_cmd->add_option("--precision", precision, "Floating point precision")->check(CLI::IsMember({"f32", "f64"}));
  run_cmd->add_option("--iterations", iterations, "Evaluation count")->check(CLI::PositiveNumber);
  run_cmd->add_option("--fail-at", fail_at, "Inject a fault at the N-th device kernel")->check(CLI::PositiveNumber);
  run_cmd->add_option("--report", report_format, "Report format")->check(CLI::IsMember({"json", "text"}));
  run_cmd->add_option("--out", out_path, "Write the report here instead of stdout");
  run_cmd->add_option("--seed", seed, "Seed for variable perturbation");
  run_cmd->add_flag("--compare", compare, "Run host-only and device-enabled and report both");
  run_cmd->add_flag("--wall-clock", wall_clock, "Include measured wall times in JSON reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  bench::RunConfig cfg;
  try {
    cfg = bench::load_config(config_path);
  } catch (const bench::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (!device.empty()) cfg.device_enabled = device == "on";
  if (!precision.empty()) cfg.precision = precision == "f32" ? Precision::f32 : Precision::f64;
  if (iterations) cfg.iterations = *iterations;
  if (fail_at) cfg.arena.failure = FailAtKernel{*fail_at};
  if (seed) cfg.seed = *seed;
  if (wall_clock) cfg.wall_clock = true;
  if (device_disabled_by_env()) cfg.device_enabled = false;

  const auto format = report_format == "text" ? bench::ReportFormat::text : bench::ReportFormat::json;
  std::string text;
  try {
    if (compare) {
      if (device_disabled_by_env()) {
        std::cerr << "config error: --compare needs the device backend (LAZYGRAPH_DISABLE_DEVICE is set)\n";
        return kExitConfig;
      }
      text = bench::emit_comparison(bench::run_comparison(cfg), format);
    } else {
      text = bench::emit_report(bench::run(cfg), format);
    }
  } catch (const bench::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::DeviceFault ? kExitDeviceFault : kExitConfig;
  }

  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << out_path << "\n";
      return 1;
    }
    out << text;
  }
  return 0;
}
