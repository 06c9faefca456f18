#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lazygraph/arena.hpp"
#include "lazygraph/executor.hpp"
#include "lazygraph/oscillation.hpp"
#include "lazygraph/types.hpp"

namespace lazygraph::bench {

/// Raised for malformed text (kind Parse, with position) and for well-formed text that names an
/// invalid setting (kind Validation, with the offending field).
class ConfigError : public std::runtime_error {
 public:
  enum class Kind { Parse, Validation };

  static ConfigError parse(std::size_t line, std::size_t column, const std::string& msg) {
    return ConfigError(Kind::Parse, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg,
                       line, column, {});
  }
  static ConfigError validation(const std::string& field, const std::string& msg) {
    return ConfigError(Kind::Validation, field + ": " + msg, 0, 0, field);
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ConfigError(Kind kind, const std::string& what, std::size_t line, std::size_t column, std::string field)
      : std::runtime_error(what), kind_(kind), line_(line), column_(column), field_(std::move(field)) {}

  Kind kind_;
  std::size_t line_;
  std::size_t column_;
  std::string field_;
};

// ---------------------------------------------------------------------------------------------
// Raw document: "[section.sub]" headers and "key = value" lines.

struct Value;

struct Call {
  std::string name;
  std::vector<Value> args;
};

struct Value {
  std::variant<double, bool, std::string, std::vector<Value>, Call> data;
  std::size_t line = 0;
  std::size_t column = 0;
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::vector<std::pair<std::string, Value>> entries;  // file order

  const Value* find(const std::string& key) const;
};

struct Document {
  std::vector<Section> sections;  // the unnamed root section first

  const Section* find(const std::string& name) const;
};

Document parse_document(const std::string& text);

// ---------------------------------------------------------------------------------------------
// Validated run configuration.

struct NodeConfig {
  std::string name;
  std::string kind;
  std::vector<std::string> inputs;
  std::vector<std::string> variables;
  std::vector<double> values;  // source nodes
  std::string placement;       // "host", "device" or "simN"; empty for the default
  osc::Flavor alpha = osc::Flavor::e;
  osc::Flavor beta = osc::Flavor::e;
  bool antineutrino = false;
  osc::MassPair pair = osc::MassPair::p21;
};

struct EnergyGrid {
  std::vector<double> values;
  std::optional<std::tuple<double, double, std::size_t>> linspace;
};

struct RunConfig {
  std::string graph = "oscprob";  // "oscprob", "chain" or "custom"
  Precision precision = Precision::f64;
  bool device_enabled = true;
  std::size_t iterations = 1;
  std::vector<std::string> vary;
  std::uint64_t seed = 0;
  RecoveryPolicy recovery = RecoveryPolicy::Abort;
  std::optional<std::uint32_t> checkpoint_every;
  bool wall_clock = false;

  ArenaConfig arena;

  // placement group or node name -> "host" | "device" | "simN"
  std::map<std::string, std::string> placement;

  // oscprob
  EnergyGrid energies;
  std::vector<double> baselines;
  osc::OscParams osc;
  osc::Flavor alpha = osc::Flavor::e;
  osc::Flavor beta = osc::Flavor::e;
  std::vector<double> merge_weights;  // defaults to 1/m each

  // chain
  std::size_t chain_length = 3;
  std::size_t chain_size = 1000;

  // custom
  std::vector<NodeConfig> nodes;
  std::vector<std::pair<std::string, double>> variables;
  std::string output;
};

/// Parses and validates a config, applying defaults for every omitted key.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::string& path);

/// Names of every variable the configured graph declares, in creation order.
std::vector<std::string> declared_variables(const RunConfig& cfg);

std::string to_string(osc::Flavor f);
osc::Flavor parse_flavor(const std::string& text, const std::string& field);

/// Maps a placement string to a device, or nullopt for host.
std::optional<DeviceSpec> parse_placement(const std::string& text, const std::string& field);

}  // namespace lazygraph::bench
