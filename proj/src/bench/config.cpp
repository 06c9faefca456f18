#include "lazygraph/bench/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lazygraph::bench {

const Value* Section::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

const Section* Document::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class LineParser {
 public:
  LineParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }
  char peek() { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  std::size_t column() const { return pos_ + 1; }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError::parse(line_, column(), msg); }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string name() {
    skip_ws();
    if (peek() == '"') return quoted();
    const auto start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string quoted() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      out += text_[pos_++];
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Value value() {
    skip_ws();
    Value v;
    v.line = line_;
    v.column = column();
    const char c = peek();
    if (c == '"') {
      v.data = quoted();
    } else if (c == '[') {
      ++pos_;
      std::vector<Value> items;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
      } else {
        for (;;) {
          items.push_back(value());
          skip_ws();
          if (peek() == ',') {
            ++pos_;
            continue;
          }
          expect(']');
          break;
        }
      }
      v.data = std::move(items);
    } else if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      const auto start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                     text_[pos_] == '-' || text_[pos_] == '+'))
        ++pos_;
      const std::string token(text_.substr(start, pos_ - start));
      std::size_t used = 0;
      double d = 0.0;
      try {
        d = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) {
        pos_ = start;
        fail("malformed number '" + token + "'");
      }
      v.data = d;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::string word = name();
      skip_ws();
      if (peek() == '(') {
        ++pos_;
        Call call{word, {}};
        skip_ws();
        if (peek() == ')') {
          ++pos_;
        } else {
          for (;;) {
            call.args.push_back(value());
            skip_ws();
            if (peek() == ',') {
              ++pos_;
              continue;
            }
            expect(')');
            break;
          }
        }
        v.data = std::move(call);
      } else if (word == "true" || word == "false") {
        v.data = word == "true";
      } else {
        v.data = word;
      }
    } else {
      fail(c == '\0' ? "missing value" : std::string("unexpected character '") + c + "'");
    }
    return v;
  }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

}  // namespace

Document parse_document(const std::string& text) {
  Document doc;
  doc.sections.push_back(Section{"", 0, {}});
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_comment(raw);
    LineParser p(line, line_no);
    if (p.at_end()) continue;
    if (p.peek() == '[') {
      p.expect('[');
      const std::string name = p.name();
      p.expect(']');
      if (!p.at_end()) p.fail("unexpected text after section header");
      if (doc.find(name)) p.fail("section [" + name + "] appears twice");
      doc.sections.push_back(Section{name, line_no, {}});
      continue;
    }
    const std::string key = p.name();
    p.expect('=');
    Value v = p.value();
    if (!p.at_end()) p.fail("unexpected text after value");
    auto& section = doc.sections.back();
    if (section.find(key)) throw ConfigError::parse(line_no, 1, "duplicate key '" + key + "'");
    section.entries.emplace_back(key, std::move(v));
  }
  return doc;
}

// ---------------------------------------------------------------------------------------------

namespace {

struct Reader {
  const Section& section;
  std::set<std::string> used;

  std::string field(const std::string& key) const {
    return section.name.empty() ? key : section.name + "." + key;
  }

  const Value* get(const std::string& key) {
    used.insert(key);
    return section.find(key);
  }

  double number(const Value& v, const std::string& key) const {
    if (const auto* d = std::get_if<double>(&v.data)) return *d;
    throw ConfigError::validation(field(key), "expected a number");
  }

  std::optional<double> number(const std::string& key) {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    return number(*v, key);
  }

  std::optional<std::uint64_t> count(const std::string& key, std::uint64_t min) {
    auto d = number(key);
    if (!d) return std::nullopt;
    if (*d != std::floor(*d) || *d < static_cast<double>(min) || *d > 9.0e18)
      throw ConfigError::validation(field(key), "expected an integer >= " + std::to_string(min));
    return static_cast<std::uint64_t>(*d);
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    if (const auto* b = std::get_if<bool>(&v->data)) return *b;
    if (const auto* s = std::get_if<std::string>(&v->data)) {
      if (*s == "on") return true;
      if (*s == "off") return false;
    }
    throw ConfigError::validation(field(key), "expected true/false");
  }

  std::optional<std::string> text(const std::string& key) {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    if (const auto* s = std::get_if<std::string>(&v->data)) return *s;
    throw ConfigError::validation(field(key), "expected a string");
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    const auto* list = std::get_if<std::vector<Value>>(&v->data);
    if (!list) throw ConfigError::validation(field(key), "expected a list of strings");
    std::vector<std::string> out;
    for (const auto& item : *list) {
      const auto* s = std::get_if<std::string>(&item.data);
      if (!s) throw ConfigError::validation(field(key), "expected a list of strings");
      out.push_back(*s);
    }
    return out;
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    return number_list(*v, key, nullptr);
  }

  /// A list of numbers or linspace(min, max, count).
  std::vector<double> number_list(const Value& v, const std::string& key,
                                  std::optional<std::tuple<double, double, std::size_t>>* linspace) const {
    if (const auto* call = std::get_if<Call>(&v.data)) {
      if (call->name != "linspace" || call->args.size() != 3)
        throw ConfigError::validation(field(key), "expected linspace(min, max, count)");
      const double lo = number(call->args[0], key), hi = number(call->args[1], key), n = number(call->args[2], key);
      if (n < 1 || n != std::floor(n)) throw ConfigError::validation(field(key), "linspace count must be an integer >= 1");
      const auto count = static_cast<std::size_t>(n);
      std::vector<double> out(count);
      for (std::size_t i = 0; i < count; ++i)
        out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
      if (linspace) *linspace = std::make_tuple(lo, hi, count);
      return out;
    }
    const auto* list = std::get_if<std::vector<Value>>(&v.data);
    if (!list) throw ConfigError::validation(field(key), "expected a list of numbers or linspace(...)");
    std::vector<double> out;
    for (const auto& item : *list) out.push_back(number(item, key));
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : section.entries)
      if (!used.count(key)) throw ConfigError::validation(field(key), "unknown key");
  }
};

Precision parse_precision(const std::string& s, const std::string& field) {
  if (s == "f64") return Precision::f64;
  if (s == "f32") return Precision::f32;
  throw ConfigError::validation(field, "expected f32 or f64");
}

osc::MassPair parse_pair(const std::string& s, const std::string& field) {
  if (s == "21") return osc::MassPair::p21;
  if (s == "31") return osc::MassPair::p31;
  if (s == "32") return osc::MassPair::p32;
  throw ConfigError::validation(field, "expected \"21\", \"31\" or \"32\"");
}

const std::set<std::string> kNodeKinds{"source",      "identity", "scale",     "add",    "product",
                                       "weighted_sum", "osc_weights", "osc_phase", "oscprob"};

}  // namespace

std::string to_string(osc::Flavor f) {
  switch (f) {
    case osc::Flavor::e: return "e";
    case osc::Flavor::mu: return "mu";
    case osc::Flavor::tau: return "tau";
  }
  return "?";
}

osc::Flavor parse_flavor(const std::string& text, const std::string& field) {
  if (text == "e") return osc::Flavor::e;
  if (text == "mu") return osc::Flavor::mu;
  if (text == "tau") return osc::Flavor::tau;
  throw ConfigError::validation(field, "expected e, mu or tau");
}

std::optional<DeviceSpec> parse_placement(const std::string& text, const std::string& field) {
  if (text == "host") return std::nullopt;
  if (text == "device") return DeviceSpec::sim(0);
  if (text.rfind("sim", 0) == 0 && text.size() > 3) {
    int id = 0;
    const auto* first = text.data() + 3;
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, id);
    if (ec == std::errc{} && ptr == last && id >= 0) return DeviceSpec::sim(id);
  }
  throw ConfigError::validation(field, "expected host, device or simN");
}

RunConfig parse_config(const std::string& text) {
  const Document doc = parse_document(text);
  RunConfig cfg;

  for (const auto& s : doc.sections) {
    if (s.name.empty() || s.name == "graph" || s.name == "run" || s.name == "device" || s.name == "placement" ||
        s.name == "oscprob" || s.name == "chain" || s.name == "variables" || s.name.rfind("node.", 0) == 0)
      continue;
    throw ConfigError::validation(s.name, "unknown section");
  }

  if (const auto* root = doc.find(""); root && !root->entries.empty())
    throw ConfigError::validation(root->entries.front().first, "keys must appear inside a section");

  if (const auto* s = doc.find("graph")) {
    Reader r{*s, {}};
    if (auto v = r.text("name")) cfg.graph = *v;
    if (auto v = r.text("output")) cfg.output = *v;
    r.reject_unknown();
  }
  if (cfg.graph != "oscprob" && cfg.graph != "chain" && cfg.graph != "custom")
    throw ConfigError::validation("graph.name", "expected oscprob, chain or custom");

  if (const auto* s = doc.find("run")) {
    Reader r{*s, {}};
    if (auto v = r.text("precision")) cfg.precision = parse_precision(*v, r.field("precision"));
    if (auto v = r.boolean("device")) cfg.device_enabled = *v;
    if (auto v = r.number("iterations")) {
      if (*v < 1 || *v != std::floor(*v)) throw ConfigError::validation("run.iterations", "must be an integer >= 1");
      cfg.iterations = static_cast<std::size_t>(*v);
    }
    if (auto v = r.strings("vary")) cfg.vary = *v;
    if (auto v = r.count("seed", 0)) cfg.seed = *v;
    if (auto v = r.text("recovery")) {
      if (*v == "abort") cfg.recovery = RecoveryPolicy::Abort;
      else if (*v == "fallback") cfg.recovery = RecoveryPolicy::FallbackToHost;
      else throw ConfigError::validation("run.recovery", "expected abort or fallback");
    }
    if (auto v = r.count("checkpoint_every", 1)) cfg.checkpoint_every = static_cast<std::uint32_t>(*v);
    if (auto v = r.boolean("wall_clock")) cfg.wall_clock = *v;
    r.reject_unknown();
  }

  if (const auto* s = doc.find("device")) {
    Reader r{*s, {}};
    if (auto v = r.count("count", 1)) cfg.arena.devices = static_cast<int>(*v);
    if (auto v = r.count("capacity_bytes", 1)) cfg.arena.capacity_bytes = *v;
    if (const auto* v = r.get("chunk_size")) {
      const auto* word = std::get_if<std::string>(&v->data);
      if (!(word && *word == "unlimited")) {
        if (auto n = r.count("chunk_size", 1)) cfg.arena.chunk_size = *n;
      }
    }
    auto positive = [&](const char* key, double& out) {
      if (auto v = r.number(key)) {
        if (!(*v > 0)) throw ConfigError::validation(r.field(key), "must be positive");
        out = *v;
      }
    };
    positive("bytes_per_ns", cfg.arena.cost.bytes_per_ns);
    positive("elements_per_ns", cfg.arena.cost.elements_per_ns);
    if (auto v = r.number("latency_ns")) cfg.arena.cost.latency_ns = *v;
    if (auto v = r.number("launch_ns")) cfg.arena.cost.launch_ns = *v;
    if (cfg.arena.cost.latency_ns < 0 || cfg.arena.cost.launch_ns < 0)
      throw ConfigError::validation("device", "latencies must be non-negative");
    const auto fail_at = r.count("fail_at", 1);
    const auto fail_p = r.number("fail_probability");
    const auto fail_seed = r.count("fail_seed", 0);
    if (fail_at && fail_p) throw ConfigError::validation("device.fail_at", "conflicts with device.fail_probability");
    if (fail_at) cfg.arena.failure = FailAtKernel{*fail_at};
    if (fail_p) {
      if (*fail_p < 0 || *fail_p > 1) throw ConfigError::validation("device.fail_probability", "must lie in [0, 1]");
      cfg.arena.failure = FailWithProbability{*fail_p, fail_seed.value_or(0)};
    }
    r.reject_unknown();
  }

  if (const auto* s = doc.find("placement")) {
    for (const auto& [key, v] : s->entries) {
      const auto* str = std::get_if<std::string>(&v.data);
      if (!str) throw ConfigError::validation("placement." + key, "expected host, device or simN");
      parse_placement(*str, "placement." + key);
      cfg.placement[key] = *str;
    }
  }

  if (cfg.graph == "oscprob") {
    cfg.osc = osc::OscParams{0.5838, 0.1496, 0.7854, 0.0, 7.53e-5, 2.52e-3, false};
    cfg.energies.values = std::vector<double>(10000);
    for (std::size_t i = 0; i < 10000; ++i) cfg.energies.values[i] = 1.0 + 9.0 * static_cast<double>(i) / 9999.0;
    cfg.energies.linspace = std::make_tuple(1.0, 10.0, std::size_t{10000});
    const auto* s = doc.find("oscprob");
    if (!s) throw ConfigError::validation("oscprob", "section is required for graph oscprob");
    Reader r{*s, {}};
    if (auto v = r.text("alpha")) cfg.alpha = parse_flavor(*v, "oscprob.alpha");
    if (auto v = r.text("beta")) cfg.beta = parse_flavor(*v, "oscprob.beta");
    if (auto v = r.boolean("antineutrino")) cfg.osc.antineutrino = *v;
    for (auto [key, dst] : {std::pair{"theta12", &cfg.osc.theta12}, std::pair{"theta13", &cfg.osc.theta13},
                            std::pair{"theta23", &cfg.osc.theta23}, std::pair{"delta_cp", &cfg.osc.delta_cp},
                            std::pair{"dm2_21", &cfg.osc.dm2_21}, std::pair{"dm2_31", &cfg.osc.dm2_31}}) {
      if (auto v = r.number(key)) *dst = *v;
    }
    try {
      cfg.osc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError::validation("oscprob", e.what());
    }
    if (const auto* v = r.get("energies")) {
      cfg.energies.linspace.reset();
      cfg.energies.values = r.number_list(*v, "energies", &cfg.energies.linspace);
    }
    try {
      osc::validate_energies(cfg.energies.values);
    } catch (const std::invalid_argument& e) {
      throw ConfigError::validation("oscprob.energies", e.what());
    }
    if (auto v = r.numbers("baselines")) cfg.baselines = *v;
    if (cfg.baselines.empty()) throw ConfigError::validation("oscprob.baselines", "at least one baseline is required");
    for (double b : cfg.baselines)
      if (!(b >= 0)) throw ConfigError::validation("oscprob.baselines", "baselines must be >= 0 km");
    if (auto v = r.numbers("weights")) {
      cfg.merge_weights = *v;
      if (cfg.merge_weights.size() != cfg.baselines.size())
        throw ConfigError::validation("oscprob.weights", "needs one weight per baseline");
    } else {
      cfg.merge_weights.assign(cfg.baselines.size(), 1.0 / static_cast<double>(cfg.baselines.size()));
    }
    r.reject_unknown();
  }

  if (cfg.graph == "chain") {
    if (const auto* s = doc.find("chain")) {
      Reader r{*s, {}};
      if (auto v = r.count("length", 1)) cfg.chain_length = *v;
      if (auto v = r.count("size", 1)) cfg.chain_size = *v;
      r.reject_unknown();
    }
  }

  if (cfg.graph == "custom") {
    if (const auto* s = doc.find("variables")) {
      for (const auto& [key, v] : s->entries) {
        const auto* d = std::get_if<double>(&v.data);
        if (!d) throw ConfigError::validation("variables." + key, "expected a number");
        cfg.variables.emplace_back(key, *d);
      }
    }
    for (const auto& s : doc.sections) {
      if (s.name.rfind("node.", 0) != 0) continue;
      Reader r{s, {}};
      NodeConfig node;
      node.name = s.name.substr(5);
      if (node.name.empty()) throw ConfigError::validation(s.name, "node name is empty");
      node.kind = r.text("kind").value_or("");
      if (!kNodeKinds.count(node.kind)) throw ConfigError::validation(r.field("kind"), "unknown node kind");
      if (auto v = r.strings("inputs")) node.inputs = *v;
      if (auto v = r.strings("variables")) node.variables = *v;
      if (const auto* v = r.get("values")) node.values = r.number_list(*v, "values", nullptr);
      if (auto v = r.text("device")) {
        parse_placement(*v, r.field("device"));
        node.placement = *v;
      }
      if (auto v = r.text("alpha")) node.alpha = parse_flavor(*v, r.field("alpha"));
      if (auto v = r.text("beta")) node.beta = parse_flavor(*v, r.field("beta"));
      if (auto v = r.boolean("antineutrino")) node.antineutrino = *v;
      if (const auto* v = r.get("pair")) {
        std::string p;
        if (const auto* str = std::get_if<std::string>(&v->data)) p = *str;
        else if (const auto* d = std::get_if<double>(&v->data)) p = std::to_string(static_cast<int>(*d));
        node.pair = parse_pair(p, r.field("pair"));
      }
      if (node.kind == "source" && node.values.empty())
        throw ConfigError::validation(r.field("values"), "source nodes need values");
      r.reject_unknown();
      cfg.nodes.push_back(std::move(node));
    }
    if (cfg.nodes.empty()) throw ConfigError::validation("node", "custom graphs need at least one [node.NAME] section");
    if (cfg.output.empty()) throw ConfigError::validation("graph.output", "custom graphs must name an output node");
    std::set<std::string> names;
    for (const auto& n : cfg.nodes) names.insert(n.name);
    if (!names.count(cfg.output)) throw ConfigError::validation("graph.output", "no node named '" + cfg.output + "'");
    for (const auto& n : cfg.nodes)
      for (const auto& in : n.inputs)
        if (!names.count(in)) throw ConfigError::validation("node." + n.name + ".inputs", "no node named '" + in + "'");
  }

  const auto vars = declared_variables(cfg);
  for (const auto& v : cfg.vary)
    if (std::find(vars.begin(), vars.end(), v) == vars.end())
      throw ConfigError::validation("run.vary", "unknown variable '" + v + "'");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError::validation("config", "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::vector<std::string> declared_variables(const RunConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.graph == "oscprob") {
    out = {"theta12", "theta13", "theta23", "delta_cp", "dm2_21", "dm2_31"};
    for (std::size_t b = 0; b < cfg.baselines.size(); ++b) out.push_back("baseline_" + std::to_string(b));
    for (std::size_t b = 0; b < cfg.baselines.size(); ++b) out.push_back("weight_" + std::to_string(b));
  } else if (cfg.graph == "chain") {
    for (std::size_t k = 0; k < cfg.chain_length; ++k) out.push_back("factor_" + std::to_string(k));
  } else {
    for (const auto& [name, value] : cfg.variables) out.push_back(name);
  }
  return out;
}

}  // namespace lazygraph::bench
