#include "chanest/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "chanest/error.hpp"

namespace chanest {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& expected, const std::string& got) {
  throw Error(ErrorCode::ConfigError, key + ": expected " + expected + ", got '" + got + "'");
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) bad_value(key, "an integer", text);
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) bad_value(key, "a number", text);
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  bad_value(key, "true or false", text);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (out.size() == 1 && out.front().empty()) out.clear();
  return out;
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& text, F parse_one) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) {
    if (item.empty()) bad_value(key, "a comma-separated list", text);
    out.push_back(parse_one(key, item));
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string fmt_int(T v) {
  return std::to_string(v);
}

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

template <typename T, typename F>
std::string fmt_list(const std::vector<T>& v, F one) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + one(v[i]);
  return out;
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define INT_FIELD(name, member)                                                                            \
  Field {                                                                                                  \
    name, [](ExperimentConfig& c, const std::string& k, const std::string& v) {                            \
      c.member = parse_integer<std::decay_t<decltype(c.member)>>(k, v);                                    \
    },                                                                                                     \
        [](const ExperimentConfig& c) { return fmt_int(c.member); }                                        \
  }
#define REAL_FIELD(name, member)                                                                           \
  Field {                                                                                                  \
    name, [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.member = parse_double(k, v); }, \
        [](const ExperimentConfig& c) { return fmt(c.member); }                                            \
  }
#define BOOL_FIELD(name, member)                                                                           \
  Field {                                                                                                  \
    name, [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.member = parse_bool(k, v); },   \
        [](const ExperimentConfig& c) { return fmt_bool(c.member); }                                       \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      INT_FIELD("channel.n_t", channel.n_t),
      INT_FIELD("channel.n_r", channel.n_r),
      INT_FIELD("channel.taps", channel.taps),
      INT_FIELD("channel.clusters", channel.clusters),
      INT_FIELD("channel.paths_per_cluster", channel.paths_per_cluster),
      REAL_FIELD("channel.angle_spread_deg", channel.angle_spread_deg),
      INT_FIELD("channel.training_length", channel.training_length),
      BOOL_FIELD("channel.snap_to_grid", channel.snap_to_grid),
      Field{"experiment.bits",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.bits_list = parse_list<int>(k, v, parse_integer<int>);
            },
            [](const ExperimentConfig& c) { return fmt_list(c.bits_list, fmt_int<int>); }},
      Field{"experiment.snr_db",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              c.snr_list_db = parse_list<double>(k, v, parse_double);
            },
            [](const ExperimentConfig& c) { return fmt_list(c.snr_list_db, fmt); }},
      Field{"experiment.methods",
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.methods = split_list(v); },
            [](const ExperimentConfig& c) { return fmt_list(c.methods, [](const std::string& s) { return s; }); }},
      INT_FIELD("experiment.trials", trials),
      INT_FIELD("experiment.base_seed", base_seed),
      Field{"experiment.output", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_path = v; },
            [](const ExperimentConfig& c) { return c.output_path; }},
      BOOL_FIELD("experiment.record_runtime", record_runtime),
      INT_FIELD("experiment.threads", threads),
      INT_FIELD("gamp.max_inner_iters", gamp.max_inner_iters),
      REAL_FIELD("gamp.damping", gamp.damping_factor),
      BOOL_FIELD("gamp.mean_removal", gamp.mean_removal),
      REAL_FIELD("gamp.tol", gamp.tol_rel_change),
      REAL_FIELD("gamp.variance_floor", gamp.variance_floor),
      INT_FIELD("prior.components", outer.components),
      REAL_FIELD("oracle.resolution", oracle_resolution),
      INT_FIELD("outer.max_iters", outer.max_outer_iters),
      REAL_FIELD("outer.param_tol", outer.param_tol),
      REAL_FIELD("outer.tau_w_min", outer.tau_w_min),
      REAL_FIELD("outer.kappa_lo", outer.kappa_lo),
      REAL_FIELD("outer.kappa_hi", outer.kappa_hi),
      INT_FIELD("outer.newton_max_steps", outer.newton_max_steps),
      REAL_FIELD("outer.newton_backtrack", outer.newton_backtrack),
      BOOL_FIELD("outer.fix_scale", outer.fix_scale),
      INT_FIELD("iht.sparsity", iht.sparsity),
      Field{"iht.step",
            [](ExperimentConfig& c, const std::string& k, const std::string& v) {
              if (v == "auto")
                c.iht.step_size.reset();
              else
                c.iht.step_size = parse_double(k, v);
            },
            [](const ExperimentConfig& c) { return c.iht.step_size ? fmt(*c.iht.step_size) : std::string("auto"); }},
      INT_FIELD("iht.max_iters", iht.max_iters),
      REAL_FIELD("iht.tol", iht.tol),
      INT_FIELD("ls.max_iters", ls_max_iters),
      REAL_FIELD("ls.tol", ls_tol),
  };
  return table;
}

#undef INT_FIELD
#undef REAL_FIELD
#undef BOOL_FIELD

// quantizer.<K>bit.thresholds / quantizer.<K>bit.symbols
bool set_quantizer_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string prefix = "quantizer.";
  if (key.rfind(prefix, 0) != 0) return false;
  const auto dot = key.find('.', prefix.size());
  const auto tag = key.substr(prefix.size(), dot == std::string::npos ? std::string::npos : dot - prefix.size());
  if (dot == std::string::npos || tag.size() < 4 || tag.substr(tag.size() - 3) != "bit")
    throw Error(ErrorCode::ConfigError, key + ": expected quantizer.<bits>bit.thresholds or .symbols");
  const int bits = parse_integer<int>(key, tag.substr(0, tag.size() - 3));
  const std::string leaf = key.substr(dot + 1);
  auto& q = cfg.quantizers[bits];
  if (leaf == "thresholds")
    q.thresholds = parse_list<double>(key, value, parse_double);
  else if (leaf == "symbols")
    q.symbols = parse_list<double>(key, value, parse_double);
  else
    throw Error(ErrorCode::ConfigError, key + ": unknown quantizer field '" + leaf + "'");
  return true;
}

void assign(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, key, value);
      return;
    }
  }
  if (set_quantizer_key(cfg, key, value)) return;
  throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
}

// Re-throws a validation failure as a ConfigError prefixed with the section name.
template <typename F>
void check_section(const std::string& section, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, section + ": " + e.detail());
  }
}

}  // namespace

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> names{"amp-pe", "amp-oracle", "ls", "iht"};
  return names;
}

void ExperimentConfig::validate() const {
  check_section("channel", [&] { channel.validate(); });
  check_section("gamp", [&] { gamp.validate(); });
  check_section("outer", [&] { outer.validate(); });
  if (trials < 1) throw Error(ErrorCode::ConfigError, "experiment.trials: must be at least 1");
  if (threads < 0) throw Error(ErrorCode::ConfigError, "experiment.threads: must be nonnegative");
  if (bits_list.empty()) throw Error(ErrorCode::ConfigError, "experiment.bits: list is empty");
  for (int b : bits_list)
    if (b < 1 || b > 16) throw Error(ErrorCode::ConfigError, "experiment.bits: " + std::to_string(b) + " outside 1..16");
  if (snr_list_db.empty()) throw Error(ErrorCode::ConfigError, "experiment.snr_db: list is empty");
  for (double s : snr_list_db)
    if (std::isnan(s)) throw Error(ErrorCode::ConfigError, "experiment.snr_db: NaN entry");
  if (methods.empty()) throw Error(ErrorCode::ConfigError, "experiment.methods: list is empty");
  for (const auto& m : methods)
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
      throw Error(ErrorCode::ConfigError, "experiment.methods: unknown method '" + m + "'");
  if (output_path.empty()) throw Error(ErrorCode::ConfigError, "experiment.output: empty path");
  if (iht.sparsity < 0) throw Error(ErrorCode::ConfigError, "iht.sparsity: must be nonnegative");
  if (iht.sparsity > channel.unknowns())
    throw Error(ErrorCode::ConfigError, "iht.sparsity: exceeds the number of unknowns");
  if (iht.step_size && !(*iht.step_size > 0.0)) throw Error(ErrorCode::ConfigError, "iht.step: must be positive");
  if (iht.max_iters < 1) throw Error(ErrorCode::ConfigError, "iht.max_iters: must be at least 1");
  if (!(iht.tol >= 0.0)) throw Error(ErrorCode::ConfigError, "iht.tol: must be nonnegative");
  if (ls_max_iters < 1) throw Error(ErrorCode::ConfigError, "ls.max_iters: must be at least 1");
  if (!(ls_tol >= 0.0)) throw Error(ErrorCode::ConfigError, "ls.tol: must be nonnegative");
  if (!(oracle_resolution > 0.0)) throw Error(ErrorCode::ConfigError, "oracle.resolution: must be positive");
  for (const auto& [bits, q] : quantizers) {
    const std::string name = "quantizer." + std::to_string(bits) + "bit";
    check_section(name, [&] {
      const QuantizerSpec spec(q.thresholds, q.symbols);
      if (spec.bits() != bits) throw Error(ErrorCode::InvalidBitDepth, "symbol count does not match the bit depth");
    });
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
    try {
      assign(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "override '" + assignment + "': expected key=value");
  assign(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string to_config_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  for (const auto& [bits, q] : cfg.quantizers) {
    const std::string base = "quantizer." + std::to_string(bits) + "bit.";
    out += base + "thresholds = " + fmt_list(q.thresholds, fmt) + "\n";
    out += base + "symbols = " + fmt_list(q.symbols, fmt) + "\n";
  }
  return out;
}

QuantizerSpec quantizer_for(const ExperimentConfig& cfg, int bits, double input_rms) {
  const auto it = cfg.quantizers.find(bits);
  if (it == cfg.quantizers.end()) return default_quantizer(bits, input_rms);
  if (!(input_rms > 0.0) || !std::isfinite(input_rms))
    throw Error(ErrorCode::InvalidParams, "input_rms must be positive and finite");
  const double unit = input_rms / std::sqrt(2.0);
  std::vector<double> thresholds = it->second.thresholds;
  std::vector<double> symbols = it->second.symbols;
  for (double& a : thresholds) a *= unit;
  for (double& b : symbols) b *= unit;
  QuantizerSpec spec(std::move(thresholds), std::move(symbols));
  if (spec.bits() != bits) throw Error(ErrorCode::InvalidBitDepth, "quantizer override has the wrong bit depth");
  spec.set_calibrated_power(input_rms * input_rms);
  return spec;
}

}  // namespace chanest
