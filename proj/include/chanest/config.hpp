#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chanest/baselines.hpp"
#include "chanest/channel_sim.hpp"
#include "chanest/gamp.hpp"
#include "chanest/param_estimation.hpp"

namespace chanest {

/// Explicit thresholds and symbols for one bit depth, in units of the
/// per-component RMS of the quantizer input. Scaled per instance like the
/// default quantizer.
struct QuantizerOverride {
  std::vector<double> thresholds;
  std::vector<double> symbols;
};

struct ExperimentConfig {
  ChannelConfig channel;
  std::vector<int> bits_list{1, 2, 3};
  std::vector<double> snr_list_db{0.0, 10.0, 20.0, 30.0, 40.0};
  std::vector<std::string> methods{"amp-pe", "amp-oracle", "ls", "iht"};
  int trials = 20;
  std::uint64_t base_seed = 1;
  std::string output_path = "results.csv";
  /// Zero writes runtime_ms = 0 so repeated runs produce identical files.
  bool record_runtime = true;
  /// Worker count; 0 uses the hardware concurrency. CHANEST_THREADS caps both.
  int threads = 0;

  GampOptions gamp;
  OuterLoopOptions outer;
  /// sparsity = 0 sweeps multiples of the true 99%-energy support and keeps the best.
  IhtOptions iht = [] {
    IhtOptions o;
    o.sparsity = 0;
    return o;
  }();
  int ls_max_iters = 100;
  double ls_tol = 1e-6;
  /// Per-entry observation variance, relative to the mean entry energy,
  /// used when fitting the oracle prior to the true channel.
  double oracle_resolution = 1e-4;

  std::map<int, QuantizerOverride> quantizers;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Known method names, in canonical order.
const std::vector<std::string>& known_methods();

/// Parses "key = value" lines and validates the result. '#' starts a
/// comment; blank lines are ignored; absent keys keep their defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Applies one "key=value" assignment on top of an existing config. Only the
/// value is checked here; call validate() after the last override.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// Writes every key in a form parse_config reads back to the same config.
std::string to_config_text(const ExperimentConfig& cfg);

/// Quantizer for one instance: the override for this bit depth if present,
/// else default_quantizer. input_rms is the complex RMS of the input.
QuantizerSpec quantizer_for(const ExperimentConfig& cfg, int bits, double input_rms);

}  // namespace chanest
