#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chanest/config.hpp"

namespace chanest {

struct TrialRecord {
  int trial = 0;
  int bits = 0;
  double snr_db = 0.0;
  std::string method;
  /// NaN when the estimator failed; written as "err".
  double nmse_db = 0.0;
  int iterations = 0;
  double runtime_ms = 0.0;
  std::optional<double> tau_w_hat;
  std::optional<double> kappa_hat;
  bool converged = false;
  /// Trial seed; together with the config it regenerates the instance.
  std::uint64_t seed = 0;
  /// Error text for failed cells; not written to the CSV.
  std::string error;

  bool failed() const { return std::isnan(nmse_db); }
};

/// Seed of one trial. Channel, training, noise and power-iteration streams
/// are derived from it with fixed sub-indices.
std::uint64_t trial_seed(std::uint64_t base_seed, int trial);

/// One trial's generated data, shared by every (bits, snr, method) cell so
/// that comparisons are paired.
class TrialInstance {
 public:
  TrialInstance(const ExperimentConfig& cfg, int trial);

  int trial() const { return trial_; }
  std::uint64_t seed() const { return seed_; }
  const ComplexVector& x() const { return x_; }
  const MimoOperator& op() const { return *op_; }
  std::uint64_t noise_seed() const;

  /// Lazily computed, then cached.
  const ParamLambda& oracle_prior();
  double spectral_norm2();
  Index support99();

 private:
  const ExperimentConfig& cfg_;
  int trial_;
  std::uint64_t seed_;
  ComplexVector x_;
  std::shared_ptr<const MimoOperator> op_;
  std::optional<ParamLambda> oracle_prior_;
  std::optional<double> spectral_norm2_;
  std::optional<Index> support99_;
};

struct CellOutcome {
  TrialRecord record;
  /// Estimate of x; empty when the method failed.
  ComplexVector x_hat;
};

/// Runs one method on one (bits, snr) measurement of the instance. Estimator
/// failures are recorded in the outcome, never thrown.
CellOutcome run_cell(const ExperimentConfig& cfg, TrialInstance& inst, int bits, double snr_db,
                     const std::string& method);

/// Rows per trial and in total, in (trial, bits, snr, method) order.
std::size_t rows_per_trial(const ExperimentConfig& cfg);
std::size_t total_rows(const ExperimentConfig& cfg);

/// Worker count after applying CHANEST_THREADS.
int worker_count(const ExperimentConfig& cfg);

using ProgressFn = std::function<void(int trials_done, int trials_total)>;

/// Runs the whole sweep. When write_csv is set, rows are appended to
/// cfg.output_path one trial at a time in deterministic order.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg, bool write_csv = true,
                                        const ProgressFn& progress = {});

struct ReplayResult {
  CellOutcome outcome;
  ComplexVector x_true;
  std::array<std::uint32_t, 4> dims{};
};

/// Recomputes 0-based data row `row` of the sweep described by cfg.
ReplayResult replay_row(const ExperimentConfig& cfg, std::size_t row);

std::string csv_header();
std::string format_record(const TrialRecord& r);
TrialRecord parse_record(const std::string& line);
std::vector<TrialRecord> read_records(const std::string& path);

struct SummaryRow {
  int bits = 0;
  double snr_db = 0.0;
  std::string method;
  /// Mean of the linear NMSE over successful trials, in dB; NaN if none.
  double nmse_db = 0.0;
  int trials = 0;
  int errors = 0;
};

/// Groups by (bits, snr, method) in order of first appearance.
/// Throws EmptyInput for no records.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);
std::string summary_csv(const std::vector<SummaryRow>& rows);
void write_summary(const std::string& path, const std::vector<SummaryRow>& rows);

}  // namespace chanest
