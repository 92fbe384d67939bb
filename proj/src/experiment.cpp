#include "chanest/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "chanest/error.hpp"

namespace chanest {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sub-stream indices under the trial seed.
enum Stream : std::uint64_t { kChannel = 1, kTraining = 2, kNoise = 3, kPower = 4 };

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

TrialRecord blank_record(const TrialInstance& inst, int bits, double snr_db, const std::string& method) {
  TrialRecord r;
  r.trial = inst.trial();
  r.bits = bits;
  r.snr_db = snr_db;
  r.method = method;
  r.seed = inst.seed();
  return r;
}

struct Estimate {
  ComplexVector x;
  int iterations = 0;
  bool converged = false;
  std::optional<double> tau_w;
  std::optional<double> kappa;
};

Estimate run_method(const ExperimentConfig& cfg, TrialInstance& inst, const Measurement& meas,
                    const std::string& method) {
  const MimoOperator& op = inst.op();
  Estimate e;
  if (method == "amp-pe") {
    const JointEstimate j = estimate_joint(op, meas.y, cfg.gamp, cfg.outer);
    e.x = j.x_hat;
    e.iterations = j.inner_iters_total;
    e.converged = j.converged;
    e.tau_w = j.theta_hat.tau_w;
    e.kappa = j.lambda_hat.kappa;
  } else if (method == "amp-oracle") {
    const ParamLambda& lambda = inst.oracle_prior();
    const GampResult g = amp_oracle(op, meas.y, lambda, ParamTheta{meas.tau_w}, cfg.gamp);
    e.x = g.x_hat;
    e.iterations = g.iterations_used;
    e.converged = g.converged;
    e.tau_w = meas.tau_w;
    e.kappa = lambda.kappa;
  } else if (method == "ls") {
    const LeastSquaresResult ls = least_squares(op, meas.y, cfg.ls_max_iters, cfg.ls_tol);
    e.x = ls.x;
    e.iterations = ls.iterations;
    e.converged = ls.converged;
  } else if (method == "iht") {
    const double l2 = inst.spectral_norm2();
    const Index n = op.cols();
    std::vector<Index> sizes;
    if (cfg.iht.sparsity > 0) {
      sizes.push_back(cfg.iht.sparsity);
    } else {
      // Generous to the baseline: the sparsity level is tuned on the true channel.
      for (double f : {0.5, 1.0, 1.5, 2.0})
        sizes.push_back(std::clamp<Index>(static_cast<Index>(std::llround(f * inst.support99())), 1, n));
    }
    double best = std::numeric_limits<double>::infinity();
    for (Index k : sizes) {
      IhtOptions opts = cfg.iht;
      opts.sparsity = k;
      const IhtResult r = iht(op, meas.y, opts, l2);
      const double err = (r.x - inst.x()).squaredNorm();
      if (err < best) {
        best = err;
        e.x = r.x;
        e.iterations = r.iterations;
        e.converged = r.converged;
      }
    }
  } else {
    throw Error(ErrorCode::ConfigError, "unknown method '" + method + "'");
  }
  return e;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw Error(ErrorCode::IoError, std::string("bad ") + what + " '" + s + "'");
  return v;
}

std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, int trial) {
  std::vector<TrialRecord> rows;
  rows.reserve(rows_per_trial(cfg));
  std::optional<TrialInstance> inst;
  std::string setup_error;
  try {
    inst.emplace(cfg, trial);
  } catch (const std::exception& ex) {
    setup_error = ex.what();
  }
  for (int bits : cfg.bits_list)
    for (double snr : cfg.snr_list_db)
      for (const auto& method : cfg.methods) {
        if (inst) {
          rows.push_back(run_cell(cfg, *inst, bits, snr, method).record);
        } else {
          TrialRecord r;
          r.trial = trial;
          r.bits = bits;
          r.snr_db = snr;
          r.method = method;
          r.seed = trial_seed(cfg.base_seed, trial);
          r.nmse_db = kNaN;
          r.error = setup_error;
          rows.push_back(r);
        }
      }
  return rows;
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base_seed, int trial) {
  return mix_seed(base_seed, static_cast<std::uint64_t>(trial));
}

TrialInstance::TrialInstance(const ExperimentConfig& cfg, int trial)
    : cfg_(cfg), trial_(trial), seed_(trial_seed(cfg.base_seed, trial)) {
  ChannelConfig cc = cfg.channel;
  cc.seed = mix_seed(seed_, kChannel);
  x_ = generate_channel(cc).vectorized();
  const TrainingBlock tb = generate_training(cc.n_t, cc.training_length, mix_seed(seed_, kTraining));
  op_ = assemble_operator(tb, cc);
}

std::uint64_t TrialInstance::noise_seed() const { return mix_seed(seed_, kNoise); }

const ParamLambda& TrialInstance::oracle_prior() {
  if (!oracle_prior_) {
    const double energy = x_.squaredNorm() / static_cast<double>(x_.size());
    oracle_prior_ = fit_prior_to_signal(x_, cfg_.outer.components, cfg_.oracle_resolution * energy);
  }
  return *oracle_prior_;
}

double TrialInstance::spectral_norm2() {
  if (!spectral_norm2_) spectral_norm2_ = spectral_norm_sq(*op_, 50, mix_seed(seed_, kPower));
  return *spectral_norm2_;
}

Index TrialInstance::support99() {
  if (!support99_) support99_ = effective_support(x_, 0.99);
  return *support99_;
}

CellOutcome run_cell(const ExperimentConfig& cfg, TrialInstance& inst, int bits, double snr_db,
                     const std::string& method) {
  CellOutcome out;
  out.record = blank_record(inst, bits, snr_db, method);
  try {
    // The quantizer is calibrated to the exact RMS of r, as an ideal ADC would be.
    const ComplexVector z = inst.op().forward(inst.x());
    const double power = z.squaredNorm() / static_cast<double>(z.size());
    const double tau_w = power / std::pow(10.0, std::min(snr_db, 300.0) / 10.0);
    const QuantizerSpec spec = quantizer_for(cfg, bits, std::sqrt(power + tau_w));
    const Measurement meas = simulate_measurements(inst.x(), inst.op(), snr_db, spec, inst.noise_seed());

    const auto t0 = std::chrono::steady_clock::now();
    Estimate e = run_method(cfg, inst, meas, method);
    const double ms = elapsed_ms(t0);

    out.record.nmse_db = nmse_db(e.x, inst.x());
    out.record.iterations = e.iterations;
    out.record.runtime_ms = cfg.record_runtime ? ms : 0.0;
    out.record.tau_w_hat = e.tau_w;
    out.record.kappa_hat = e.kappa;
    out.record.converged = e.converged;
    out.x_hat = std::move(e.x);
  } catch (const std::exception& ex) {
    out.record.nmse_db = kNaN;
    out.record.error = ex.what();
    out.x_hat.resize(0);
  }
  return out;
}

std::size_t rows_per_trial(const ExperimentConfig& cfg) {
  return cfg.bits_list.size() * cfg.snr_list_db.size() * cfg.methods.size();
}

std::size_t total_rows(const ExperimentConfig& cfg) {
  return static_cast<std::size_t>(cfg.trials) * rows_per_trial(cfg);
}

int worker_count(const ExperimentConfig& cfg) {
  int n = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CHANEST_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::clamp(n, 1, cfg.trials);
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg, bool write_csv, const ProgressFn& progress) {
  cfg.validate();
  std::ofstream csv;
  if (write_csv) {
    csv.open(cfg.output_path, std::ios::trunc);
    if (!csv) throw Error(ErrorCode::IoError, "cannot write " + cfg.output_path);
    csv << csv_header() << '\n' << std::flush;
  }

  // Workers claim whole trials; the calling thread commits finished trials
  // strictly in trial order so the file never depends on scheduling.
  std::vector<std::optional<std::vector<TrialRecord>>> done(cfg.trials);
  std::mutex mu;
  std::condition_variable cv;
  int next = 0;
  auto worker = [&] {
    for (;;) {
      int t;
      {
        std::lock_guard lock(mu);
        if (next >= cfg.trials) return;
        t = next++;
      }
      std::vector<TrialRecord> rows = run_trial(cfg, t);
      {
        std::lock_guard lock(mu);
        done[t] = std::move(rows);
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  const int workers = worker_count(cfg);
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);

  std::vector<TrialRecord> all;
  all.reserve(total_rows(cfg));
  for (int t = 0; t < cfg.trials; ++t) {
    std::vector<TrialRecord> rows;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return done[t].has_value(); });
      rows = std::move(*done[t]);
      done[t].reset();
    }
    if (write_csv) {
      for (const auto& r : rows) csv << format_record(r) << '\n';
      csv.flush();
    }
    all.insert(all.end(), rows.begin(), rows.end());
    if (progress) progress(t + 1, cfg.trials);
  }
  for (auto& th : pool) th.join();
  if (write_csv && !csv) throw Error(ErrorCode::IoError, "write failed for " + cfg.output_path);
  return all;
}

ReplayResult replay_row(const ExperimentConfig& cfg, std::size_t row) {
  cfg.validate();
  if (row >= total_rows(cfg))
    throw Error(ErrorCode::InvalidParams,
                "row " + std::to_string(row) + " outside 0.." + std::to_string(total_rows(cfg) - 1));
  const std::size_t per_trial = rows_per_trial(cfg);
  const std::size_t n_methods = cfg.methods.size();
  const std::size_t n_snr = cfg.snr_list_db.size();
  const int trial = static_cast<int>(row / per_trial);
  std::size_t rem = row % per_trial;
  const int bits = cfg.bits_list[rem / (n_snr * n_methods)];
  rem %= n_snr * n_methods;
  const double snr = cfg.snr_list_db[rem / n_methods];
  const std::string& method = cfg.methods[rem % n_methods];

  TrialInstance inst(cfg, trial);
  ReplayResult res;
  res.outcome = run_cell(cfg, inst, bits, snr, method);
  res.x_true = inst.x();
  res.dims = {static_cast<std::uint32_t>(cfg.channel.n_r), static_cast<std::uint32_t>(cfg.channel.n_t),
              static_cast<std::uint32_t>(cfg.channel.taps), 1u};
  return res;
}

std::string csv_header() {
  return "trial,bits,snr_db,method,nmse_db,iterations,runtime_ms,tau_w_hat,kappa_hat,converged,seed";
}

std::string format_record(const TrialRecord& r) {
  std::string s = std::to_string(r.trial) + ',' + std::to_string(r.bits) + ',' + fmt(r.snr_db) + ',' + r.method + ',';
  s += r.failed() ? "err" : fmt(r.nmse_db);
  s += ',' + std::to_string(r.iterations) + ',' + fmt(r.runtime_ms) + ',';
  s += (r.tau_w_hat ? fmt(*r.tau_w_hat) : "") + ',';
  s += (r.kappa_hat ? fmt(*r.kappa_hat) : "") + ',';
  s += std::string(r.converged ? "true" : "false") + ',' + std::to_string(r.seed);
  return s;
}

TrialRecord parse_record(const std::string& line) {
  const auto f = split_csv(line);
  if (f.size() != 11) throw Error(ErrorCode::IoError, "expected 11 fields in '" + line + "'");
  TrialRecord r;
  r.trial = static_cast<int>(parse_number(f[0], "trial"));
  r.bits = static_cast<int>(parse_number(f[1], "bits"));
  r.snr_db = parse_number(f[2], "snr_db");
  r.method = f[3];
  r.nmse_db = f[4] == "err" ? kNaN : parse_number(f[4], "nmse_db");
  r.iterations = static_cast<int>(parse_number(f[5], "iterations"));
  r.runtime_ms = parse_number(f[6], "runtime_ms");
  if (!f[7].empty()) r.tau_w_hat = parse_number(f[7], "tau_w_hat");
  if (!f[8].empty()) r.kappa_hat = parse_number(f[8], "kappa_hat");
  r.converged = f[9] == "true";
  r.seed = std::stoull(f[10]);
  return r;
}

std::vector<TrialRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw Error(ErrorCode::IoError, path + ": unexpected header");
  std::vector<TrialRecord> out;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_record(line));
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "summarize needs at least one record");
  using Key = std::tuple<int, double, std::string>;
  std::map<Key, std::size_t> index;
  std::vector<SummaryRow> rows;
  std::vector<double> linear_sum;
  for (const auto& r : records) {
    const Key key{r.bits, r.snr_db, r.method};
    auto [it, fresh] = index.emplace(key, rows.size());
    if (fresh) {
      rows.push_back(SummaryRow{r.bits, r.snr_db, r.method, 0.0, 0, 0});
      linear_sum.push_back(0.0);
    }
    SummaryRow& row = rows[it->second];
    ++row.trials;
    if (r.failed())
      ++row.errors;
    else
      linear_sum[it->second] += std::pow(10.0, r.nmse_db / 10.0);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int ok = rows[i].trials - rows[i].errors;
    rows[i].nmse_db = ok > 0 ? std::max(10.0 * std::log10(linear_sum[i] / ok), -300.0) : kNaN;
  }
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "bits,snr_db,method,nmse_db,trials,errors\n";
  for (const auto& r : rows) {
    out += std::to_string(r.bits) + ',' + fmt(r.snr_db) + ',' + r.method + ',';
    out += std::isnan(r.nmse_db) ? "err" : fmt(r.nmse_db);
    out += ',' + std::to_string(r.trials) + ',' + std::to_string(r.errors) + '\n';
  }
  return out;
}

void write_summary(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << summary_csv(rows);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace chanest
