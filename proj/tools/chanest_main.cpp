#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chanest/config.hpp"
#include "chanest/error.hpp"
#include "chanest/experiment.hpp"

namespace {

chanest::ExperimentConfig resolve(const std::string& path, const std::vector<std::string>& overrides) {
  chanest::ExperimentConfig cfg = chanest::load_config(path);
  for (const auto& o : overrides) chanest::apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

int cmd_run(const std::string& config, const std::vector<std::string>& overrides, bool quiet) {
  const auto cfg = resolve(config, overrides);
  if (!quiet)
    std::fprintf(stderr, "running %zu rows on %d worker(s) -> %s\n", chanest::total_rows(cfg),
                 chanest::worker_count(cfg), cfg.output_path.c_str());
  chanest::ProgressFn progress;
  if (!quiet) progress = [](int done, int total) { std::fprintf(stderr, "trial %d/%d done\n", done, total); };
  const auto records = chanest::run_experiment(cfg, true, progress);
  int errors = 0;
  for (const auto& r : records) {
    if (!r.failed()) continue;
    ++errors;
    std::fprintf(stderr, "error: trial %d bits %d snr %g %s: %s\n", r.trial, r.bits, r.snr_db, r.method.c_str(),
                 r.error.c_str());
  }
  if (!quiet) std::fprintf(stderr, "%zu rows written, %d error(s)\n", records.size(), errors);
  return 0;
}

int cmd_summarize(const std::string& in, const std::string& out) {
  const auto rows = chanest::summarize(chanest::read_records(in));
  if (out.empty() || out == "-")
    std::cout << chanest::summary_csv(rows);
  else
    chanest::write_summary(out, rows);
  return 0;
}

int cmd_replay(const std::string& config, const std::vector<std::string>& overrides, std::size_t row,
               const std::string& dump) {
  const auto cfg = resolve(config, overrides);
  const auto res = chanest::replay_row(cfg, row);
  std::cout << chanest::csv_header() << '\n' << chanest::format_record(res.outcome.record) << '\n';
  if (res.outcome.record.failed()) std::cerr << "error: " << res.outcome.record.error << '\n';
  if (!dump.empty()) {
    chanest::write_tensor_artifact(dump + "_true.bin", res.dims, res.x_true);
    if (res.outcome.x_hat.size() > 0) chanest::write_tensor_artifact(dump + "_est.bin", res.dims, res.outcome.x_hat);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized MIMO channel estimation experiments"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the configured sweep and write per-trial CSV rows");
  run->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--override", overrides, "key=value assignment applied after the file");
  run->add_flag("--quiet", quiet, "No progress output");

  std::string in, out;
  auto* sum = app.add_subcommand("summarize", "Average per-trial rows into a summary CSV");
  sum->add_option("--in", in, "Per-trial CSV")->required()->check(CLI::ExistingFile);
  sum->add_option("--out", out, "Summary CSV ('-' for stdout)");

  std::size_t row = 0;
  std::string dump;
  auto* rep = app.add_subcommand("replay", "Recompute one data row (0-based) and print it");
  rep->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  rep->add_option("--override", overrides, "key=value assignment applied after the file");
  rep->add_option("--row", row, "0-based data row index")->required();
  rep->add_option("--dump", dump, "Write <prefix>_true.bin and <prefix>_est.bin channel tensors");

  auto* show = app.add_subcommand("config", "Print the fully resolved config");
  show->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  show->add_option("--override", overrides, "key=value assignment applied after the file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, overrides, quiet);
    if (*sum) return cmd_summarize(in, out);
    if (*rep) return cmd_replay(config, overrides, row, dump);
    if (*show) {
      std::cout << chanest::to_config_text(resolve(config, overrides));
      return 0;
    }
  } catch (const chanest::Error& e) {
    std::cerr << "chanest: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "chanest: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
