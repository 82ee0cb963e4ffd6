// Copyright 2026 The memchan developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "memchan/config.hpp"
#include "memchan/recovery.hpp"

namespace fs = std::filesystem;
using namespace memchan;

namespace {

constexpr const char* kVersion = "memchan 1.0.0";

// exit codes: 0 ok, 2 config error, 3 data error, 4 pipeline error
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  auto* config = cmd->add_option("--config", opts.config_path, "config file path");
  auto* preset =
      cmd->add_option("--preset", opts.preset,
                      "interaction preset (identity, delay-swap, controlled-not, "
                      "controlled-z, random-regular)");
  config->excludes(preset);
  cmd->add_option("--seed", opts.seed, "override run.seed");
  cmd->add_option("--out", opts.out_dir, "output directory (created if missing)");
}

AppConfig resolve_config(const CommonOpts& opts) {
  AppConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = load_config(opts.config_path);
  } else if (!opts.preset.empty()) {
    cfg = preset_config(opts.preset, opts.seed.value_or(0));
    cfg.experiment.n_steps = 100000;
  } else {
    throw ConfigError("either --config or --preset is required");
  }
  if (opts.seed) cfg.experiment.seed = *opts.seed;
  return cfg;
}

fs::path ensure_out_dir(const CommonOpts& opts) {
  const fs::path dir(opts.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory: " + dir.string());
  return dir;
}

// Statistical pipelines widen the unitality tolerance with the sampling noise
// floor; an explicit thresholds.noise_scale wins.
RecoverySettings effective_settings(const AppConfig& cfg) {
  RecoverySettings s = cfg.recovery;
  if (s.noise_scale == 1.0) {
    s.noise_scale =
        std::max(1.0, 300.0 / std::sqrt(static_cast<double>(cfg.experiment.n_steps)));
  }
  return s;
}

void write_manifest(const fs::path& path, const AppConfig& cfg,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream os(path);
  os << "tool = " << kVersion << "\n";
  os << "fingerprint = " << config_fingerprint(cfg.experiment) << "\n";
  os << "seed = " << cfg.experiment.seed << "\n";
  for (const auto& [key, value] : entries) os << key << " = " << value << "\n";
}

int cmd_simulate(const CommonOpts& opts) {
  const AppConfig cfg = resolve_config(opts);
  const fs::path dir = ensure_out_dir(opts);
  const Dataset ds = run_experiment(cfg.experiment);

  const fs::path dataset_path = dir / "dataset.csv";
  {
    std::ofstream os(dataset_path);
    if (!os) throw DataError("cannot write " + dataset_path.string());
    ds.write(os);
  }
  const fs::path config_path = dir / "config.txt";
  {
    std::ofstream os(config_path);
    write_config(os, cfg);
  }
  write_manifest(dir / "manifest.txt", cfg,
                 {{"config", config_path.string()}, {"dataset", dataset_path.string()}});
  std::cout << "dataset = " << dataset_path.string() << "\n"
            << "records = " << ds.records.size() << "\n"
            << "fingerprint = " << ds.config_fingerprint << "\n";
  return 0;
}

int run_estimate(const CommonOpts& opts, const std::string& dataset_path) {
  const AppConfig cfg = resolve_config(opts);
  const fs::path dir = ensure_out_dir(opts);

  std::ifstream is(dataset_path);
  if (!is) throw DataError("cannot open dataset: " + dataset_path);
  Dataset ds;
  try {
    ds = Dataset::read(is);
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
  if (ds.config_fingerprint != config_fingerprint(cfg.experiment)) {
    throw DataError("dataset fingerprint does not match the config");
  }

  const RecoverySettings settings = effective_settings(cfg);
  const RecoveryResult result =
      estimate_interaction(ds, cfg.experiment.ensemble, cfg.experiment.povm, settings);
  const double dist =
      gauge_distance(cfg.ground_truth().matrix, result.assembled());

  const fs::path report_path = dir / "report.txt";
  {
    std::ofstream os(report_path);
    os << "tool = " << kVersion << "\n";
    os << "dataset_fingerprint = " << ds.config_fingerprint << "\n";
    write_report(os, result, dist);
  }
  write_report(std::cout, result, dist);
  std::cout << "report = " << report_path.string() << "\n";
  return 0;
}

int cmd_oracle(const CommonOpts& opts) {
  const AppConfig cfg = resolve_config(opts);
  const fs::path dir = ensure_out_dir(opts);
  const ChannelEstimates estimates = exact_channel_estimates(
      cfg.experiment.interaction, cfg.experiment.ensemble, cfg.experiment.povm);
  const RecoveryResult result = estimate_from_channels(estimates, cfg.recovery);
  const double dist = gauge_distance(cfg.ground_truth().matrix, result.assembled());

  const fs::path report_path = dir / "report.txt";
  {
    std::ofstream os(report_path);
    os << "tool = " << kVersion << "\n";
    os << "mode = oracle\n";
    write_report(os, result, dist);
  }
  write_report(std::cout, result, dist);
  std::cout << "report = " << report_path.string() << "\n";
  return 0;
}

// The delay channel: ordered probing sees a noiseless identity, randomized
// probing sees maximal noise, and shifting outcomes by one step re-aligns the
// randomized data with the inputs.
int cmd_demo_delay(const CommonOpts& opts, std::int64_t n, std::int64_t block) {
  const fs::path dir = ensure_out_dir(opts);
  AppConfig cfg = preset_config("delay-swap", opts.seed.value_or(0));
  cfg.experiment.n_steps = n;

  // randomized probing
  const Dataset random_ds = run_experiment(cfg.experiment);
  const BlochAffineMap random_est = reconstruct_single(
      tally(random_ds, cfg.experiment.ensemble.size(), cfg.experiment.povm.size()),
      cfg.experiment.ensemble, cfg.experiment.povm);

  // ordered probing, reconstructed from block interiors only (the first step
  // of each block still carries the previous block's state)
  AppConfig ordered = cfg;
  ordered.experiment.mode = RunMode::kOrdered;
  ordered.experiment.block_size = block;
  const Dataset ordered_ds = run_experiment(ordered.experiment);
  Dataset interior;
  interior.config_fingerprint = ordered_ds.config_fingerprint;
  for (const DatasetRecord& rec : ordered_ds.records)
    if (rec.step % block != 0) interior.records.push_back(rec);
  const BlochAffineMap ordered_est = reconstruct_single(
      tally(interior, cfg.experiment.ensemble.size(), cfg.experiment.povm.size()),
      cfg.experiment.ensemble, cfg.experiment.povm);

  // shift-by-one pairing on the randomized data: outcome j+1 against input j
  Dataset shifted;
  shifted.config_fingerprint = random_ds.config_fingerprint;
  for (std::size_t j = 0; j + 1 < random_ds.records.size(); ++j) {
    shifted.records.push_back({random_ds.records[j].step,
                               random_ds.records[j].setting_id,
                               random_ds.records[j + 1].outcome_id});
  }
  const FrequencyTable shifted_tally =
      tally(shifted, cfg.experiment.ensemble.size(), cfg.experiment.povm.size());
  double worst_tv = 0.0;
  for (std::size_t x = 0; x < cfg.experiment.ensemble.size(); ++x) {
    double tv = 0.0;
    for (std::size_t k = 0; k < cfg.experiment.povm.size(); ++k) {
      const double p = (cfg.experiment.povm.effects[k] *
                        cfg.experiment.ensemble.entries[x].state.density())
                           .trace()
                           .real();
      tv += 0.5 * std::abs(shifted_tally.freqs(x, k) - p);
    }
    worst_tv = std::max(worst_tv, tv);
  }

  std::ostringstream report;
  report.precision(6);
  report << "tool = " << kVersion << "\n";
  report << "mode = demo-delay\n";
  report << "n = " << n << "\n";
  report << "random.T_norm = " << random_est.T.norm() << "\n";
  report << "random.unitarity_score = " << unitarity_score(random_est) << "\n";
  report << "ordered.block_size = " << block << "\n";
  report << "ordered.unitarity_score = " << unitarity_score(ordered_est) << "\n";
  report << "ordered.T_minus_identity = "
         << (ordered_est.T - Mat3::Identity()).norm() << "\n";
  report << "shifted.worst_tv = " << worst_tv << "\n";
  report << "shifted.tv_bound = " << 3.0 / std::sqrt(static_cast<double>(n)) << "\n";

  std::ofstream os(dir / "demo-delay.txt");
  os << report.str();
  std::cout << report.str();
  return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::vector<std::int64_t>& n_list,
              int runs) {
  const fs::path dir = ensure_out_dir(opts);
  const fs::path csv_path = dir / "sweep.csv";
  std::ofstream csv(csv_path);
  csv << "n,seed,branch,gauge_distance\n";
  csv.precision(10);
  for (const std::int64_t n : n_list) {
    for (int run = 0; run < runs; ++run) {
      CommonOpts run_opts = opts;
      run_opts.seed = opts.seed.value_or(0) + static_cast<std::uint64_t>(run);
      AppConfig cfg = resolve_config(run_opts);
      cfg.experiment.n_steps = n;
      const Dataset ds = run_experiment(cfg.experiment);
      const RecoverySettings settings = effective_settings(cfg);
      try {
        const RecoveryResult result = estimate_interaction(
            ds, cfg.experiment.ensemble, cfg.experiment.povm, settings);
        const double dist =
            gauge_distance(cfg.ground_truth().matrix, result.assembled());
        csv << n << ',' << cfg.experiment.seed << ','
            << (result.branch == RecoveryResult::Branch::kGeneric ? "generic"
                                                                  : "controlled")
            << ',' << dist << "\n";
      } catch (const PipelineError& e) {
        csv << n << ',' << cfg.experiment.seed << ",failed:" << e.stage << ",nan\n";
      }
    }
  }
  std::cout << "sweep = " << csv_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulator and estimator for qubit memory channels"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts sim_opts;
  CLI::App* simulate = app.add_subcommand("simulate", "run a collision experiment");
  add_common(simulate, sim_opts);

  CommonOpts est_opts;
  std::string dataset_path;
  CLI::App* estimate =
      app.add_subcommand("estimate", "recover the interaction from a dataset");
  add_common(estimate, est_opts);
  estimate->add_option("--dataset", dataset_path, "dataset file")->required();

  CommonOpts oracle_opts;
  CLI::App* oracle =
      app.add_subcommand("oracle", "run the pipeline on exact statistics");
  add_common(oracle, oracle_opts);

  CommonOpts demo_opts;
  std::int64_t demo_n = 100000;
  std::int64_t demo_block = 100;
  CLI::App* demo =
      app.add_subcommand("demo-delay", "ordered vs random probing of the delay channel");
  demo->add_option("--seed", demo_opts.seed, "run seed");
  demo->add_option("--out", demo_opts.out_dir, "output directory");
  demo->add_option("--n", demo_n, "number of steps");
  demo->add_option("--block", demo_block, "ordered-mode block size");

  CommonOpts sweep_opts;
  std::vector<std::int64_t> sweep_n{10000, 100000, 1000000};
  int sweep_runs = 1;
  CLI::App* sweep = app.add_subcommand("sweep", "gauge distance vs sample size (CSV)");
  add_common(sweep, sweep_opts);
  sweep->add_option("--n", sweep_n, "sample sizes");
  sweep->add_option("--runs", sweep_runs, "seeds per sample size");

  try {
    app.parse(argc, argv);
    if (simulate->parsed()) return cmd_simulate(sim_opts);
    if (estimate->parsed()) return run_estimate(est_opts, dataset_path);
    if (oracle->parsed()) return cmd_oracle(oracle_opts);
    if (demo->parsed()) return cmd_demo_delay(demo_opts, demo_n, demo_block);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_n, sweep_runs);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "error code=2 kind=config msg=" << e.what() << "\n";
    return 2;
  } catch (const PipelineError& e) {
    std::cerr << "error code=4 kind=pipeline stage=" << e.stage << " msg=" << e.what()
              << "\n";
    return 4;
  } catch (const IllPosedReconstruction& e) {
    std::cerr << "error code=3 kind=data msg=" << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error code=3 kind=data msg=" << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error code=4 kind=pipeline msg=" << e.what() << "\n";
    return 4;
  }
}
