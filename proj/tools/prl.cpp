#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "prl/envs/environment.hpp"
#include "prl/harness/config.hpp"
#include "prl/harness/dataset.hpp"
#include "prl/harness/metrics_csv.hpp"
#include "prl/harness/report.hpp"
#include "prl/harness/sweep.hpp"
#include "prl/net/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace prl;

namespace {

harness::ExperimentConfig load_single(const std::string& path, const std::string& out, std::size_t& cells) {
  auto cfg = harness::load_config(path);
  if (!out.empty()) cfg.output_dir = out;
  cfg.validate();
  cells = cfg.cells().size();
  return cfg;
}

int train(const std::string& config, std::uint64_t seed, const std::string& out, const std::string& dataset_path,
          bool offline) {
  std::size_t cells = 0;
  auto cfg = load_single(config, out, cells);
  if (!dataset_path.empty()) cfg.dataset = dataset_path;
  if (cells != 1) {
    std::cerr << "train: config describes " << cells << " cells; use 'sweep' for grids\n";
    return 2;
  }
  const auto cell = cfg.cells().front();
  const auto spec = harness::make_run_spec(cfg, cell);
  if (spec.agent.offline() != offline) {
    std::cerr << (offline ? "train-offline: agent must be cql or cql-c51\n" : "train: offline agents need train-offline\n");
    return 2;
  }
  std::optional<harness::Dataset> ds;
  if (offline) {
    if (cfg.dataset.empty()) {
      std::cerr << "train-offline: no dataset given\n";
      return 2;
    }
    ds = harness::load_dataset(cfg.dataset);
  }
  const auto res = harness::run_one(cfg, cell, seed, ds ? &*ds : nullptr, cfg.output_dir);
  std::cout << "run " << cell.key() << " seed " << seed << (res.ok ? " ok" : " FAILED: " + res.error) << '\n'
            << "final return " << res.final_return << " (normalized " << res.final_normalized << ")\n"
            << "realized sparsity " << res.realized_sparsity << '\n'
            << "outputs in " << cfg.output_dir.string() << '\n';
  return res.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse value-based RL laboratory"};
  app.require_subcommand(1);

  std::string config, out, dataset_path, checkpoint, env_id;
  std::uint64_t seed = 0;
  std::size_t workers = 0;

  auto* train_cmd = app.add_subcommand("train", "Train one online run");
  train_cmd->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", seed, "Seed");
  train_cmd->add_option("--out", out, "Output directory");

  auto* offline_cmd = app.add_subcommand("train-offline", "Train one offline run on a dataset");
  offline_cmd->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  offline_cmd->add_option("--seed", seed, "Seed");
  offline_cmd->add_option("--out", out, "Output directory");
  offline_cmd->add_option("--dataset", dataset_path, "Dataset file (overrides the config)");

  std::uint64_t steps = 100000;
  double rate = 0.05, epsilon = 0.01;
  auto* record_cmd = app.add_subcommand("record-dataset", "Record an offline dataset from a checkpoint");
  record_cmd->add_option("--checkpoint", checkpoint, "Behaviour network (.prlc)")->required()->check(CLI::ExistingFile);
  record_cmd->add_option("--env", env_id, "Environment")->required();
  record_cmd->add_option("--steps", steps, "Environment steps to roll out");
  record_cmd->add_option("--rate", rate, "Probability of keeping a transition")->check(CLI::Range(0.0, 1.0));
  record_cmd->add_option("--epsilon", epsilon, "Behaviour epsilon")->check(CLI::Range(0.0, 1.0));
  record_cmd->add_option("--seed", seed, "Seed");
  record_cmd->add_option("--out", out, "Dataset file")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Run every cell and seed of a config grid");
  sweep_cmd->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", out, "Output directory");
  sweep_cmd->add_option("--workers", workers, "Parallel runs");
  auto* seed_opt = sweep_cmd->add_option("--seed", seed, "Run only this seed");

  auto* analyze_cmd = app.add_subcommand("analyze", "Recompute aggregate.csv and summary.txt from results.csv");
  analyze_cmd->add_option("--out", out, "Sweep directory")->required()->check(CLI::ExistingDirectory);

  std::string charts;
  auto* report_cmd = app.add_subcommand("report", "Write charts and a summary for a sweep");
  report_cmd->add_option("--out", out, "Sweep directory")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_option("--charts", charts, "Chart directory (default <out>/report)");

  double final_sparsity = 0.9, start = 0.2, end = 0.8;
  std::uint64_t total = 10000, interval = 100, stride = 0;
  std::string svg_path;
  auto* sched_cmd = app.add_subcommand("schedule-dump", "Print (t, s_t) for a pruning schedule as CSV");
  sched_cmd->add_option("--final-sparsity", final_sparsity, "Final sparsity")->check(CLI::Range(0.0, 1.0));
  sched_cmd->add_option("--total", total, "Total gradient steps");
  sched_cmd->add_option("--start", start, "Window start fraction");
  sched_cmd->add_option("--end", end, "Window end fraction");
  sched_cmd->add_option("--interval", interval, "Mask update interval");
  sched_cmd->add_option("--stride", stride, "Row stride (default total/100)");
  sched_cmd->add_option("--out", out, "CSV file (default stdout)");
  sched_cmd->add_option("--svg", svg_path, "Also write a chart");

  std::size_t episodes = 10000;
  auto* cal_cmd = app.add_subcommand("calibrate", "Measure random-policy baselines and write the registry");
  cal_cmd->add_option("--episodes", episodes, "Episodes per environment");
  cal_cmd->add_option("--seed", seed, "Seed");
  cal_cmd->add_option("--out", out, "Registry file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return train(config, seed, out, "", false);
    if (*offline_cmd) return train(config, seed, out, dataset_path, true);

    if (*record_cmd) {
      const auto net = net::load_checkpoint(checkpoint);
      const auto rec = harness::record_dataset(net, env_id, steps, rate, seed, epsilon);
      harness::save_dataset(out, rec.dataset);
      std::cout << "recorded " << rec.dataset.transitions.size() << " transitions from " << steps << " steps, "
                << rec.episodes << " episodes, behaviour mean return " << rec.behavior_mean_return << '\n';
      return 0;
    }

    if (*sweep_cmd) {
      auto cfg = harness::load_config(config);
      if (!out.empty()) cfg.output_dir = out;
      if (workers > 0) cfg.workers = workers;
      if (*seed_opt) cfg.seeds = {seed};
      const auto res = harness::run_sweep(cfg, &std::cout);
      harness::write_summary(std::cout, res);
      for (const auto& r : res.runs)
        if (!r.ok) return 1;
      return 0;
    }

    if (*analyze_cmd) {
      harness::SweepResult res;
      res.runs = harness::load_results_csv(fs::path(out) / "results.csv");
      res.aggregate = harness::aggregate(res.runs);
      harness::save_aggregate_csv(fs::path(out) / "aggregate.csv", res.aggregate);
      std::ofstream summary(fs::path(out) / "summary.txt");
      harness::write_summary(summary, res);
      harness::write_summary(std::cout, res);
      return 0;
    }

    if (*report_cmd) {
      const fs::path dir = charts.empty() ? fs::path(out) / "report" : fs::path(charts);
      const auto rep = harness::emit_report(out, dir);
      for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "wrote " << rep.charts.size() << " charts and summary.txt to " << dir.string() << '\n';
      return 0;
    }

    if (*sched_cmd) {
      const auto sched = prune::PruneSchedule::from_fractions(final_sparsity, total, start, end, interval);
      const std::uint64_t s = stride ? stride : std::max<std::uint64_t>(1, total / 100);
      if (out.empty()) {
        harness::write_schedule_csv(std::cout, sched, total, s);
      } else {
        std::ofstream os(out);
        harness::write_schedule_csv(os, sched, total, s);
      }
      if (!svg_path.empty()) std::ofstream(svg_path) << harness::schedule_chart({sched}, total);
      return 0;
    }

    if (*cal_cmd) {
      const auto reg = envs::calibrate_registry(episodes, seed);
      if (out.empty()) {
        for (const auto& [id, ref] : reg)
          std::cout << id << ".random = " << harness::format_double(ref.random) << '\n'
                    << id << ".reference = " << harness::format_double(ref.reference) << '\n';
      } else {
        envs::save_registry(out, reg);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
