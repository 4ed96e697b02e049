#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "prl/agents/trainer.hpp"
#include "prl/harness/config.hpp"
#include "prl/harness/dataset.hpp"

namespace prl::harness {

/// One row of results.csv.
struct RunRow {
  std::string cell;   // Cell::key()
  std::string group;  // Cell::group_key()
  std::string env_id;
  std::uint64_t seed = 0;
  std::uint64_t run_seed = 0;
  bool ok = true;
  std::string error;
  double final_return = 0.0;
  double final_normalized = 0.0;
  double best_return = 0.0;
  double realized_sparsity = 0.0;
  std::uint64_t env_steps = 0;
  std::uint64_t grad_steps = 0;
};

/// One row of aggregate.csv: pooled over the environments and seeds of a group.
struct AggregateRow {
  std::string group;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double iqm = 0.0;
  double ci_low = 0.0;   // NaN when some env has fewer than two seeds
  double ci_high = 0.0;
  double mean_sparsity = 0.0;
};

struct SweepResult {
  std::vector<RunRow> runs;
  std::vector<AggregateRow> aggregate;
};

std::string run_dir_name(const Cell& cell, std::uint64_t seed);

/// Trains one (cell, seed) and writes metrics.csv, model.prlc and any
/// covariance matrices into `dir` (skipped when dir is empty).
agents::RunResult run_one(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed, const Dataset* dataset,
                          const std::filesystem::path& dir);

/// Executes every (cell, seed) on `cfg.workers` threads. Failed runs are
/// recorded, not rethrown. Writes results.csv, aggregate.csv, summary.txt
/// and runs/<cell>_seed<k>/ under cfg.output_dir.
SweepResult run_sweep(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

std::vector<AggregateRow> aggregate(const std::vector<RunRow>& runs);

void save_results_csv(const std::filesystem::path& path, const std::vector<RunRow>& rows);
std::vector<RunRow> load_results_csv(const std::filesystem::path& path);
void save_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);
void write_summary(std::ostream& os, const SweepResult& result);

}  // namespace prl::harness
